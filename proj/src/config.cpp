#include "densepoly/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>
#include <variant>

#include "densepoly/io.hpp"

namespace densepoly::cli {

namespace {

using Slot = std::variant<double*, int*, std::uint64_t*>;
using Locator = std::function<Slot(PipelineConfig&)>;

const std::map<std::string, Locator>& table() {
  static const std::map<std::string, Locator> t = {
      {"synth.seed", [](PipelineConfig& c) -> Slot { return &c.synth.seed; }},
      {"synth.width", [](PipelineConfig& c) -> Slot { return &c.synth.width; }},
      {"synth.height", [](PipelineConfig& c) -> Slot { return &c.synth.height; }},
      {"synth.density", [](PipelineConfig& c) -> Slot { return &c.synth.target_density; }},
      {"synth.min_size", [](PipelineConfig& c) -> Slot { return &c.synth.min_size; }},
      {"synth.max_size", [](PipelineConfig& c) -> Slot { return &c.synth.max_size; }},
      {"synth.rotation", [](PipelineConfig& c) -> Slot { return &c.synth.rotation; }},
      {"synth.shared_wall_prob", [](PipelineConfig& c) -> Slot { return &c.synth.shared_wall_prob; }},
      {"synth.l_shape_prob", [](PipelineConfig& c) -> Slot { return &c.synth.l_shape_prob; }},
      {"synth.min_gap", [](PipelineConfig& c) -> Slot { return &c.synth.min_gap; }},
      {"synth.edge_width", [](PipelineConfig& c) -> Slot { return &c.synth.edge_width; }},
      {"synth.noise_sigma", [](PipelineConfig& c) -> Slot { return &c.synth.noise_sigma; }},
      {"synth.blur", [](PipelineConfig& c) -> Slot { return &c.synth.blur_radius; }},

      {"polygonize.edge_thresh", [](PipelineConfig& c) -> Slot { return &c.polygonize.edge_thresh; }},
      {"polygonize.min_prob", [](PipelineConfig& c) -> Slot { return &c.polygonize.min_prob; }},
      {"polygonize.min_area", [](PipelineConfig& c) -> Slot { return &c.polygonize.min_area; }},
      {"polygonize.corner_angle_thresh",
       [](PipelineConfig& c) -> Slot { return &c.polygonize.corner_angle_thresh; }},
      {"polygonize.rdp_tol", [](PipelineConfig& c) -> Slot { return &c.polygonize.rdp_tol; }},
      {"polygonize.eps_degenerate", [](PipelineConfig& c) -> Slot { return &c.polygonize.eps_degenerate; }},

      {"acm.lambda_data", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.lambda_data; }},
      {"acm.lambda_ff", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.lambda_ff; }},
      {"acm.lambda_internal", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.lambda_internal; }},
      {"acm.step0", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.step0; }},
      {"acm.max_iters", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.max_iters; }},
      {"acm.tol", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.tol; }},
      {"acm.max_halvings", [](PipelineConfig& c) -> Slot { return &c.polygonize.acm.max_halvings; }},

      {"losses.seg_mix", [](PipelineConfig& c) -> Slot { return &c.losses.params.seg_mix; }},
      {"losses.clamp_eps", [](PipelineConfig& c) -> Slot { return &c.losses.params.clamp_eps; }},
      {"losses.smooth_eps", [](PipelineConfig& c) -> Slot { return &c.losses.params.smooth_eps; }},
      {"losses.grad_eps", [](PipelineConfig& c) -> Slot { return &c.losses.params.grad_eps; }},
      {"losses.weight_w0", [](PipelineConfig& c) -> Slot { return &c.losses.weight_w0; }},
      {"losses.weight_sigma", [](PipelineConfig& c) -> Slot { return &c.losses.weight_sigma; }},

      {"gradcheck.step", [](PipelineConfig& c) -> Slot { return &c.gradcheck.step; }},
      {"gradcheck.probes", [](PipelineConfig& c) -> Slot { return &c.gradcheck.probes; }},
      {"gradcheck.seed", [](PipelineConfig& c) -> Slot { return &c.gradcheck.seed; }},
  };
  return t;
}

const Locator& locate(const std::string& key) {
  const auto it = table().find(key);
  if (it == table().end()) throw ValidationError("config: unknown key '" + key + "'");
  return it->second;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ValidationError("config: cannot parse '" + text + "' for key '" + key + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ValidationError("config: non-finite value for key '" + key + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, loc] : table()) k.push_back(key);
    return k;
  }();
  return keys;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const Slot slot = locate(key)(*this);
  std::visit([&](auto* p) { *p = parse_number<std::remove_pointer_t<decltype(p)>>(key, value); }, slot);
}

std::string PipelineConfig::get(const std::string& key) const {
  PipelineConfig copy = *this;
  const Slot slot = locate(key)(copy);
  return std::visit(
      [](auto* p) -> std::string {
        if constexpr (std::is_same_v<decltype(p), double*>) {
          return format_double(*p);
        } else {
          return std::to_string(*p);
        }
      },
      slot);
}

void PipelineConfig::validate() const {
  try {
    synth.validate();
    polygonize.validate();
  } catch (const DomainError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  const losses::LossParams& lp = losses.params;
  if (!(lp.seg_mix >= 0.0 && lp.seg_mix <= 1.0)) throw ValidationError("config: losses.seg_mix must lie in [0, 1]");
  if (!(lp.clamp_eps > 0.0 && lp.clamp_eps < 0.5)) {
    throw ValidationError("config: losses.clamp_eps must lie in (0, 0.5)");
  }
  if (!(lp.smooth_eps > 0.0)) throw ValidationError("config: losses.smooth_eps must be positive");
  if (!(lp.grad_eps > 0.0)) throw ValidationError("config: losses.grad_eps must be positive");
  if (!(losses.weight_w0 >= 0.0)) throw ValidationError("config: losses.weight_w0 must be non-negative");
  if (!(losses.weight_sigma > 0.0)) throw ValidationError("config: losses.weight_sigma must be positive");
  if (!(gradcheck.step > 0.0 && gradcheck.step <= 1e-2)) {
    throw ValidationError("config: gradcheck.step must lie in (0, 1e-2]");
  }
  if (gradcheck.probes < 1) throw ValidationError("config: gradcheck.probes must be at least 1");
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const std::string& key : config_keys()) out += key + " = " + get(key) + "\n";
  return out;
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  const std::vector<std::uint8_t> bytes = io::read_file(path);
  try {
    return parse_config(std::string(bytes.begin(), bytes.end()), std::move(base));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace densepoly::cli
