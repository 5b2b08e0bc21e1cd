#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "densepoly/losses.hpp"
#include "densepoly/polygonize.hpp"
#include "densepoly/synth.hpp"

namespace densepoly::cli {

struct LossSettings {
  losses::LossParams params;
  double weight_w0 = 10.0;
  double weight_sigma = 5.0;
};

struct GradCheckSettings {
  double step = 1e-4;
  int probes = 64;
  std::uint64_t seed = 0;
};

/// Every tunable default of the pipeline, addressable by dotted key such as
/// "acm.lambda_ff" or "polygonize.min_prob".
struct PipelineConfig {
  synth::SceneConfig synth;
  poly::PolygonizeConfig polygonize;
  LossSettings losses;
  GradCheckSettings gradcheck;

  /// Parses `value` for `key`. Unknown keys and malformed numbers throw
  /// ValidationError; ranges are checked later by validate().
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Throws ValidationError naming the offending section.
  void validate() const;

  /// One "key = value" line per key, sorted; parses back to an equal config.
  std::string to_text() const;
};

/// All recognised keys in sorted order.
const std::vector<std::string>& config_keys();

/// key=value lines; '#' starts a comment, blank lines are ignored. Later
/// lines win. The result is validated. Errors name the line.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace densepoly::cli
