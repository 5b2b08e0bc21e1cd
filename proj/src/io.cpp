#include "densepoly/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

namespace densepoly::io {

namespace {

constexpr char kProbMagic[4] = {'P', 'M', 'A', 'P'};
constexpr char kFieldMagic[4] = {'F', 'F', 'L', 'D'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(k)]) << (8 * k);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  if (!std::isfinite(v)) throw DomainError("write_raster: raster holds a non-finite value");
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::vector<std::uint8_t> header(const char (&magic)[4], int height, int width, std::size_t planes) {
  std::vector<std::uint8_t> out(magic, magic + 4);
  put_u32(out, kRasterVersion);
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u32(out, static_cast<std::uint32_t>(width));
  out.reserve(kRasterHeaderBytes + 4 * planes * static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_raster(const ProbRaster& r) {
  std::vector<std::uint8_t> out = header(kProbMagic, r.height(), r.width(), 1);
  for (double v : r.values()) put_f32(out, v);
  return out;
}

std::vector<std::uint8_t> encode_raster(const ff::FrameField& f) {
  std::vector<std::uint8_t> out = header(kFieldMagic, f.height(), f.width(), 4);
  for (const Complex& v : f.k0.values()) put_f32(out, v.real());
  for (const Complex& v : f.k0.values()) put_f32(out, v.imag());
  for (const Complex& v : f.k1.values()) put_f32(out, v.real());
  for (const Complex& v : f.k1.values()) put_f32(out, v.imag());
  return out;
}

AnyRaster decode_raster(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FormatError("raster: file shorter than its magic", bytes.size());
  std::size_t planes = 0;
  if (std::memcmp(bytes.data(), kProbMagic, 4) == 0) {
    planes = 1;
  } else if (std::memcmp(bytes.data(), kFieldMagic, 4) == 0) {
    planes = 4;
  } else {
    throw FormatError("raster: unknown magic", 0);
  }
  if (bytes.size() < kRasterHeaderBytes) throw FormatError("raster: truncated header", bytes.size());
  if (get_u32(bytes, 4) != kRasterVersion) throw FormatError("raster: unsupported version", 4);
  const std::uint32_t h = get_u32(bytes, 8);
  const std::uint32_t w = get_u32(bytes, 12);
  if (h > 0x7fffffffU) throw FormatError("raster: height out of range", 8);
  if (w > 0x7fffffffU) throw FormatError("raster: width out of range", 12);
  const std::uint64_t cells = static_cast<std::uint64_t>(h) * w;
  const std::uint64_t expected = kRasterHeaderBytes + 4ULL * planes * cells;
  if (bytes.size() < expected) throw FormatError("raster: truncated payload", bytes.size());
  if (bytes.size() > expected) throw FormatError("raster: trailing bytes after payload", expected);

  auto plane_value = [&](std::size_t plane, std::size_t i) {
    const std::size_t at = kRasterHeaderBytes + 4 * (plane * cells + i);
    const float v = std::bit_cast<float>(get_u32(bytes, at));
    if (!std::isfinite(v)) throw FormatError("raster: non-finite value", at);
    return static_cast<double>(v);
  };
  const int height = static_cast<int>(h), width = static_cast<int>(w);
  if (planes == 1) {
    ProbRaster r(height, width);
    auto vals = r.values();
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = plane_value(0, i);
    return r;
  }
  ff::FrameField f(height, width);
  auto k0 = f.k0.values();
  auto k1 = f.k1.values();
  for (std::size_t i = 0; i < k0.size(); ++i) {
    k0[i] = {plane_value(0, i), plane_value(1, i)};
    k1[i] = {plane_value(2, i), plane_value(3, i)};
  }
  return f;
}

void write_raster(const fs::path& path, const ProbRaster& r) { write_file_atomic(path, encode_raster(r)); }

void write_raster(const fs::path& path, const ff::FrameField& f) { write_file_atomic(path, encode_raster(f)); }

AnyRaster read_raster(const fs::path& path) {
  try {
    return decode_raster(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

ProbRaster read_prob_raster(const fs::path& path) {
  AnyRaster any = read_raster(path);
  if (auto* r = std::get_if<ProbRaster>(&any)) return std::move(*r);
  throw FormatError(path.string() + ": expected a PMAP probability raster, found a frame field", 0);
}

ff::FrameField read_frame_field(const fs::path& path) {
  AnyRaster any = read_raster(path);
  if (auto* f = std::get_if<ff::FrameField>(&any)) return std::move(*f);
  throw FormatError(path.string() + ": expected an FFLD frame field, found a probability raster", 0);
}

// ---------------------------------------------------------------------------

std::string geojson_text(const std::vector<Feature>& features) {
  using Json = nlohmann::ordered_json;
  Json fc = {{"type", "FeatureCollection"}, {"features", Json::array()}};
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Feature& f = features[i];
    if (!is_valid_simple_ring(f.ring)) {
      throw DomainError("write_geojson: feature " + std::to_string(i) + " is not a simple polygon");
    }
    Json ring = Json::array();
    const Ring ccw = oriented_ccw(f.ring);
    for (const Point& p : ccw) ring.push_back({p.x, p.y});
    ring.push_back({ccw.front().x, ccw.front().y});
    Json props = Json::object();
    if (f.score) {
      if (!std::isfinite(*f.score)) throw DomainError("write_geojson: non-finite score");
      props["score"] = *f.score;
    }
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", props},
                              {"geometry", {{"type", "Polygon"}, {"coordinates", Json::array({ring})}}}});
  }
  return fc.dump() + "\n";
}

void write_geojson(const fs::path& path, const std::vector<Feature>& features) {
  write_file_atomic(path, geojson_text(features));
}

std::vector<Feature> parse_geojson(const std::string& text) {
  using Json = nlohmann::json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("geojson: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw ValidationError("geojson: expected a FeatureCollection with a features array");
  }
  std::vector<Feature> out;
  const Json& feats = doc["features"];
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const std::string where = "geojson: feature " + std::to_string(i) + ": ";
    const Json& f = feats[i];
    if (!f.is_object() || f.value("type", "") != "Feature") throw ValidationError(where + "not a Feature");
    if (!f.contains("geometry") || !f["geometry"].is_object()) throw ValidationError(where + "missing geometry");
    const Json& g = f["geometry"];
    const std::string gtype = g.value("type", "");
    if (gtype != "Polygon") throw ValidationError(where + "geometry type " + gtype + " is not Polygon");
    if (!g.contains("coordinates") || !g["coordinates"].is_array() || g["coordinates"].empty()) {
      throw ValidationError(where + "missing coordinates");
    }
    if (g["coordinates"].size() > 1) throw ValidationError(where + "polygon holes are not supported");
    const Json& coords = g["coordinates"][0];
    if (!coords.is_array()) throw ValidationError(where + "ring is not an array");
    Ring ring;
    for (const Json& pos : coords) {
      if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() || !pos[1].is_number()) {
        throw ValidationError(where + "positions must be [x, y] number pairs");
      }
      const Point p{pos[0].get<double>(), pos[1].get<double>()};
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError(where + "non-finite coordinate");
      ring.push_back(p);
    }
    if (ring.size() >= 2 && ring.front().x == ring.back().x && ring.front().y == ring.back().y) ring.pop_back();
    if (!is_valid_simple_ring(ring)) throw ValidationError(where + "ring is degenerate or self-intersecting");

    Feature feature{oriented_ccw(std::move(ring)), std::nullopt};
    if (f.contains("properties") && f["properties"].is_object() && f["properties"].contains("score")) {
      const Json& s = f["properties"]["score"];
      if (!s.is_number()) throw ValidationError(where + "score is not a number");
      feature.score = s.get<double>();
    }
    out.push_back(std::move(feature));
  }
  return out;
}

std::vector<Feature> read_geojson(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return parse_geojson(std::string(bytes.begin(), bytes.end()));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return bytes;
}

}  // namespace densepoly::io
