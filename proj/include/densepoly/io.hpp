#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "densepoly/frame_field.hpp"
#include "densepoly/geometry.hpp"
#include "densepoly/raster.hpp"

namespace densepoly::io {

namespace fs = std::filesystem;

// Binary raster files: 4-byte magic ("PMAP" for one probability plane, "FFLD"
// for Re k0, Im k0, Re k1, Im k1), then little-endian u32 version, height and
// width, then row-major little-endian float32 planes.

inline constexpr std::uint32_t kRasterVersion = 1;
inline constexpr std::size_t kRasterHeaderBytes = 16;

using AnyRaster = std::variant<ProbRaster, ff::FrameField>;

/// Values are narrowed to float32. Throws DomainError on non-finite input.
std::vector<std::uint8_t> encode_raster(const ProbRaster& r);
std::vector<std::uint8_t> encode_raster(const ff::FrameField& f);

/// Throws FormatError with the offending byte offset.
AnyRaster decode_raster(const std::vector<std::uint8_t>& bytes);

void write_raster(const fs::path& path, const ProbRaster& r);
void write_raster(const fs::path& path, const ff::FrameField& f);
AnyRaster read_raster(const fs::path& path);

/// read_raster narrowed to one kind; a file of the other kind is a FormatError at offset 0.
ProbRaster read_prob_raster(const fs::path& path);
ff::FrameField read_frame_field(const fs::path& path);

struct Feature {
  Ring ring;
  std::optional<double> score;
};

/// Exterior rings are written counter-clockwise and closed; scores go to
/// properties.score. Coordinates keep full double precision.
std::string geojson_text(const std::vector<Feature>& features);
void write_geojson(const fs::path& path, const std::vector<Feature>& features);

/// Accepts a FeatureCollection of Polygon features without holes. Throws
/// ValidationError naming the feature index on anything else, including
/// self-intersecting or degenerate rings.
std::vector<Feature> parse_geojson(const std::string& text);
std::vector<Feature> read_geojson(const fs::path& path);

/// Writes to a temporary sibling and renames it into place. Throws IoError.
void write_file_atomic(const fs::path& path, const std::string& bytes);
void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const fs::path& path);

}  // namespace densepoly::io
