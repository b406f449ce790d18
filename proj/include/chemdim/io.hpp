#pragma once

#include "chemdim/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace chemdim::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

// CSV matrices: one sample per line, comma separated, '.' decimal point.
// An optional first line starting with '#' lists the spectral axis. Values
// are written in shortest round-trip form, so every finite double survives
// a write/read cycle bit for bit.
std::string format_double(double v);
std::string encode_csv(const DataMatrix& data, bool axis_header = true);
DataMatrix decode_csv(std::string_view text);
void write_csv(const fs::path& path, const DataMatrix& data, bool axis_header = true);
DataMatrix read_csv(const fs::path& path);

// HSDC binary cube: "HSDC", u32 nx, u32 ny, u32 nv (little-endian), then
// nx*ny*nv float64 little-endian values, channel fastest, then y, then x.
// The format carries no axis; decoded cubes use channel indices.
inline constexpr std::size_t kHsdcHeaderBytes = 16;
std::string encode_hsdc(const HyperCube& cube);
HyperCube decode_hsdc(std::string_view bytes);
void write_hsdc(const fs::path& path, const HyperCube& cube);
HyperCube read_hsdc(const fs::path& path);

/// Linear map between stored 16-bit levels and the original values:
/// value = min + level / 65535 * (max - min).
struct PgmScaling {
  double min = 0.0;
  double max = 0.0;
};

// PGM P2 with maxval 65535. The image is written x down the rows and y
// across the columns, min-max scaled; the scaling goes to "<path>.json".
std::string encode_pgm(const ImageGrid& grid, PgmScaling& scaling);
ImageGrid decode_pgm_levels(std::string_view text);
PgmScaling write_pgm(const fs::path& path, const ImageGrid& grid);
/// Reads levels and rescales them using the sidecar.
ImageGrid read_pgm(const fs::path& path);
fs::path pgm_sidecar(const fs::path& pgm_path);

void write_json(const fs::path& path, const json& value);
json read_json(const fs::path& path);

std::string read_file(const fs::path& path);
/// Writes to "<path>.partial" then renames into place.
void write_file_atomic(const fs::path& path, std::string_view contents);

/// FNV-1a 64-bit digest, hex encoded. Used for input fingerprints in
/// run manifests.
std::string fingerprint(std::string_view bytes);

}  // namespace chemdim::io
