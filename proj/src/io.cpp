#include "chemdim/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace chemdim::io {

static_assert(std::endian::native == std::endian::little, "HSDC codec assumes a little-endian host");

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("cannot format value");
  return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw IoError("csv line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
  if (!std::isfinite(v)) throw IoError("csv line " + std::to_string(line) + ": non-finite value");
  return v;
}

std::vector<double> parse_fields(std::string_view text, std::size_t line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_double(text.substr(start, comma - start), line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string encode_csv(const DataMatrix& data, bool axis_header) {
  std::string out;
  if (axis_header) {
    out += '#';
    for (Index c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += format_double(data.axis()[c]);
    }
    out += '\n';
  }
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += format_double(data.values()(r, c));
    }
    out += '\n';
  }
  return out;
}

DataMatrix decode_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<double> axis;
  bool have_axis = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (have_axis || !rows.empty()) throw IoError("csv line " + std::to_string(line_no) + ": unexpected axis header");
      axis = parse_fields(line.substr(1), line_no);
      have_axis = true;
      continue;
    }
    rows.push_back(parse_fields(line, line_no));
    if (rows.back().size() != rows.front().size())
      throw IoError("csv line " + std::to_string(line_no) + ": ragged row");
  }
  if (rows.empty()) throw IoError("csv: no data rows");
  const auto p = static_cast<Index>(rows.front().size());
  if (p < 2) throw IoError("csv: need at least 2 channels");
  Matrix m(static_cast<Index>(rows.size()), p);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < p; ++c) m(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
  try {
    if (have_axis) {
      if (static_cast<Index>(axis.size()) != p) throw IoError("csv: axis header length does not match columns");
      return DataMatrix(std::move(m), SpectralAxis(std::move(axis)));
    }
    return DataMatrix(std::move(m));
  } catch (const ValidationError& e) {
    throw IoError(std::string("csv: ") + e.what());
  }
}

void write_csv(const fs::path& path, const DataMatrix& data, bool axis_header) {
  write_file_atomic(path, encode_csv(data, axis_header));
}

DataMatrix read_csv(const fs::path& path) { return decode_csv(read_file(path)); }

namespace {
void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}
std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}
}  // namespace

std::string encode_hsdc(const HyperCube& cube) {
  std::string out;
  out.reserve(kHsdcHeaderBytes + cube.raw().size() * sizeof(double));
  out += "HSDC";
  put_u32(out, static_cast<std::uint32_t>(cube.nx()));
  put_u32(out, static_cast<std::uint32_t>(cube.ny()));
  put_u32(out, static_cast<std::uint32_t>(cube.nv()));
  out.append(reinterpret_cast<const char*>(cube.raw().data()), cube.raw().size() * sizeof(double));
  return out;
}

HyperCube decode_hsdc(std::string_view bytes) {
  if (bytes.size() < kHsdcHeaderBytes || bytes.substr(0, 4) != "HSDC") throw IoError("hsdc: bad magic or truncated header");
  const std::uint64_t nx = get_u32(bytes, 4), ny = get_u32(bytes, 8), nv = get_u32(bytes, 12);
  if (nx == 0 || ny == 0 || nv < 2) throw IoError("hsdc: invalid dimensions");
  const std::uint64_t count = nx * ny * nv;
  if (bytes.size() != kHsdcHeaderBytes + count * sizeof(double))
    throw IoError("hsdc: payload is " + std::to_string(bytes.size() - kHsdcHeaderBytes) + " bytes, expected " +
                  std::to_string(count * sizeof(double)));
  std::vector<double> values(count);
  std::memcpy(values.data(), bytes.data() + kHsdcHeaderBytes, count * sizeof(double));
  try {
    return HyperCube(static_cast<Index>(nx), static_cast<Index>(ny), static_cast<Index>(nv), std::move(values));
  } catch (const ValidationError& e) {
    throw IoError(std::string("hsdc: ") + e.what());
  }
}

void write_hsdc(const fs::path& path, const HyperCube& cube) { write_file_atomic(path, encode_hsdc(cube)); }

HyperCube read_hsdc(const fs::path& path) { return decode_hsdc(read_file(path)); }

std::string encode_pgm(const ImageGrid& grid, PgmScaling& scaling) {
  if (grid.size() == 0) throw ValidationError("pgm: empty image");
  if (!grid.allFinite()) throw ValidationError("pgm: non-finite pixel");
  scaling = {grid.minCoeff(), grid.maxCoeff()};
  const double span = scaling.max - scaling.min;
  std::ostringstream out;
  out << "P2\n" << grid.cols() << ' ' << grid.rows() << "\n65535\n";
  for (Index x = 0; x < grid.rows(); ++x) {
    for (Index y = 0; y < grid.cols(); ++y) {
      long level = 0;
      if (span > 0.0) level = std::lround((grid(x, y) - scaling.min) / span * 65535.0);
      out << (y ? " " : "") << level;
    }
    out << '\n';
  }
  return out.str();
}

ImageGrid decode_pgm_levels(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string magic;
  long width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (!in || magic != "P2" || width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError("pgm: malformed header");
  ImageGrid grid(height, width);
  for (long x = 0; x < height; ++x)
    for (long y = 0; y < width; ++y) {
      long level;
      if (!(in >> level) || level < 0 || level > maxval) throw IoError("pgm: bad pixel data");
      grid(x, y) = static_cast<double>(level);
    }
  return grid;
}

fs::path pgm_sidecar(const fs::path& pgm_path) {
  fs::path p = pgm_path;
  p += ".json";
  return p;
}

PgmScaling write_pgm(const fs::path& path, const ImageGrid& grid) {
  PgmScaling scaling;
  const std::string text = encode_pgm(grid, scaling);
  write_file_atomic(path, text);
  write_json(pgm_sidecar(path),
             json{{"format", "P2"}, {"maxval", 65535}, {"min", scaling.min}, {"max", scaling.max},
                  {"mapping", "value = min + level / maxval * (max - min)"}});
  return scaling;
}

ImageGrid read_pgm(const fs::path& path) {
  ImageGrid levels = decode_pgm_levels(read_file(path));
  const json side = read_json(pgm_sidecar(path));
  const double lo = side.at("min").get<double>(), hi = side.at("max").get<double>();
  const double maxval = side.value("maxval", 65535.0);
  return (levels.array() / maxval * (hi - lo) + lo).matrix();
}

void write_json(const fs::path& path, const json& value) { write_file_atomic(path, value.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("json " + path.string() + ": " + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + partial.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + partial.string());
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw IoError("cannot move " + partial.string() + " into place: " + ec.message());
}

std::string fingerprint(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chemdim::io
