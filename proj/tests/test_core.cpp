#include "chemdim/core.hpp"
#include "chemdim/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>

using namespace chemdim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("chemdim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

HyperCube random_cube(Rng& rng, Index nx, Index ny, Index nv) {
  std::vector<double> v(static_cast<size_t>(nx * ny * nv));
  for (auto& x : v) x = rng.normal() * 1e3;
  return HyperCube(nx, ny, nv, std::move(v));
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("spectral axis validation") {
  CHECK_NOTHROW(SpectralAxis({1.0, 2.0}));
  CHECK_THROWS_AS(SpectralAxis({1.0}), ValidationError);
  CHECK_THROWS_AS(SpectralAxis({1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SpectralAxis({2.0, 1.0}), ValidationError);
  const auto lin = SpectralAxis::linspace(900, 1900, 1001);
  CHECK(lin[0] == 900.0);
  CHECK(lin[1000] == 1900.0);
  CHECK(lin[500] == doctest::Approx(1400.0));
  CHECK(SpectralAxis::indices(3).values() == std::vector<double>{0, 1, 2});
}

TEST_CASE("data matrix rejects non-finite values and mismatched axes") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  CHECK_NOTHROW(DataMatrix(m));
  CHECK_THROWS_AS(DataMatrix(m, SpectralAxis::indices(4)), ValidationError);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DataMatrix{m}, ValidationError);
}

TEST_CASE("normalized rows have unit length and zero rows stay zero") {
  Matrix m(3, 3);
  m << 3, 4, 0, 0, 0, 0, 1, 1, 1;
  const DataMatrix n = DataMatrix(m).normalized_rows();
  CHECK(n.values().row(0).norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.values().row(1).norm() == 0.0);
  CHECK(n.values()(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("unfold of a single pixel") {
  const HyperCube cube(1, 1, 3, {1.5, 2.5, 3.5});
  const auto [data, map] = unfold(cube);
  CHECK(data.rows() == 1);
  CHECK(data.cols() == 3);
  CHECK(data.values()(0, 2) == 3.5);
  REQUIRE(map.origins.size() == 1);
  CHECK(map.origins[0] == PixelOrigin{0, 0});
}

TEST_CASE("unfold order is row-major over x then y") {
  std::vector<double> v;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y)
      for (int c = 0; c < 2; ++c) v.push_back(100 * x + 10 * y + c);
  const auto [data, map] = unfold(HyperCube(2, 3, 2, v));
  for (Index r = 0; r < 6; ++r) {
    const Index x = r / 3, y = r % 3;
    CHECK(map.origins[static_cast<size_t>(r)] == PixelOrigin{x, y});
    CHECK(data.values()(r, 1) == 100.0 * x + 10.0 * y + 1.0);
  }
}

TEST_CASE("refold of a 4-pixel abundance column matches the hand layout") {
  const auto [data, map] = unfold(HyperCube(2, 2, 2, std::vector<double>(8, 0.0)));
  Vector w(4);
  w << 0.1, 0.2, 0.3, 0.4;
  const ImageGrid img = refold(map, w);
  // rows: (0,0), (0,1), (1,0), (1,1)
  CHECK(img(0, 0) == 0.1);
  CHECK(img(0, 1) == 0.2);
  CHECK(img(1, 0) == 0.3);
  CHECK(img(1, 1) == 0.4);
  CHECK_THROWS_AS(refold(map, Vector::Zero(3)), ValidationError);
}

TEST_CASE("refold of a constant vector is a constant image") {
  const auto [data, map] = unfold(HyperCube(3, 4, 2, std::vector<double>(24, 1.0)));
  const ImageGrid img = refold(map, Vector::Constant(12, 2.5));
  CHECK((img.array() == 2.5).all());
}

TEST_CASE("fold inverts unfold on random shapes") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index nx = rng.uniform_int(1, 6), ny = rng.uniform_int(1, 6), nv = rng.uniform_int(2, 5);
    const HyperCube cube = random_cube(rng, nx, ny, nv);
    const auto [data, map] = unfold(cube);
    CHECK(fold(data, map) == cube);
    // refold of every channel reproduces the cube slices.
    for (Index c = 0; c < nv; ++c) {
      const ImageGrid img = refold(map, data.values().col(c));
      for (Index x = 0; x < nx; ++x)
        for (Index y = 0; y < ny; ++y) CHECK(img(x, y) == cube.at(x, y, c));
    }
  }
}

TEST_CASE("rng is reproducible and its draws stay in range") {
  Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double v = r.uniform_open0();
    CHECK((v > 0.0 && v <= 1.0));
    const auto k = r.uniform_int(-3, 4);
    CHECK((k >= -3 && k <= 4));
  }
  CHECK(mix_seed(1, 1) != mix_seed(1, 2));
  CHECK(mix_seed(1, 1) != mix_seed(2, 1));
}

TEST_CASE("normal draws have unit variance") {
  Rng r(99);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.01);
}

TEST_CASE("csv round trip is bit-identical") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(3, 4);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * std::pow(10.0, rng.uniform_int(-300, 300));
    const DataMatrix d(m, SpectralAxis({0.1, 0.2, 1e-9 + 0.3, 7.0}));
    const DataMatrix back = io::decode_csv(io::encode_csv(d));
    CHECK(bit_equal(back.values(), m));
    CHECK(back.axis() == d.axis());
    const DataMatrix plain = io::decode_csv(io::encode_csv(d, false));
    CHECK(bit_equal(plain.values(), m));
    CHECK(plain.axis() == SpectralAxis::indices(4));
  }
  Matrix special(1, 3);
  special << -0.0, 5e-324, 1.7976931348623157e308;
  CHECK(bit_equal(io::decode_csv(io::encode_csv(DataMatrix(special))).values(), special));
}

TEST_CASE("csv parse errors") {
  CHECK_THROWS_AS(io::decode_csv(""), IoError);
  CHECK_THROWS_AS(io::decode_csv("1,2\n3\n"), IoError);
  CHECK_THROWS_AS(io::decode_csv("1,abc\n"), IoError);
  CHECK_THROWS_AS(io::decode_csv("1,nan\n"), IoError);
  CHECK_THROWS_AS(io::decode_csv("1,inf\n"), IoError);
  CHECK_THROWS_AS(io::decode_csv("# 1,2,3\n1,2\n"), IoError);
  const fs::path dir = scratch_dir("csv");
  io::write_file_atomic(dir / "empty.csv", "");
  CHECK_THROWS_AS(io::read_csv(dir / "empty.csv"), IoError);
  CHECK_THROWS_AS(io::read_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("hsdc byte layout of a 2x2x2 cube") {
  const HyperCube cube(2, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8});
  const std::string bytes = io::encode_hsdc(cube);
  // 2*2*2 float64 values after the 16-byte header.
  CHECK(bytes.size() == 16 + 2 * 2 * 2 * 8);
  CHECK(bytes.substr(0, 4) == "HSDC");
  const unsigned char nx0 = static_cast<unsigned char>(bytes[4]);
  CHECK(nx0 == 2);
  CHECK(bytes[5] == 0);
  double third = 0.0;
  std::memcpy(&third, bytes.data() + 16 + 2 * 8, 8);
  CHECK(third == 3.0);
  CHECK(io::decode_hsdc(bytes) == cube);
}

TEST_CASE("hsdc rejects malformed input") {
  CHECK_THROWS_AS(io::decode_hsdc(""), IoError);
  CHECK_THROWS_AS(io::decode_hsdc("HSDX" + std::string(12, '\0')), IoError);
  std::string truncated = io::encode_hsdc(HyperCube(1, 2, 2, {1, 2, 3, 4}));
  truncated.pop_back();
  CHECK_THROWS_AS(io::decode_hsdc(truncated), IoError);
  std::string bad = io::encode_hsdc(HyperCube(1, 2, 2, {1, 2, 3, 4}));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(bad.data() + 16, &nan, 8);
  CHECK_THROWS(io::decode_hsdc(bad));
}

TEST_CASE("hsdc file round trip on random cubes") {
  const fs::path dir = scratch_dir("hsdc");
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const HyperCube cube = random_cube(rng, rng.uniform_int(1, 5), rng.uniform_int(1, 5), rng.uniform_int(2, 6));
    io::write_hsdc(dir / "c.hsdc", cube);
    CHECK(io::read_hsdc(dir / "c.hsdc") == cube);
    CHECK_FALSE(fs::exists(dir / "c.hsdc.partial"));
  }
}

TEST_CASE("pgm stores min-max scaled levels with a sidecar") {
  const fs::path dir = scratch_dir("pgm");
  ImageGrid img(2, 3);
  img << 0.0, 0.5, 1.0, 2.0, -1.0, 3.0;
  const io::PgmScaling s = io::write_pgm(dir / "a.pgm", img);
  CHECK(s.min == -1.0);
  CHECK(s.max == 3.0);
  const std::string text = io::read_file(dir / "a.pgm");
  CHECK(text.rfind("P2\n3 2\n65535\n", 0) == 0);
  const ImageGrid levels = io::decode_pgm_levels(text);
  CHECK(levels(1, 1) == 0.0);
  CHECK(levels(1, 2) == 65535.0);
  CHECK(levels(0, 0) == std::lround(1.0 / 4.0 * 65535.0));
  const ImageGrid back = io::read_pgm(dir / "a.pgm");
  CHECK((back - img).cwiseAbs().maxCoeff() <= 4.0 / 65535.0);
  const auto side = io::read_json(io::pgm_sidecar(dir / "a.pgm"));
  CHECK(side.at("maxval") == 65535);

  const ImageGrid flat = ImageGrid::Constant(2, 2, 7.0);
  io::write_pgm(dir / "flat.pgm", flat);
  CHECK((io::read_pgm(dir / "flat.pgm").array() == 7.0).all());
  CHECK_THROWS_AS(io::decode_pgm_levels("P5\n1 1\n255\n0\n"), IoError);
}

TEST_CASE("atomic writes leave no partial file and fingerprints separate contents") {
  const fs::path dir = scratch_dir("atomic");
  io::write_file_atomic(dir / "x.txt", "hello");
  CHECK(io::read_file(dir / "x.txt") == "hello");
  CHECK_FALSE(fs::exists(dir / "x.txt.partial"));
  CHECK_THROWS_AS(io::write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), IoError);
  CHECK(io::fingerprint("a") != io::fingerprint("b"));
  CHECK(io::fingerprint("") == "cbf29ce484222325");
}
