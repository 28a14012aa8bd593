#include "hbi/error.hpp"
#include "hbi/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace hbi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hbi_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(gen) * std::pow(10.0, static_cast<int>(gen() % 600) - 300);
    CHECK(io::parse_double(io::format_double(x), "test") == x);
  }
  for (double x : {0.0, -0.0, 1.0, 0.1, 1e-310, std::numeric_limits<double>::max(),
                   std::numeric_limits<double>::infinity()}) {
    CHECK(io::parse_double(io::format_double(x), "test") == x);
  }
  CHECK(std::isnan(io::parse_double(io::format_double(std::nan("")), "test")));
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(io::parse_double("1.5x", "ctx"), IoError);
  CHECK_THROWS_AS(io::parse_double("", "ctx"), IoError);
}

TEST_CASE("tables round-trip losslessly") {
  const fs::path dir = scratch("table");
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  Matrix m(7, 3);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) m(i, j) = nd(gen) * 1e3;
  io::write_table(dir / "t.csv", {"a", "b", "c"}, m);
  const io::Table t = io::read_table(dir / "t.csv");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.values == m);
  CHECK(t.column("b") == m.col(1));
  CHECK_THROWS_AS(t.column("zz"), IoError);

  io::write_table(dir / "u.csv", t.header, t.values);
  std::ifstream f1(dir / "t.csv"), f2(dir / "u.csv");
  CHECK(std::string(std::istreambuf_iterator<char>(f1), {}) == std::string(std::istreambuf_iterator<char>(f2), {}));

  io::write_table(dir / "empty.csv", {"x"}, Matrix(0, 1));
  CHECK(io::read_table(dir / "empty.csv").values.rows() == 0);
  CHECK_THROWS_AS(io::write_table(dir / "bad.csv", {"x"}, m), DimensionError);
  fs::remove_all(dir);
}

TEST_CASE("malformed tables report the location") {
  const fs::path dir = scratch("bad");
  io::write_text(dir / "ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(io::read_table(dir / "ragged.csv"), doctest::Contains("row 2"), IoError);
  io::write_text(dir / "word.csv", "a\nhello\n");
  CHECK_THROWS_WITH_AS(io::read_table(dir / "word.csv"), doctest::Contains("column a"), IoError);
  CHECK_THROWS_WITH_AS(io::read_table(dir / "missing.csv"), doctest::Contains("missing.csv"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("json files") {
  const fs::path dir = scratch("json");
  const nlohmann::json doc = {{"x", 0.1}, {"list", {1, 2, 3}}, {"name", "run"}};
  io::write_json(dir / "d.json", doc);
  CHECK(io::read_json(dir / "d.json") == doc);
  io::write_text(dir / "broken.json", "{\"x\": ");
  CHECK_THROWS_AS(io::read_json(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(io::read_json(dir / "nope.json"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("directories") {
  const fs::path dir = scratch("dirs");
  CHECK_NOTHROW(io::ensure_directory(dir / "a" / "b"));
  CHECK(fs::is_directory(dir / "a" / "b"));
  io::write_text(dir / "file", "x");
  CHECK_THROWS_AS(io::ensure_directory(dir / "file"), IoError);
  CHECK_THROWS_AS(io::write_text(dir / "missing" / "f.txt", "x"), IoError);
  CHECK(io::indexed_names("v", 3) == std::vector<std::string>{"v_1", "v_2", "v_3"});
  fs::remove_all(dir);
}
