#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include <doctest.h>

#include "wfn/data.hpp"
#include "wfn/errors.hpp"

using namespace wfn;

TEST_CASE("two moons has the advertised shape and balance") {
  const Dataset data = make_two_moons(200, 0.1, 3);
  CHECK(data.features == 2);
  CHECK(data.classes == 2);
  CHECK(data.size() == 200);
  CHECK(data.x.size() == 400);
  CHECK(std::count(data.y.begin(), data.y.end(), 0) == 100);
  CHECK(std::count(data.y.begin(), data.y.end(), 1) == 100);
}

TEST_CASE("two moons is deterministic per seed") {
  const Dataset a = make_two_moons(100, 0.2, 5);
  const Dataset b = make_two_moons(100, 0.2, 5);
  const Dataset c = make_two_moons(100, 0.2, 6);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x != c.x);
}

TEST_CASE("noiseless moons lie on the two reference arcs") {
  const Dataset data = make_two_moons(100, 0.0, 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.row(i)[0];
    const double y = data.row(i)[1];
    if (data.y[i] == 0) {
      CHECK(x * x + y * y == doctest::Approx(1.0).epsilon(1e-9));
    } else {
      const double dx = x - 1.0;
      const double dy = y - 0.5;
      CHECK(dx * dx + dy * dy == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("blobs carry the requested class count") {
  const Dataset data = make_blobs(150, 3, 0.2, 11);
  CHECK(data.classes == 3);
  CHECK(data.size() == 150);
  for (int label : data.y) {
    CHECK(label >= 0);
    CHECK(label < 3);
  }
}

TEST_CASE("csv loading parses features and labels") {
  const std::string path = "load_csv_ok.csv";
  {
    std::ofstream out(path);
    out << "0.5,1.5,0\n-0.25,0.75,1\n0.0,0.0,1\n";
  }
  const Dataset data = load_csv(path);
  CHECK(data.features == 2);
  CHECK(data.classes == 2);
  REQUIRE(data.size() == 3);
  CHECK(data.row(1)[0] == -0.25);
  CHECK(data.y[2] == 1);
  std::remove(path.c_str());
}

TEST_CASE("csv errors name the offending line") {
  const std::string path = "load_csv_bad.csv";
  {
    std::ofstream out(path);
    out << "0.5,1.5,0\nnot-a-number,0.75,1\n";
  }
  try {
    load_csv(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("missing csv files raise a data error") {
  CHECK_THROWS_AS(load_csv("no_such_file_here.csv"), DataError);
}
