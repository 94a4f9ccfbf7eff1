#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "regraft/data/dataset.hpp"
#include "regraft/data/synthetic.hpp"
#include "regraft/error.hpp"
#include "regraft/ndcore/rng.hpp"

using namespace regraft;
using nd::Tensor2;
namespace fs = std::filesystem;

namespace {

data::Dataset make(Tensor2 x, Tensor2 y) {
  data::Dataset ds;
  ds.features = std::move(x);
  ds.targets = std::move(y);
  for (std::size_t c = 0; c < ds.features.cols(); ++c) ds.feature_names.push_back("f" + std::to_string(c));
  return ds;
}

data::Dataset iota_dataset(std::size_t n) {
  Tensor2 x(n, 1), y(n, 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] = static_cast<double>(i);
  return make(x, y);
}

std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
}

}  // namespace

TEST_CASE("load_csv examples") {
  const auto ds = data::parse_csv("a,b,y\n1,2,3\n4,5,6\n7,8,9\n", std::string("y"));
  CHECK(ds.features.rows() == 3);
  CHECK(ds.features.cols() == 2);
  CHECK(ds.targets.rows() == 3);
  CHECK(ds.targets.cols() == 1);
  CHECK(ds.features(2, 1) == 8.0);
  CHECK(ds.targets[1] == 6.0);
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});

  try {
    data::parse_csv("a,b,y\n1,2,3\n", std::string("z"));
    FAIL("expected error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("b, y") != std::string::npos);
  }

  try {
    data::parse_csv("a,b,y\n1,2,3\nabc,5,6\n", std::string("y"));
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
}

TEST_CASE("load_csv target by index keeps other columns in order") {
  const auto ds = data::parse_csv("y,a,b\n1,2,3\n", std::size_t{0});
  CHECK(ds.features == Tensor2::from_rows({{2, 3}}));
  CHECK(ds.targets[0] == 1.0);
  CHECK_THROWS_AS(data::parse_csv("y,a\n1,2\n", std::size_t{5}), InvalidArgument);
}

TEST_CASE("load_csv rejects ragged rows and missing files") {
  CHECK_THROWS_AS(data::parse_csv("a,y\n1,2\n3\n", std::string("y")), ParseError);
  CHECK_THROWS_AS(data::parse_csv("", std::string("y")), ParseError);
  CHECK_THROWS(data::load_csv("/nonexistent/file.csv", std::string("y")));
}

TEST_CASE("csv round trip is exact") {
  nd::Rng rng(1);
  Tensor2 x(50, 4), y(50, 1);
  for (double& v : x.values()) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
  for (double& v : y.values()) v = rng.normal() / 3.0;
  const auto ds = make(x, y);
  const fs::path dir = fs::temp_directory_path() / "regraft-unit-data";
  fs::create_directories(dir);
  data::save_csv(ds, dir / "a.csv");
  const auto back = data::load_csv(dir / "a.csv", std::string(ds.target_name));
  CHECK(back.features == ds.features);
  CHECK(back.targets == ds.targets);
  data::save_csv(back, dir / "b.csv");
  const auto again = data::load_csv(dir / "b.csv", std::string(ds.target_name));
  CHECK(again.features == ds.features);
}

TEST_CASE("standardize examples") {
  const auto ds = make(Tensor2::column({1, 2, 3}), Tensor2::column({5, 7, 9}));
  const auto st = data::standardize(ds);
  REQUIRE(st.scaler);
  CHECK(st.scaler->feature_mean[0] == 2.0);
  CHECK(st.scaler->feature_std[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(st.features[0] == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(st.features[1] == 0.0);
  CHECK(st.features[2] == doctest::Approx(1.224745).epsilon(1e-6));
  CHECK(st.targets[2] == doctest::Approx(1.224745).epsilon(1e-6));
  CHECK(st.scaler->convention == "population");

  const auto twice = data::standardize(st);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(twice.features[i] - st.features[i]) <= 1e-12);
  CHECK(std::abs(twice.scaler->feature_mean[0]) <= 1e-12);
  CHECK(std::abs(twice.scaler->feature_std[0] - 1.0) <= 1e-12);

  auto constant = make(Tensor2::from_rows({{1, 4}, {2, 4}, {3, 4}}), Tensor2::column({1, 2, 3}));
  constant.feature_names = {"size", "flat"};
  try {
    data::standardize(constant);
    FAIL("expected error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("flat") != std::string::npos);
  }
  const auto no_target = data::standardize(make(Tensor2::column({1, 2}), Tensor2::column({3, 3})), false);
  CHECK(no_target.targets == Tensor2::column({3, 3}));
}

TEST_CASE("standardize then inverse recovers the inputs") {
  nd::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor2 x(30, 5), y(30, 1);
    for (double& v : x.values()) v = rng.uniform(-100, 100);
    for (double& v : y.values()) v = rng.normal(4, 9);
    const auto ds = make(x, y);
    const auto back = data::inverse_transform(data::standardize(ds));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back.features[i] - x[i]) <= 1e-10);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(back.targets[i] - y[i]) <= 1e-10);
  }
  CHECK_THROWS_AS(data::inverse_transform(iota_dataset(3)), InvalidArgument);
}

TEST_CASE("split examples") {
  const auto big = data::split(iota_dataset(8192), {5000, 0.10, 7});
  CHECK(big.train.size() == 5000);
  CHECK(big.validation.size() == 319);
  CHECK(big.test.size() == 2873);

  const auto again = data::split(iota_dataset(8192), {5000, 0.10, 7});
  CHECK(again.train_rows == big.train_rows);
  CHECK(again.validation_rows == big.validation_rows);
  CHECK(again.test_rows == big.test_rows);
  const auto other = data::split(iota_dataset(8192), {5000, 0.10, 8});
  CHECK(other.train_rows != big.train_rows);

  const auto edge = data::split(iota_dataset(5001), {5000, 0.10, 1});
  CHECK(edge.validation.size() == 0);
  CHECK(edge.test.size() == 1);

  CHECK_THROWS_AS(data::split(iota_dataset(5000), {5000, 0.10, 1}), InvalidArgument);
  CHECK_THROWS_AS(data::split(iota_dataset(100), {50, 0.0, 1}), InvalidArgument);
}

TEST_CASE("split is an exact partition") {
  nd::Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(400);
    const std::size_t train = rng.uniform_int(n);
    const double frac = rng.uniform(0.01, 0.99);
    const auto ds = iota_dataset(n);
    const auto s = data::split(ds, {train, frac, rng.next_u64()});
    CHECK(s.train.size() + s.validation.size() + s.test.size() == n);
    CHECK(s.validation.size() == static_cast<std::size_t>(std::floor(frac * static_cast<double>(n - train))));
    std::set<std::size_t> all;
    for (auto* rows : {&s.train_rows, &s.validation_rows, &s.test_rows}) all.insert(rows->begin(), rows->end());
    CHECK(all.size() == n);
    CHECK(*all.rbegin() == n - 1);
    for (std::size_t i = 0; i < s.train.size(); ++i) CHECK(s.train.targets[i] == static_cast<double>(s.train_rows[i]));
  }
}

TEST_CASE("domain_stats examples") {
  const auto one = data::domain_stats(make(Tensor2::from_rows({{3, -1}}), Tensor2::column({0})));
  CHECK(one.stddev == std::vector<double>{0.0, 0.0});
  CHECK(one.mean == std::vector<double>{3.0, -1.0});

  const auto toy = data::domain_stats(make(Tensor2::from_rows({{0, 1}, {2, 3}}), Tensor2::column({0, 0})));
  CHECK(toy.mean == std::vector<double>{1.0, 2.0});
  CHECK(toy.stddev == std::vector<double>{1.0, 1.0});

  nd::Rng rng(4);
  Tensor2 x(200, 3), y(200, 1);
  for (double& v : x.values()) v = rng.uniform(-5, 20);
  for (double& v : y.values()) v = rng.normal();
  const auto st = data::domain_stats(data::standardize(make(x, y)));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(std::abs(st.mean[c]) <= 1e-9);
    CHECK(std::abs(st.stddev[c] - 1.0) <= 1e-9);
  }
  CHECK_THROWS_AS(data::domain_stats(make(Tensor2(0, 2), Tensor2(0, 1))), InvalidArgument);
}

TEST_CASE("idx parsing") {
  const std::string images = be32(0x803) + be32(2) + be32(2) + be32(2) + std::string("\x00\xff\xff\x00\xff\x00\x00\xff", 8);
  const std::string labels = be32(0x801) + be32(2) + std::string("\x07\x02", 2);
  const auto ds = data::parse_idx(images, labels);
  CHECK(ds.features == Tensor2::from_rows({{0, 1, 1, 0}, {1, 0, 0, 1}}));
  CHECK(ds.targets == Tensor2::column({7, 2}));

  const std::string three = be32(0x801) + be32(3) + std::string("\x01\x02\x03", 3);
  CHECK_THROWS_AS(data::parse_idx(images, three), ParseError);
  CHECK_THROWS_AS(data::parse_idx(be32(0x804) + images.substr(4), labels), ParseError);
  CHECK_THROWS_AS(data::parse_idx(images.substr(0, images.size() - 1), labels), ParseError);
  CHECK_THROWS_AS(data::parse_idx(images, labels.substr(0, 9)), ParseError);

  const fs::path dir = fs::temp_directory_path() / "regraft-unit-data";
  fs::create_directories(dir);
  std::ofstream(dir / "img.idx", std::ios::binary) << images;
  std::ofstream(dir / "lab.idx", std::ios::binary) << labels;
  CHECK(data::load_idx(dir / "img.idx", dir / "lab.idx").targets[0] == 7.0);
}

TEST_CASE("synthetic sources") {
  const auto f = data::make_friedman(300, 5);
  CHECK(f.features.cols() == 10);
  CHECK(f.size() == 300);
  CHECK(data::make_friedman(300, 5).targets == f.targets);
  CHECK(data::make_friedman(300, 6).targets != f.targets);
  for (double v : f.features.values()) CHECK((v >= 0.0 && v <= 1.0));

  const auto noiseless = data::make_friedman(50, 1, 0.0);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto x = noiseless.features.row(i);
    const double y = 10 * std::sin(M_PI * x[0] * x[1]) + 20 * (x[2] - 0.5) * (x[2] - 0.5) + 10 * x[3] + 5 * x[4];
    CHECK(noiseless.targets[i] == doctest::Approx(y).epsilon(1e-14));
  }

  const auto p = data::make_protein_like(400, 9);
  CHECK(p.features.cols() == 20);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (double v : p.features.row(i)) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK((p.targets[i] >= 0.0 && p.targets[i] <= 1.0));
  }
  double mean = 0.0, var = 0.0;
  for (double v : p.targets.values()) mean += v / 400.0;
  for (double v : p.targets.values()) var += (v - mean) * (v - mean) / 400.0;
  CHECK(var > 0.005);
}
