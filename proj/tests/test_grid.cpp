#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "latentedit/grid.hpp"

using namespace latentedit;
using testutil::bit_equal;
using testutil::make_grid;
using testutil::random_grid;

TEST_CASE("zeros fills the grid with exact zeros") {
  const Grid g = zeros({1, 2, 2});
  REQUIRE(g.size() == 4);
  for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(g.array()[i] == 0.0);
  CHECK(l2_norm(g) == 0.0);
}

TEST_CASE("zeros is the additive identity") {
  const Shape shape{3, 5, 4};
  const Grid g = random_grid(shape, 7);
  const Grid sum(shape, zeros(shape).array() + g.array());
  CHECK(bit_equal(sum, g));
}

TEST_CASE("shape validation") {
  CHECK_FALSE(Shape{0, 2, 2}.valid());
  CHECK_FALSE(Shape{1, -1, 2}.valid());
  CHECK(Shape{1, 1, 1}.valid());
  CHECK(Shape{4, 64, 64}.volume() == 4 * 64 * 64);
  CHECK_THROWS_AS(zeros({0, 1, 1}), Error);
}

TEST_CASE("grids reject malformed data") {
  Grid::Array bad(4);
  bad << 1.0, 2.0, std::nan(""), 4.0;
  CHECK_THROWS_WITH_AS(Grid({1, 2, 2}, bad), doctest::Contains("non-finite"), Error);
  CHECK_THROWS_AS(Grid({1, 2, 2}, Grid::Array::Zero(3)), Error);
}

TEST_CASE("sample_gaussian is a pure function of shape and seed") {
  const Shape shape{2, 8, 8};
  const Grid a = sample_gaussian(shape, Seed{42});
  const Grid b = sample_gaussian(shape, Seed{42});
  CHECK(bit_equal(a, b));

  const Grid c = sample_gaussian(shape, Seed{43});
  CHECK_FALSE(bit_equal(a, c));
}

TEST_CASE("sample_gaussian matches standard-normal statistics") {
  // Law-of-large-numbers bounds checked with an independent accumulation.
  const Shape shape{4, 64, 64};
  const double n = static_cast<double>(shape.volume());
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Grid g = sample_gaussian(shape, Seed{seed});
    long double sum = 0.0L, sum_sq = 0.0L;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      sum += g.array()[i];
      sum_sq += static_cast<long double>(g.array()[i]) * g.array()[i];
    }
    const double mean = static_cast<double>(sum / g.size());
    const double var = static_cast<double>(sum_sq / g.size()) - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) < 0.1);
  }
}

TEST_CASE("lerp endpoints are exact") {
  const Shape shape{2, 3, 3};
  const Grid a = random_grid(shape, 1);
  const Grid b = random_grid(shape, 2);
  CHECK(bit_equal(lerp(a, b, 1.0), a));
  CHECK(bit_equal(lerp(a, b, 0.0), b));
}

TEST_CASE("lerp weighs the first argument") {
  // w * a + (1 - w) * b with a = 2, b = 4, w = 0.25.
  const Grid a = make_grid({1, 1, 1}, {2.0});
  const Grid b = make_grid({1, 1, 1}, {4.0});
  const Grid mid = lerp(a, b, 0.25);
  CHECK(mid.array()[0] == doctest::Approx(0.25 * 2.0 + 0.75 * 4.0).epsilon(1e-15));
}

TEST_CASE("lerp rejects shape mismatches and bad weights") {
  const Grid a = zeros({1, 2, 2});
  const Grid b = zeros({1, 2, 3});
  CHECK_THROWS_AS(lerp(a, b, 0.5), Error);
  CHECK_THROWS_AS(lerp(a, a, -0.1), Error);
  CHECK_THROWS_AS(lerp(a, a, 1.1), Error);
}

TEST_CASE("lerp of a grid with itself stays put") {
  const Grid a = random_grid({2, 4, 4}, 11);
  for (double w : {0.1, 0.25, 0.5, 0.9}) {
    const Grid out = lerp(a, a, w);
    CHECK(l2_relative_error(out, a) < 1e-15);
  }
}

TEST_CASE("l2_relative_error basics") {
  const Grid b = random_grid({2, 4, 4}, 3, 1.0, 0.5);
  CHECK(l2_relative_error(b, b) == 0.0);

  const Grid twice(b.shape(), 2.0 * b.array());
  CHECK(l2_relative_error(twice, b) == doctest::Approx(1.0).epsilon(1e-15));

  // ||(3,-1)|| / ||(0,5)|| = sqrt(10) / 5, frozen from the scalar oracle.
  const Grid u = make_grid({1, 1, 2}, {3.0, 4.0});
  const Grid v = make_grid({1, 1, 2}, {0.0, 5.0});
  CHECK(l2_relative_error(u, v) == doctest::Approx(0.6324555320336759).epsilon(1e-15));

  CHECK_THROWS_AS(l2_relative_error(u, zeros({1, 1, 2})), Error);
}
