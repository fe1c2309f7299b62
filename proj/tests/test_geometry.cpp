#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "percolab/error.hpp"
#include "percolab/geometry.hpp"

using namespace percolab;

namespace {

Vec v2(double a, double b) { return Vec{a, b}; }

// Closed-cell test by dense sampling, used as an oracle for exact cell intersection.
bool cell_meets_by_sampling(const Region& r, const Point& v, int r0, int per_axis) {
  const double lo = -r0 - 0.5, hi = r0 + 0.5;
  for (int i = 0; i <= per_axis; ++i)
    for (int j = 0; j <= per_axis; ++j) {
      const double y[] = {v[0] + lo + (hi - lo) * i / per_axis, v[1] + lo + (hi - lo) * j / per_axis};
      if (contains(r, std::span<const double>(y))) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("directions are unit vectors") {
  CHECK_THROWS_AS(Direction(Vec{1.0, 1.0}), Error);
  const auto d = Direction::normalized(Vec{3.0, 4.0});
  CHECK(d[0] == doctest::Approx(0.6));
  CHECK(Direction::from_angle(std::numbers::pi / 2)[1] == doctest::Approx(1.0));
  CHECK(Direction::axis(3, 2, -1)[2] == -1.0);
}

TEST_CASE("half-space and cone membership examples") {
  const auto e1 = Direction::axis(2, 0);
  const Vec o = v2(0, 0);
  CHECK(contains(Region::half_space(e1, o), v2(3, -5)));
  const auto ray = Region::cone(e1, 0.0, o);
  CHECK_FALSE(contains(ray, v2(1, 1)));
  CHECK(contains(ray, v2(2, 0)));
  CHECK_FALSE(contains(ray, v2(-2, 0)));
}

TEST_CASE("full-aperture cone agrees with the half-space") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  const auto s = Direction::normalized(Vec{0.3, -0.7});
  const Vec apex = v2(0.5, 1.0);
  const auto c = Region::cone(s, 1.0, apex);
  const auto h = Region::half_space(s, apex);
  for (int i = 0; i < 1000; ++i) {
    const Vec y = v2(u(rng), u(rng));
    CHECK(contains(c, y) == contains(h, y));
  }
}

TEST_CASE("aperture outside [0, 1] is rejected") {
  const auto e1 = Direction::axis(2, 0);
  try {
    Region::cone(e1, 1.5, v2(0, 0));
    FAIL("expected InvalidAperture");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidAperture);
  }
}

TEST_CASE("dimension mismatch in membership") {
  const auto h = Region::half_space(Direction::axis(2, 0), v2(0, 0));
  const Vec y{1.0, 2.0, 3.0};
  try {
    (void)contains(h, y);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("cone monotonicity, translation covariance and truncation") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-4, 4), a(0, 1), th(-3.14, 3.14);
  for (int i = 0; i < 500; ++i) {
    const auto s = Direction::from_angle(th(rng));
    const Vec x = v2(u(rng), u(rng));
    const Vec y = v2(u(rng), u(rng));
    double d1 = a(rng), d2 = a(rng);
    if (d1 > d2) std::swap(d1, d2);
    if (contains(Region::cone(s, d1, x), y)) CHECK(contains(Region::cone(s, d2, x), y));

    const Vec shift = v2(u(rng), u(rng));
    const Vec ys = axpy(1.0, y, shift);
    const std::vector<Region> regions = {Region::half_space(s, x), Region::cone(s, d1, x),
                                         Region::truncated_cone(s, d2, 2.0, x), Region::box(x, 1.5),
                                         Region::difference(Region::cone(s, d2, x), Region::box(x, 1.0))};
    for (const auto& r : regions) CHECK(contains(r.translated(shift), ys) == contains(r, y));

    const auto tc = Region::truncated_cone(s, d2, 2.0, x);
    if (contains(tc, y)) {
      CHECK(contains(Region::cone(s, d2, x), y));
      // Strictly before the cut, up to the boundary tolerance.
      CHECK(dot(axpy(-1.0, x, y), s.vec()) <= 2.0 + 1e-9);
    }
  }
}

TEST_CASE("discretize examples") {
  const auto window = box(2, 2);
  CHECK(discretize(Region::full_space(2), window, 1) == window);

  const auto h = Region::half_space(Direction::axis(2, 0), v2(0, 0));
  PointSet expected;
  for (const auto& z : window)
    if (z[0] >= -1) expected.insert(z);
  CHECK(discretize(h, window, 1) == expected);

  const auto empty = Region::intersection({Region::half_space(Direction::axis(2, 0), v2(1, 0)),
                                           Region::half_space(Direction::axis(2, 0, -1), v2(-1, 0))});
  CHECK(discretize(empty, window, 1).empty());
}

TEST_CASE("exact cell intersection agrees with dense sampling") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-6, 6), a(0.05, 1), th(-3.14, 3.14);
  int mismatches = 0;
  for (int i = 0; i < 60; ++i) {
    const auto s = Direction::from_angle(th(rng));
    const Vec x = v2(u(rng), u(rng));
    const Region r = i % 3 == 0   ? Region::cone(s, a(rng), x)
                     : i % 3 == 1 ? Region::truncated_cone(s, a(rng), 3.0, x)
                                  : Region::difference(Region::half_space(s, x), Region::box(x, 2.0));
    for (const auto& v : discretize(Region::full_space(2), box(2, 9), 1)) {
      if (v[0] % 3 != 0 || v[1] % 3 != 0) continue;
      const bool exact = cell_intersects(r, v, 1);
      const bool sampled = cell_meets_by_sampling(r, v, 1, 60);
      // Sampling can only miss thin intersections.
      if (sampled) CHECK(exact);
      mismatches += exact != sampled;
    }
  }
  CHECK(mismatches < 20);
}

TEST_CASE("discretize is monotone and keeps interior points") {
  const auto window = box(2, 8);
  const auto s = Direction::normalized(Vec{1.0, 0.4});
  const Vec o = v2(0, 0);
  const auto small = discretize(Region::cone(s, 0.3, o), window, 1);
  const auto big = discretize(Region::cone(s, 0.7, o), window, 1);
  for (const auto& z : small) CHECK(big.contains(z));
  const auto smaller_window = discretize(Region::cone(s, 0.7, o), box(2, 5), 1);
  for (const auto& z : smaller_window) CHECK(big.contains(z));
  for (const auto& z : box(2, 7))
    if (contains(Region::cone(s, 0.3, o), z)) CHECK(small.contains(z));
}

TEST_CASE("cone cover in d = 2") {
  const auto e1 = Direction::axis(2, 0);
  const auto cover = cone_cover_directions(e1, 1.0, 0.5);
  CHECK(cover.size() >= 3);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> th(-std::numbers::pi / 2, std::numbers::pi / 2);
  for (int i = 0; i < 10000; ++i) {
    const Vec y = Direction::from_angle(th(rng)).scaled(3.0);
    bool covered = false;
    for (const auto& c : cover) covered = covered || contains(Region::cone(c, 0.5, v2(0, 0)), y);
    CHECK(covered);
  }
  for (const auto& c : cover) CHECK(dot(c.vec(), e1.vec()) >= -1e-12);
}

TEST_CASE("cone cover trivial cases and errors") {
  const auto s = Direction::from_angle(0.3);
  const auto one = cone_cover_directions(s, 0.4, 0.6);
  REQUIRE(one.size() == 1);
  CHECK(one[0].vec() == s.vec());
  CHECK(cone_cover_directions(Direction::axis(1, 0), 1.0, 0.5).size() <= 2);
  CHECK_THROWS_AS(cone_cover_directions(s, 0.5, 0.0), Error);
  CHECK_THROWS_AS(cone_cover_directions(s, 1.5, 0.2), Error);
}

TEST_CASE("cone cover in d = 3 covers the cone") {
  const auto s = Direction::axis(3, 2);
  const auto cover = cone_cover_directions(s, 0.5, 0.2);
  std::mt19937 rng(8);
  std::normal_distribution<double> g;
  int tested = 0;
  while (tested < 2000) {
    Vec y{g(rng), g(rng), g(rng)};
    const double n = norm(y);
    for (auto& c : y) c /= n;
    if (dot(y, s.vec()) < 0.5) continue;
    ++tested;
    bool covered = false;
    for (const auto& c : cover) covered = covered || dot(y, c.vec()) >= 0.8 - 1e-9;
    CHECK(covered);
  }
}
