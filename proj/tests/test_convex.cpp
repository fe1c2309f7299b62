#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "percolab/convex.hpp"
#include "percolab/error.hpp"

using namespace percolab;

namespace {

constexpr double kPi = std::numbers::pi;

double linf(const Direction& u) { return std::max(std::abs(u[0]), std::abs(u[1])); }
double l1(const Direction& u) { return std::abs(u[0]) + std::abs(u[1]); }
double euclid(const Direction&) { return 1.0; }
// Norm of an axis-aligned ellipse with semi-axes 2 and 1.
double ellipse(const Direction& u) { return std::hypot(u[0] / 2.0, u[1]); }

double angle_between(const Direction& a, const Direction& b) {
  return std::abs(std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]));
}

bool has_point(const std::vector<Vec>& pts, double x, double y, double tol = 1e-9) {
  for (const auto& p : pts)
    if (std::abs(p[0] - x) < tol && std::abs(p[1] - y) < tol) return true;
  return false;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::IllPosedEvent;
}

}  // namespace

TEST_CASE("homogeneous extension examples") {
  const auto e = table_from_function(360, euclid);
  CHECK(extend_homogeneous(e, Vec{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-4));
  CHECK(extend_homogeneous(e, Vec{0.0, 0.0}) == 0.0);
  CHECK(extend_homogeneous(e, Vec{2.0, 0.0}) == doctest::Approx(2.0));
  const auto box = table_from_function(64, linf);
  CHECK(std::abs(extend_homogeneous(box, Vec{1.0, 1.0}) - 1.0) < 1e-3);
  CHECK(std::abs(extend_homogeneous(box, Vec{1.0, 0.3}) - 1.0) < 1e-3);
  for (auto closure : {Closure::ConvexGauge, Closure::AngularLinear}) {
    const auto t = table_from_function(48, ellipse, closure);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> lam(0.01, 50.0);
    for (int i = 0; i < 200; ++i) {
      const Vec x{g(rng), g(rng)};
      const double l = lam(rng);
      CHECK(extend_homogeneous(t, Vec{l * x[0], l * x[1]}) == doctest::Approx(l * extend_homogeneous(t, x)));
    }
  }
}

TEST_CASE("table validation errors") {
  NormTable empty;
  CHECK(kind_of([&] { empty.validate(); }) == ErrorKind::EmptyTable);
  CHECK(kind_of([&] { extend_homogeneous(empty, Vec{1.0, 0.0}); }) == ErrorKind::EmptyTable);
  auto t = table_from_function(8, euclid);
  t.entries[2].value = 0.0;
  CHECK(kind_of([&] { t.validate(); }) == ErrorKind::DegenerateTable);
  NormTable two;
  two.entries = {{Direction::axis(2, 0), 1.0, 0.0}, {Direction::axis(2, 1), 1.0, 0.0}};
  CHECK(kind_of([&] { two.validate(); }) == ErrorKind::DegenerateTable);
  NormTable line;
  line.symmetric = false;
  line.entries = {{Direction::axis(2, 0), 1.0, 0.0}, {Direction::axis(2, 0, -1), 1.0, 0.0},
                  {Direction::normalized(Vec{1.0, 1e-20}), 1.0, 0.0}};
  CHECK_THROWS_AS(line.validate(), Error);
  auto asym = table_from_function(8, euclid);
  asym.entries.pop_back();
  CHECK(kind_of([&] { asym.validate(); }) == ErrorKind::DegenerateTable);
  NormTable wrong_dim;
  wrong_dim.entries = {{Direction::axis(3, 0), 1.0, 0.0}, {Direction::axis(3, 1), 1.0, 0.0},
                       {Direction::axis(3, 2), 1.0, 0.0}};
  CHECK(kind_of([&] { wrong_dim.validate(); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("unit balls") {
  const auto e = unit_ball(table_from_function(12, euclid));
  CHECK(e.vertices.size() == 12);
  for (const auto& v : e.vertices) CHECK(std::hypot(v[0], v[1]) == doctest::Approx(1.0));
  CHECK(e.convexity_defect == doctest::Approx(0.0));

  const auto d = unit_ball(table_from_function(8, l1));
  CHECK(d.vertices.size() == 4);
  CHECK(has_point(d.vertices, 1, 0));
  CHECK(has_point(d.vertices, 0, 1));
  CHECK(has_point(d.vertices, -1, 0));
  CHECK(has_point(d.vertices, 0, -1));

  const auto t = table_from_function(30, ellipse);
  const auto half = unit_ball(t.scaled(2.0));
  const auto full = unit_ball(t);
  REQUIRE(half.vertices.size() == full.vertices.size());
  for (std::size_t i = 0; i < full.vertices.size(); ++i) {
    CHECK(half.vertices[i][0] == doctest::Approx(full.vertices[i][0] / 2));
    CHECK(half.vertices[i][1] == doctest::Approx(full.vertices[i][1] / 2));
  }
  // Central symmetry: -v is a vertex for every vertex v.
  for (const auto& v : full.vertices) CHECK(has_point(full.vertices, -v[0], -v[1]));
}

TEST_CASE("non-convex samples are convexified and the defect reported") {
  auto t = table_from_function(16, euclid);
  t.entries[0].value = 2.0;
  t.entries[8].value = 2.0;
  const auto b = unit_ball(t);
  CHECK(b.convexity_defect > 0.0);
  for (const auto& entry : t.entries) {
    const Vec p{entry.direction[0] / entry.value, entry.direction[1] / entry.value};
    CHECK(b.contains(p));
  }
}

TEST_CASE("polar sets") {
  const auto p = polar_set(table_from_function(8, l1));
  CHECK(p.vertices.size() == 4);
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0}) CHECK(has_point(p.vertices, x, y));
  const auto disc = polar_set(table_from_function(64, euclid));
  for (const auto& v : disc.vertices) {
    CHECK(std::hypot(v[0], v[1]) >= 1.0 - 1e-12);
    CHECK(std::hypot(v[0], v[1]) <= 1.0 / std::cos(kPi / 64) + 1e-12);
  }
  const auto t = table_from_function(40, ellipse);
  const auto w = polar_set(t);
  const auto u = unit_ball(t);
  for (const auto& entry : t.entries) {
    CHECK(w.support(entry.direction.vec()) == doctest::Approx(entry.value).epsilon(1e-9));
    // Unit ball lies in {<x, s> <= 1 / ...}: support of U at a polar vertex direction is at most 1 there.
    CHECK(u.support(entry.direction.vec()) <= 1.0 / entry.value * 4.0);
  }
  // Support-function round trip: <x, y> <= 1 for x in U and y in W.
  for (const auto& x : u.vertices)
    for (const auto& y : w.vertices) CHECK(x[0] * y[0] + x[1] * y[1] <= 1.0 + 1e-9);
}

TEST_CASE("dual directions") {
  const auto box = table_from_function(64, linf);
  const auto e1 = Direction::axis(2, 0);
  const auto duals = dual_directions(box, e1);
  REQUIRE_FALSE(duals.empty());
  for (const auto& d : duals) CHECK(angle_between(d, e1) < 1e-9);
  CHECK(angle_between(choose_dual(box, e1).s_star, e1) < 1e-9);

  const auto diag = Direction::normalized(Vec{1.0, 1.0});
  const auto corner = dual_directions(box, diag);
  bool has_e1 = false, has_e2 = false;
  for (const auto& d : corner) {
    has_e1 = has_e1 || angle_between(d, e1) < 1e-9;
    has_e2 = has_e2 || angle_between(d, Direction::axis(2, 1)) < 1e-9;
  }
  CHECK(has_e1);
  CHECK(has_e2);
  // s lies inside the arc of normals, so the angularly nearest member is s itself.
  CHECK(angle_between(choose_dual(box, diag).s_star, diag) < 1e-9);

  const auto e = table_from_function(360, euclid);
  for (int i = 0; i < 20; ++i) {
    const auto s = Direction::from_angle(0.1 + 0.3 * i);
    const auto pair = choose_dual(e, s);
    CHECK(angle_between(pair.s_star, s) <= 2 * kPi / 360);
    CHECK(pair.s[0] * pair.s_star[0] + pair.s[1] * pair.s_star[1] > 0);
  }
}

TEST_CASE("every dual direction satisfies the minimizer property") {
  for (const auto& t : {table_from_function(32, ellipse), table_from_function(64, linf), table_from_function(24, l1)}) {
    for (int i = 0; i < 25; ++i) {
      const auto s = Direction::from_angle(-3.0 + 0.25 * i);
      for (const auto& d : dual_directions(t, s)) CHECK(minimizer_check(t, s, d, 1e-9).holds);
    }
  }
}

TEST_CASE("minimizer check examples") {
  const auto e = table_from_function(16, euclid, Closure::AngularLinear);
  const auto s = e.entries[2].direction;
  CHECK(minimizer_check(e, s, s).holds);
  const auto box = table_from_function(64, linf);
  CHECK(minimizer_check(box, Direction::axis(2, 0), Direction::axis(2, 0)).holds);

  auto bad = e;
  bad.entries[3].value *= 0.9;
  const auto rep = minimizer_check(bad, s, s);
  CHECK_FALSE(rep.holds);
  REQUIRE(rep.worst_entry.has_value());
  CHECK(*rep.worst_entry == 3);
  // Oracle: 1 - 0.9 / cos(2 pi / 16).
  CHECK(rep.worst_deficit == doctest::Approx(1.0 - 0.9 / std::cos(2 * kPi / 16)));
}

TEST_CASE("duality residual") {
  const auto e = table_from_function(72, euclid);
  for (int i = 0; i < 72; ++i) {
    const auto r = duality_residual(e, e, e.entries[static_cast<std::size_t>(i)].direction);
    CHECK(std::abs(r.value) < 1e-9);
  }
  const auto pp = table_from_function(90, ellipse);
  std::vector<Direction> dirs;
  for (int i = 0; i < 720; ++i) dirs.push_back(Direction::from_angle(2 * kPi * i / 720));
  const auto hs = halfspace_table_from(pp, dirs);
  for (int i = 0; i < 90; i += 3) {
    const auto s = pp.entries[static_cast<std::size_t>(i)].direction;
    const auto r = duality_residual(pp, hs, s);
    CHECK(std::abs(r.value) < 5e-3);
    // Easy inequality: nu_H(s*) <s, s*> <= nu(s).
    CHECK(r.value >= -5e-3);
  }
  NormTable partial;
  partial.symmetric = false;
  partial.closure = Closure::AngularLinear;
  for (double a : {0.0, 0.3, 0.6}) partial.entries.push_back({Direction::from_angle(a), 1.0, 0.0});
  CHECK(kind_of([&] { duality_residual(pp, partial, Direction::from_angle(kPi)); }) == ErrorKind::MissingDirection);
}

TEST_CASE("scaling invariance") {
  const auto t = table_from_function(50, ellipse);
  const auto hs = halfspace_table_from(t, [] {
    std::vector<Direction> d;
    for (int i = 0; i < 360; ++i) d.push_back(Direction::from_angle(2 * kPi * i / 360));
    return d;
  }());
  const double lambda = 3.5;
  const auto ts = t.scaled(lambda);
  const auto hss = hs.scaled(lambda);
  for (int i = 0; i < 12; ++i) {
    const auto s = Direction::from_angle(0.2 + 0.5 * i);
    CHECK(extend_homogeneous(ts, s.vec()) == doctest::Approx(lambda * extend_homogeneous(t, s.vec())));
    const auto a = dual_directions(t, s), b = dual_directions(ts, s);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(angle_between(a[k], b[k]) < 1e-9);
    CHECK(duality_residual(ts, hss, s).value == doctest::Approx(lambda * duality_residual(t, hs, s).value));
  }
}

TEST_CASE("triangle inequality check") {
  CHECK(triangle_check(table_from_function(360, euclid), 2000, 1) <= 1e-9);
  CHECK(triangle_check(table_from_function(64, linf), 2000, 2) <= 1e-9);
  const auto t = table_from_function(20, ellipse);
  const Vec x{0.3, -1.2};
  const Vec y{0.6, -2.4};
  CHECK(extend_homogeneous(t, Vec{x[0] + y[0], x[1] + y[1]}) - extend_homogeneous(t, x) - extend_homogeneous(t, y) ==
        doctest::Approx(0.0).epsilon(1e-12));
  auto dent = table_from_function(16, euclid, Closure::AngularLinear);
  dent.entries[4].value = 1.5;
  dent.entries[12].value = 1.5;
  CHECK(triangle_check(dent, 4000, 3) > 0.01);
}

TEST_CASE("higher-dimensional tables") {
  NormTable t;
  t.dim = 3;
  t.symmetric = true;
  t.closure = Closure::AngularLinear;
  for (int a = 0; a < 3; ++a)
    for (int sgn : {1, -1}) t.entries.push_back({Direction::axis(3, a, sgn), 2.0, 0.0});
  t.validate();
  CHECK(extend_homogeneous(t, Vec{0.0, 0.0, 3.0}) == doctest::Approx(6.0));
  CHECK(extend_homogeneous(t, Vec{1.0, 1.0, 1.0}) == doctest::Approx(2.0 * std::sqrt(3.0)));
  const auto s = Direction::axis(3, 1);
  const auto r = duality_residual(t, t, s);
  CHECK(std::abs(r.value) < 1e-9);
}

TEST_CASE("csv round trip") {
  auto t = table_from_function(24, ellipse, Closure::AngularLinear);
  for (std::size_t i = 0; i < t.entries.size(); ++i) t.entries[i].uncertainty = 0.001 * static_cast<double>(i);
  const auto back = table_from_csv(to_csv(t));
  CHECK(back.closure == t.closure);
  CHECK(back.symmetric == t.symmetric);
  REQUIRE(back.entries.size() == t.entries.size());
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    CHECK(angle_between(back.entries[i].direction, t.entries[i].direction) < 1e-12);
    CHECK(back.entries[i].value == doctest::Approx(t.entries[i].value).epsilon(1e-14));
    CHECK(back.entries[i].uncertainty == doctest::Approx(t.entries[i].uncertainty).epsilon(1e-14));
  }
  CHECK(to_csv(unit_ball(t)).starts_with("x,y"));
  CHECK(closure_from_string(to_string(Closure::ConvexGauge)) == Closure::ConvexGauge);
  CHECK_THROWS_AS(closure_from_string("spline"), Error);
  CHECK_THROWS_AS(table_from_csv("angle,value,uncertainty\nfoo,1,0\n"), Error);
}
