#include <doctest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include "percolab/error.hpp"
#include "percolab/lattice.hpp"

using namespace percolab;

namespace {

// Plain BFS over a fixed box, independent of the library's two-pass search.
int bfs_distance(const LatticeSpec& spec, const Point& x, const Point& y, int box_radius) {
  std::map<Point, int> dist{{x, 0}};
  std::deque<Point> q{x};
  while (!q.empty()) {
    const Point p = q.front();
    q.pop_front();
    if (p == y) return dist[p];
    for (const auto& g : spec.offsets()) {
      const Point n = p + g;
      if (n.linf_norm() > box_radius || dist.contains(n)) continue;
      dist[n] = dist[p] + 1;
      q.push_back(n);
    }
  }
  return -1;
}

bool edge_by_definition(const LatticeSpec& spec, const Point& a, const Point& b) {
  const Point d = b - a;
  return std::find(spec.offsets().begin(), spec.offsets().end(), d) != spec.offsets().end();
}

}  // namespace

TEST_CASE("nearest-neighbour chain has R = 1 and R0 = 1") {
  const auto spec = make_lattice_spec(1, {Point{1}, Point{-1}});
  CHECK(spec.range() == 1.0);
  CHECK(spec.coarse_radius() == 1);
  CHECK(spec.coarse_spacing() == 3);
}

TEST_CASE("square lattice has R = 1 and R0 = 1") {
  const auto spec = nearest_neighbor_lattice(2);
  CHECK(spec.range() == 1.0);
  CHECK(spec.coarse_radius() == 1);
  CHECK(spec.offsets().size() == 4);
}

TEST_CASE("even sublattice generators are reducible") {
  try {
    make_lattice_spec(2, {Point{2, 0}, Point{-2, 0}, Point{0, 2}, Point{0, -2}});
    FAIL("expected Reducible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Reducible);
  }
}

TEST_CASE("asymmetric generators without symmetrization are rejected") {
  LatticeOptions opt;
  opt.auto_symmetrize = false;
  try {
    make_lattice_spec(1, {Point{1}}, opt);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSymmetric);
  }
  const auto sym = make_lattice_spec(1, {Point{1}});
  CHECK(sym.offsets().size() == 2);
}

TEST_CASE("zero offsets and dimension mismatches are rejected") {
  CHECK_THROWS_AS(make_lattice_spec(2, {Point{0, 0}}), Error);
  try {
    make_lattice_spec(2, {Point{1}});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("offsets are stored symmetric and sorted") {
  const auto spec = make_lattice_spec(2, {Point{1, 0}, Point{0, 1}, Point{1, 1}});
  const auto& o = spec.offsets();
  CHECK(std::is_sorted(o.begin(), o.end()));
  for (const auto& g : o) CHECK(std::find(o.begin(), o.end(), -g) != o.end());
  CHECK(spec.range() == doctest::Approx(std::sqrt(2.0)));
  for (const auto& g : spec.positive_offsets()) CHECK(Point(2) < g);
}

TEST_CASE("minimal R0 makes the coarse box connected and the override only goes up") {
  const auto spec = make_lattice_spec(1, {Point{2}, Point{3}});
  const int r0 = spec.coarse_radius();
  CHECK(r0 == 3);
  auto connected = [&](int r) {
    const auto box_pts = box(1, r);
    const Point start{-r};
    std::vector<Point> queue{start};
    PointSet seen{start};
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (const auto& g : spec.offsets()) {
        const Point n = queue[h] + g;
        if (box_pts.contains(n) && seen.insert(n).second) queue.push_back(n);
      }
    return seen.size() == box_pts.size();
  };
  CHECK(connected(r0));
  // Lambda_1 has no internal edge, so connectivity alone would already need radius 2.
  CHECK_FALSE(connected(1));
  LatticeOptions opt;
  opt.coarse_radius = r0 + 2;
  CHECK(make_lattice_spec(1, {Point{2}, Point{3}}, opt).coarse_radius() == r0 + 2);
  opt.coarse_radius = r0 - 1;
  CHECK_THROWS_AS(make_lattice_spec(1, {Point{2}, Point{3}}, opt), Error);
}

TEST_CASE("graph distance examples") {
  CHECK(graph_distance(nearest_neighbor_lattice(2), Point{0, 0}, Point{3, 4}) == 7);
  CHECK(graph_distance(nearest_neighbor_lattice(1), Point{0}, Point{5}) == 5);
  const auto king = make_lattice_spec(2, {Point{1, 0}, Point{0, 1}, Point{1, 1}, Point{1, -1}});
  CHECK(graph_distance(king, Point{0, 0}, Point{2, 2}) == bfs_distance(king, Point{0, 0}, Point{2, 2}, 6));
  CHECK(graph_distance(king, Point{0, 0}, Point{2, 2}) == 2);
}

TEST_CASE("graph distance matches a box BFS and is a metric on random triples") {
  const auto spec = make_lattice_spec(2, {Point{2, 1}, Point{1, 0}, Point{0, 3}});
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> c(-5, 5);
  for (int t = 0; t < 40; ++t) {
    const Point x{c(rng), c(rng)}, y{c(rng), c(rng)}, z{c(rng), c(rng)};
    const int dxy = graph_distance(spec, x, y);
    CHECK(dxy == bfs_distance(spec, x, y, 40));
    CHECK(dxy == graph_distance(spec, y, x));
    CHECK(dxy <= graph_distance(spec, x, z) + graph_distance(spec, z, y));
    // Distortion bound between the graph and Euclidean metrics.
    const double de = (x - y).euclidean_norm();
    CHECK(de <= spec.distortion() * dxy + 1e-9);
    CHECK(dxy <= spec.distortion() * de + 1e-9);
  }
}

TEST_CASE("boxes have (2N+1)^d points") {
  CHECK(box(2, 0).size() == 1);
  CHECK(box(2, 0).contains(Point{0, 0}));
  CHECK(box(2, 1).size() == 9);
  CHECK(box(3, 2).size() == 125);
  const auto b = box_at(Point{5, -1}, 1);
  CHECK(b.size() == 9);
  CHECK(b.contains(Point{6, 0}));
}

TEST_CASE("boundaries follow their definitions") {
  const auto sq = nearest_neighbor_lattice(2);
  const auto a = box(2, 1);
  const auto ext = exterior_boundary(sq, a);
  const auto in = interior_boundary(sq, a);
  // Oracle: scan a larger box and apply the definitions directly.
  PointSet ext_oracle, in_oracle;
  for (const auto& x : box(2, 4))
    for (const auto& y : box(2, 4)) {
      if (!edge_by_definition(sq, x, y)) continue;
      if (!a.contains(x) && a.contains(y)) ext_oracle.insert(x);
      if (a.contains(x) && !a.contains(y)) in_oracle.insert(x);
    }
  CHECK(ext == ext_oracle);
  CHECK(in == in_oracle);
  CHECK(ext.size() == 12);
  CHECK(in.size() == 8);
  for (const auto& x : ext) CHECK_FALSE(a.contains(x));

  const auto chain = nearest_neighbor_lattice(1);
  const PointSet single{Point{0}};
  CHECK(interior_boundary(chain, single) == single);
  CHECK(exterior_boundary(chain, single) == PointSet{Point{-1}, Point{1}});
  CHECK(exterior_boundary(chain, PointSet{}).empty());
  CHECK(interior_boundary(chain, PointSet{}).empty());
}

TEST_CASE("edges_within is the induced edge set") {
  const auto sq = nearest_neighbor_lattice(2);
  CHECK(edges_within(sq, PointSet{Point{0, 0}, Point{1, 0}}).size() == 1);
  CHECK(edges_within(sq, box(2, 1)).size() == 12);
  CHECK(edges_within(sq, PointSet{Point{3, 3}}).empty());
  PointSet a{Point{0, 0}, Point{1, 0}, Point{1, 1}};
  PointSet b{Point{0, 1}, Point{0, 0}};
  PointSet ab = a;
  ab.insert(b.begin(), b.end());
  const auto eab = edges_within(sq, ab);
  for (const auto& e : edges_within(sq, a)) CHECK(eab.contains(e));
  for (const auto& e : edges_within(sq, b)) CHECK(eab.contains(e));
}

TEST_CASE("rounding rounds half up") {
  const double a[] = {0.4, 0.6};
  CHECK(round_to_lattice(a) == Point{0, 1});
  const double h[] = {0.5};
  CHECK(round_to_lattice(h) == Point{1});
  const double nh[] = {-0.5};
  CHECK(round_to_lattice(nh) == Point{0});
  const double i[] = {3.0, -2.0};
  CHECK(round_to_lattice(i) == Point{3, -2});
}

TEST_CASE("total order is lexicographic and strict") {
  CHECK(total_order_less(Point{0, 1}, Point{1, 0}));
  CHECK_FALSE(total_order_less(Point{1, 1}, Point{1, 1}));
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> c(-3, 3);
  for (int t = 0; t < 300; ++t) {
    const Point x{c(rng), c(rng)}, y{c(rng), c(rng)}, z{c(rng), c(rng)};
    CHECK(total_order_less(x, y) + total_order_less(y, x) + (x == y) == 1);
    if (total_order_less(x, y) && total_order_less(y, z)) CHECK(total_order_less(x, z));
  }
}

TEST_CASE("cell_of examples and partition property") {
  const auto sq = nearest_neighbor_lattice(2);
  const double a[] = {0.2, 0.0};
  CHECK(cell_of(sq, a) == Point{0, 0});
  const double b[] = {1.6, 0.0};
  CHECK(cell_of(sq, b) == Point{3, 0});
  const double c[] = {-3.0, 6.0};
  CHECK(cell_of(sq, c) == Point{-3, 6});
  const double edge_lo[] = {-1.5, 0.0};
  CHECK(cell_of(sq, edge_lo) == Point{0, 0});
  const double edge_hi[] = {1.5, 0.0};
  CHECK(cell_of(sq, edge_hi) == Point{3, 0});

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int t = 0; t < 2000; ++t) {
    const double x[] = {u(rng), u(rng)};
    const Point v = cell_of(sq, x);
    int owners = 0;
    // Every candidate cell center near x: exactly one half-open box owns x.
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        const Point w{v[0] + 3 * i, v[1] + 3 * j};
        const bool inside = w[0] - 1.5 <= x[0] && x[0] < w[0] + 1.5 && w[1] - 1.5 <= x[1] && x[1] < w[1] + 1.5;
        owners += inside;
        if (inside) CHECK(w == v);
      }
    CHECK(owners == 1);
    CHECK(v[0] % 3 == 0);
    CHECK(v[1] % 3 == 0);
  }
}

TEST_CASE("box grid indexes round trip") {
  const BoxGrid g(Point{1, -2}, 3, 2);
  CHECK(g.size() == 11 * 11);
  for (const auto& p : box_at(Point{1, -2}, 5)) {
    CHECK(g.in_padded(p));
    CHECK(g.point(g.index(p)) == p);
    CHECK(g.in_box(p) == ((p - Point{1, -2}).linf_norm() <= 3));
  }
  const Point p{0, 0};
  CHECK(g.index(p + Point{1, 1}) == static_cast<std::size_t>(static_cast<std::ptrdiff_t>(g.index(p)) + g.delta(Point{1, 1})));
}
