#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace percolab {

inline constexpr int kMaxDim = 4;

/// Integer lattice point in Z^d, d <= kMaxDim. Unused trailing coordinates are zero.
/// The defaulted three-way comparison is lexicographic on coordinates and serves as
/// the fixed total order on Z^d.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<int> coords);
  static Point from(std::span<const int> coords);

  int dim() const noexcept { return dim_; }
  int operator[](int i) const noexcept { return x_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) noexcept { return x_[static_cast<std::size_t>(i)]; }

  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  Point operator-() const;
  Point scaled(int k) const;

  int linf_norm() const noexcept;
  int l1_norm() const noexcept;
  double euclidean_norm() const noexcept;
  bool is_zero() const noexcept;

  std::vector<double> to_real() const;
  std::string str() const;

  auto operator<=>(const Point&) const = default;
  bool operator==(const Point&) const = default;

 private:
  std::array<int, kMaxDim> x_{};
  int dim_ = 0;
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

using PointSet = std::unordered_set<Point, PointHash>;

/// Unordered lattice edge stored with a < b in the total order.
struct Edge {
  Point a;
  Point b;

  Edge() = default;
  Edge(const Point& u, const Point& v);

  auto operator<=>(const Edge&) const = default;
  bool operator==(const Edge&) const = default;
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const noexcept;
};

using EdgeSet = std::unordered_set<Edge, EdgeHash>;

struct LatticeOptions {
  bool auto_symmetrize = true;
  std::optional<int> coarse_radius;  // upward override of the minimal R_0
};

/// Finite-range, translation-invariant, irreducible edge set on Z^d.
/// Immutable after construction.
class LatticeSpec {
 public:
  int dim() const noexcept { return dim_; }
  /// Symmetric generator set, sorted by the total order.
  const std::vector<Point>& offsets() const noexcept { return offsets_; }
  /// Generators g with g > 0 in the total order; each edge is {x, x+g} for exactly one of these.
  const std::vector<Point>& positive_offsets() const noexcept { return positive_; }
  double range() const noexcept { return range_; }
  int linf_range() const noexcept { return linf_range_; }
  int coarse_radius() const noexcept { return coarse_radius_; }
  int coarse_spacing() const noexcept { return 2 * coarse_radius_ + 1; }
  double distortion() const noexcept { return c_e_; }

  bool is_edge(const Point& x, const Point& y) const;
  std::vector<Point> neighbors(const Point& x) const;

 private:
  friend LatticeSpec make_lattice_spec(int, std::span<const Point>, const LatticeOptions&);
  int dim_ = 0;
  std::vector<Point> offsets_;
  std::vector<Point> positive_;
  double range_ = 0.0;
  int linf_range_ = 0;
  int coarse_radius_ = 0;
  double c_e_ = 1.0;
};

LatticeSpec make_lattice_spec(int dim, std::span<const Point> offsets,
                              const LatticeOptions& options = {});
LatticeSpec make_lattice_spec(int dim, std::initializer_list<Point> offsets,
                              const LatticeOptions& options = {});

/// Nearest-neighbour lattice {±e_i}.
LatticeSpec nearest_neighbor_lattice(int dim);

Point unit_vector(int dim, int axis, int sign = 1);

int graph_distance(const LatticeSpec& spec, const Point& x, const Point& y);

PointSet box(int dim, int radius);
PointSet box_at(const Point& center, int radius);

PointSet interior_boundary(const LatticeSpec& spec, const PointSet& a);
PointSet exterior_boundary(const LatticeSpec& spec, const PointSet& a);
EdgeSet edges_within(const LatticeSpec& spec, const PointSet& a);

Point round_to_lattice(std::span<const double> x);
bool total_order_less(const Point& x, const Point& y);

/// Coarse lattice point v in ((2R_0+1)Z)^d whose half-open cell
/// v + [-R_0-1/2, R_0+1/2)^d contains x.
Point cell_of(const LatticeSpec& spec, std::span<const double> x);
Point cell_of(const LatticeSpec& spec, const Point& x);

/// Dense row-major indexing of the box center + [-radius, radius]^d, padded by `pad`
/// layers on every side so neighbour lookups at the box boundary stay in range.
class BoxGrid {
 public:
  BoxGrid() = default;
  BoxGrid(const Point& center, int radius, int pad);

  int dim() const noexcept { return center_.dim(); }
  const Point& center() const noexcept { return center_; }
  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return size_; }

  bool in_box(const Point& p) const noexcept;
  bool in_padded(const Point& p) const noexcept;
  std::size_t index(const Point& p) const noexcept;
  Point point(std::size_t idx) const;
  std::ptrdiff_t delta(const Point& offset) const noexcept;

 private:
  Point center_;
  int radius_ = 0;
  int pad_ = 0;
  int side_ = 0;
  std::array<std::ptrdiff_t, kMaxDim> stride_{};
  std::size_t size_ = 0;
};

}  // namespace percolab
