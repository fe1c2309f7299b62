#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "percolab/lattice.hpp"

namespace percolab {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
Vec axpy(double alpha, std::span<const double> x, std::span<const double> y);  // alpha*x + y

/// Unit vector in R^d.
class Direction {
 public:
  Direction() = default;
  /// Requires |v| = 1 within 1e-12.
  explicit Direction(Vec v);
  static Direction normalized(Vec v);
  static Direction from_angle(double theta);  // d = 2
  static Direction axis(int dim, int axis, int sign = 1);

  int dim() const noexcept { return static_cast<int>(v_.size()); }
  const Vec& vec() const noexcept { return v_; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  double angle() const;  // d = 2, in (-pi, pi]
  Direction operator-() const;
  Vec scaled(double t) const;

 private:
  Vec v_;
};

inline constexpr double kBoundaryTol = 1e-9;

/// Immutable region algebra: half-spaces, cones, truncated cones, boxes and boolean
/// combinations. Shares subtrees by reference.
class Region {
 public:
  enum class Kind { FullSpace, HalfSpace, Cone, TruncatedCone, Box, Intersection, Difference, Complement };

  struct Node {
    Kind kind = Kind::FullSpace;
    int dim = 0;
    Vec direction;
    Vec anchor;  // half-space anchor, cone apex or box center
    double delta = 1.0;
    double cutoff = 0.0;  // truncated cones
    double radius = 0.0;  // boxes, l_inf radius
    std::vector<Region> children;
  };

  static Region full_space(int dim);
  /// { y : <y - x, s> >= 0 }
  static Region half_space(const Direction& s, Vec anchor);
  /// { y : <y - x, s> >= (1 - delta) |y - x| }, delta in [0, 1]
  static Region cone(const Direction& s, double delta, Vec apex);
  /// cone minus the half-space anchored at apex + K s
  static Region truncated_cone(const Direction& s, double delta, double cutoff, Vec apex);
  static Region box(Vec center, double radius);
  static Region intersection(std::vector<Region> parts);
  static Region difference(Region left, Region right);
  static Region complement(Region inner);

  Kind kind() const noexcept { return node_->kind; }
  int dim() const noexcept { return node_->dim; }
  const Node& node() const noexcept { return *node_; }

  Region translated(std::span<const double> v) const;

  /// Signed slack: nonnegative inside, negative outside. Boolean nodes combine by
  /// min / negation.
  double slack(std::span<const double> y) const;

 private:
  explicit Region(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Inclusive membership: slack >= -kBoundaryTol.
bool contains(const Region& region, std::span<const double> y);
bool contains(const Region& region, const Point& y);

/// True when the closed box [lo, hi] meets the region (within kBoundaryTol).
bool box_intersects(const Region& region, std::span<const double> lo, std::span<const double> hi);

/// True when the closed coarse cell around v (v in Gamma) meets the region.
bool cell_intersects(const Region& region, const Point& v, int coarse_radius);

/// [region] restricted to `window`: z kept iff the closed coarse cell containing z meets
/// the region.
PointSet discretize(const Region& region, const PointSet& window, int coarse_radius);

/// Dense form of discretize over the box of `grid`. With coarse == false each lattice
/// point is tested directly for membership instead.
std::vector<unsigned char> discretize_mask(const Region& region, const BoxGrid& grid,
                                           int coarse_radius, bool coarse = true);

/// Directions whose epsilon-cones cover the delta-cone around s_star. Angular spacing is
/// chosen so that every direction of the delta-cone lies within arccos(1 - epsilon) of
/// some output direction.
std::vector<Direction> cone_cover_directions(const Direction& s_star, double delta, double epsilon);

}  // namespace percolab
