#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "percolab/geometry.hpp"

namespace percolab {

enum class Closure {
  ConvexGauge,    // gauge of the convex hull of s_i / value_i (d = 2)
  AngularLinear,  // linear in angle between neighbouring table directions
};

std::string to_string(Closure c);
Closure closure_from_string(const std::string& name);

struct NormEntry {
  Direction direction;
  double value = 1.0;
  double uncertainty = 0.0;
};

/// Directional samples of a norm-like function on the unit sphere.
struct NormTable {
  int dim = 2;
  std::vector<NormEntry> entries;
  Closure closure = Closure::ConvexGauge;
  bool symmetric = false;

  /// Throws EmptyTable or DegenerateTable.
  void validate() const;
  NormTable scaled(double lambda) const;
};

/// Table with n equally spaced directions in d = 2, starting at angle 0.
NormTable table_from_function(int n, const std::function<double(const Direction&)>& f,
                              Closure closure = Closure::ConvexGauge, bool symmetric = true);

/// d = 2: CCW vertex polygon. In higher dimension only support samples are available.
struct ConvexBody {
  int dim = 2;
  std::vector<Vec> vertices;
  /// Largest distance from a raw table point to the hull; 0 for exactly convex input.
  double convexity_defect = 0.0;

  double support(std::span<const double> u) const;
  bool contains(std::span<const double> x, double tol = 1e-9) const;
};

/// nu(x) = |x| nu_hat(x / |x|); 0 at the origin.
double extend_homogeneous(const NormTable& table, std::span<const double> x);
/// Interpolated uncertainty at direction u.
double interpolate_uncertainty(const NormTable& table, const Direction& u);
/// Whether u lies in the interpolation span of the table.
bool representable(const NormTable& table, const Direction& u);

ConvexBody unit_ball(const NormTable& table);
ConvexBody polar_set(const NormTable& table);

struct DualPair {
  Direction s;
  Direction s_star;
  double gap = 0.0;  // duality residual, filled by duality_residual
};

/// d = 2: normals of the unit-ball edges through s / nu(s). At a vertex the dual set is the
/// closed arc between the two returned normals.
std::vector<Direction> dual_directions(const NormTable& table, const Direction& s);
/// Member of the dual set angularly nearest to s.
DualPair choose_dual(const NormTable& table, const Direction& s);

struct Residual {
  DualPair pair;
  double value = 0.0;
  double uncertainty = 0.0;
};

/// nu(s) - nu_H(s*) <s, s*> with s* chosen from table_pp.
Residual duality_residual(const NormTable& table_pp, const NormTable& table_hs, const Direction& s);

/// nu_H(u) = min over table directions s' with <u, s'> > 0 of nu(s') / <u, s'>, tabulated at `directions`.
NormTable halfspace_table_from(const NormTable& table_pp, const std::vector<Direction>& directions);

/// Max of nu(x + y) - nu(x) - nu(y) over random Gaussian pairs.
double triangle_check(const NormTable& table, int trials, std::uint64_t seed);

struct MinimizerReport {
  bool holds = true;
  std::optional<std::size_t> worst_entry;  // index of the most violating table direction
  double worst_deficit = 0.0;
};

/// Checks nu(s') / <s*, s'> >= nu(s) / <s*, s> - tol over table directions with <s*, s'> > 0.
MinimizerReport minimizer_check(const NormTable& table, const Direction& s, const Direction& s_star,
                                double tol = 1e-9);

std::string to_csv(const NormTable& table);
NormTable table_from_csv(const std::string& text);
std::string to_csv(const ConvexBody& body);

}  // namespace percolab
