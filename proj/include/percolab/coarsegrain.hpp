#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "percolab/connectivity.hpp"
#include "percolab/estimate.hpp"
#include "percolab/lattice.hpp"
#include "percolab/models.hpp"

namespace percolab {

/// Unit cell Delta with fattening K. Boundaries are taken with respect to the lattice edges.
class CellSpec {
 public:
  const LatticeSpec& lattice() const noexcept { return lattice_; }
  int k() const noexcept { return k_; }
  /// Delta, sorted.
  const std::vector<Point>& delta() const noexcept { return delta_; }
  const PointSet& delta_set() const noexcept { return delta_set_; }
  /// Delta_K = union of Lambda_K(x), x in Delta.
  const PointSet& delta_k() const noexcept { return delta_k_; }
  /// Exterior boundary of Delta_K, sorted; t is in ext(Delta_K + v) iff t - v is listed.
  const std::vector<Point>& boundary_k() const noexcept { return boundary_k_; }
  bool in_boundary_k(const Point& offset) const { return boundary_k_set_.contains(offset); }
  int radius() const noexcept { return radius_; }
  int max_degree() const noexcept { return static_cast<int>(boundary_k_.size()); }
  /// K + 2 radius(Delta).
  int covering_bound() const noexcept { return k_ + 2 * radius_; }
  /// K + 2 radius(Delta) + l-inf range of the lattice: the distance every cluster point is
  /// guaranteed to lie within.
  int covering_bound_exact() const noexcept { return k_ + 2 * radius_ + lattice_.linf_range(); }

 private:
  friend CellSpec make_cell_spec(const LatticeSpec&, std::vector<Point>, int);
  LatticeSpec lattice_;
  int k_ = 1;
  std::vector<Point> delta_;
  PointSet delta_set_;
  PointSet delta_k_;
  std::vector<Point> boundary_k_;
  PointSet boundary_k_set_;
  int radius_ = 0;
};

CellSpec make_cell_spec(const LatticeSpec& lattice, std::vector<Point> delta, int k);
/// Delta = Lambda_r.
CellSpec box_cell(const LatticeSpec& lattice, int r, int k);

/// Rooted embedded tree. edges[i - 1] = f_i joins vertices[i] to an earlier vertex.
struct CoarseTree {
  std::vector<Point> vertices;
  std::vector<Edge> edges;

  std::size_t edge_count() const noexcept { return edges.size(); }
  bool operator==(const CoarseTree&) const = default;
};

/// The algorithmic map from a finite cluster containing 0 to an embedded tree.
CoarseTree coarse_grain(const Cluster& cluster, const CellSpec& cell);

struct TreeValidity {
  bool is_tree = true;
  bool distinct = true;
  bool embedded = true;
  bool reconstructible = true;
  std::vector<std::string> diagnostics;

  bool ok() const noexcept { return is_tree && distinct && embedded && reconstructible; }
};

TreeValidity is_valid_tree(const CoarseTree& tree, const CellSpec& cell);

/// Labels and edges recovered from the unlabeled vertex set.
CoarseTree reconstruct(const std::vector<Point>& vertices, const CellSpec& cell);

inline constexpr int kDefaultMaxTreeSize = 4;

/// All trees with l vertices; when `window` is set every vertex satisfies |x|_inf <= window.
std::vector<CoarseTree> enumerate_trees(const CellSpec& cell, int l, std::optional<int> window = std::nullopt,
                                        int max_l = kDefaultMaxTreeSize);

/// Number of subtrees of the D-regular tree containing the root and having l vertices.
std::uint64_t regular_tree_subtrees(std::uint64_t degree, int l);

/// (p_exit (1 + |Delta| e^{-c_mix K / 2}))^{tree_edges}; the correction vanishes when
/// K exceeds the dependence range of the model.
double energy_bound_rhs(double p_exit, const CellSpec& cell, double c_mix, int tree_edges,
                        double dependence_range);
double energy_bound_rhs(const ProbEstimate& p_exit, const CellSpec& cell, double c_mix, int tree_edges,
                        double dependence_range);

/// {0 <-> Delta^c} evaluated on lattice points.
EventSpec exit_cell_event(const CellSpec& cell);

/// Largest l-inf distance from a cluster vertex to the nearest tree vertex.
int covering_distance(const Cluster& cluster, const CoarseTree& tree);
int max_tree_degree(const CoarseTree& tree);

/// Open cluster of 0 inside Lambda_radius; `truncated` reports contact with the box boundary.
struct SampledCluster {
  Cluster cluster;
  bool truncated = false;
};
SampledCluster sample_cluster(const ModelSpec& model, std::uint64_t key, int radius);

/// One line per vertex: the root first, then "child parent" pairs, coordinates comma separated.
std::string to_text(const CoarseTree& tree);
CoarseTree tree_from_text(const std::string& text);

}  // namespace percolab
