#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "percolab/lattice.hpp"

namespace percolab {

enum class ModelKind { Bernoulli, SiteModulated };

/// Percolation measure on a finite-range lattice.
///
/// Bernoulli: edges independent, open with probability p.
/// SiteModulated: i.i.d. fair signs sigma_i on sites; given the signs, edge {i,j} is open
/// independently with probability p (1 + eps sigma_i sigma_j). Translation invariant,
/// insertion tolerant with theta = p (1 - eps), and exactly independent across edge sets
/// whose endpoint sets are disjoint.
struct ModelSpec {
  LatticeSpec lattice;
  ModelKind kind = ModelKind::Bernoulli;
  double p = 0.5;
  double epsilon = 0.0;

  double theta() const;
  /// Graph distance beyond which edge sets are independent (0 for product measures).
  double dependence_range() const;
  std::string describe() const;
};

ModelSpec make_bernoulli(LatticeSpec lattice, double p);
ModelSpec make_site_modulated(LatticeSpec lattice, double p, double epsilon);

double insertion_tolerance_bound(const ModelSpec& model);

std::uint64_t mix64(std::uint64_t z) noexcept;
/// Key of the independent stream used for sample number `index` under `seed`.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) noexcept;

/// Lazy edge revelation. The state of each edge is a pure function of (key, edge), so
/// any query order reproduces the same configuration and no memo table is needed.
class EdgeOracle {
 public:
  EdgeOracle(const ModelSpec& model, std::uint64_t key);

  const ModelSpec& model() const noexcept { return *model_; }
  std::uint64_t key() const noexcept { return key_; }

  /// State of the edge {x, x + offsets()[k]}.
  bool open(const Point& x, int k) const noexcept;
  bool open(const Edge& e) const;
  int site_sign(const Point& x) const noexcept;
  double edge_uniform(const Point& base, int positive_index) const noexcept;

 private:
  const ModelSpec* model_;
  std::uint64_t key_;
  std::vector<int> pos_index_;   // per offset k: index into positive_offsets()
  std::vector<bool> forward_;    // offset k is itself positive
};

inline EdgeOracle lazy_sampler(const ModelSpec& model, std::uint64_t seed) { return EdgeOracle(model, mix64(seed)); }

/// Explicit configuration on a finite window.
struct Configuration {
  PointSet window;
  EdgeSet open_edges;
};

Configuration sample_full(const ModelSpec& model, const PointSet& window, std::uint64_t seed);

/// Oracle view of an explicit open-edge set; edges not listed are closed.
class ConfigurationOracle {
 public:
  ConfigurationOracle(const LatticeSpec& lattice, const EdgeSet& open_edges)
      : lattice_(&lattice), open_(&open_edges) {}
  bool open(const Point& x, int k) const { return open_->contains(Edge(x, x + lattice_->offsets()[static_cast<std::size_t>(k)])); }
  bool open(const Edge& e) const { return open_->contains(e); }

 private:
  const LatticeSpec* lattice_;
  const EdgeSet* open_;
};

}  // namespace percolab
