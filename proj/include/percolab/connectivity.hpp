#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "percolab/geometry.hpp"
#include "percolab/lattice.hpp"
#include "percolab/models.hpp"

namespace percolab {

struct Cluster {
  PointSet vertices;
  EdgeSet edges;
};

/// Open cluster of x using only edges with both endpoints accepted by `allowed`.
template <class Oracle, class Allowed>
Cluster cluster_of(const LatticeSpec& lattice, const Oracle& oracle, const Point& x, Allowed&& allowed) {
  Cluster c;
  c.vertices.insert(x);
  std::deque<Point> queue{x};
  const auto& offs = lattice.offsets();
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    for (int k = 0; k < static_cast<int>(offs.size()); ++k) {
      const Point q = p + offs[static_cast<std::size_t>(k)];
      if (!allowed(q) || !oracle.open(p, k)) continue;
      c.edges.emplace(p, q);
      if (c.vertices.insert(q).second) queue.push_back(q);
    }
  }
  return c;
}

Cluster cluster_of(const EdgeOracle& oracle, const Point& x, const PointSet& allowed);

enum class EventKind { Custom, Point, Q, HalfSpace, ConstrainedHalfSpace };

std::string to_string(EventKind kind);

/// Restricted connection event {source <-> target} using edges of E([medium] cap window),
/// window = Lambda_{window_radius}. In coarse mode [.] is the coarse-cell discretization;
/// otherwise lattice points are tested for membership directly.
struct EventSpec {
  EventKind kind = EventKind::Custom;
  bool coarse = true;
  Region medium = Region::full_space(1);
  int window_radius = 0;
  std::vector<Point> source;
  std::vector<Point> target;
  /// When set, the target is the inner boundary layer of [target_region] in the window.
  std::optional<Region> target_region;

  // Parameters the event was built from, kept for serialization and reporting.
  std::optional<Direction> direction;
  std::optional<Direction> cone_axis;
  double delta = 1.0;
  double scale = 0.0;  // N
  double alpha = 0.0;
};

struct EventOutcome {
  bool connected = false;
  bool truncated = false;
  std::optional<Cluster> explored;
};

/// Dense precomputation of an event over the window box; immutable and shareable.
class CompiledEvent {
 public:
  CompiledEvent(const LatticeSpec& lattice, const EventSpec& event);

  const LatticeSpec& lattice() const noexcept { return *lattice_; }
  const BoxGrid& grid() const noexcept { return grid_; }
  bool allowed(std::size_t idx) const noexcept { return allowed_[idx] != 0; }
  bool target(std::size_t idx) const noexcept { return target_[idx] != 0; }
  bool window_boundary(std::size_t idx) const noexcept { return boundary_[idx] != 0; }
  const std::vector<Point>& source() const noexcept { return source_; }
  const std::vector<std::ptrdiff_t>& deltas() const noexcept { return deltas_; }
  bool trivially_connected() const noexcept { return trivial_; }
  std::size_t allowed_count() const;
  std::vector<Point> allowed_points() const;
  std::vector<Point> target_points() const;

 private:
  const LatticeSpec* lattice_;
  BoxGrid grid_;
  std::vector<unsigned char> allowed_, target_, boundary_;
  std::vector<Point> source_;
  std::vector<std::ptrdiff_t> deltas_;
  bool trivial_ = false;
};

/// Reusable BFS scratch space; one per worker.
class Workspace {
 public:
  void prepare(std::size_t size);
  bool visit(std::size_t idx) noexcept {
    if (stamp_[idx] == epoch_) return false;
    stamp_[idx] = epoch_;
    return true;
  }
  std::vector<std::pair<std::size_t, Point>>& queue() noexcept { return queue_; }

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::pair<std::size_t, Point>> queue_;
};

template <class Oracle>
EventOutcome evaluate(const Oracle& oracle, const CompiledEvent& ev, Workspace& ws, bool keep_cluster = false) {
  EventOutcome out;
  if (keep_cluster) out.explored.emplace();
  if (ev.trivially_connected()) {
    out.connected = true;
    return out;
  }
  ws.prepare(ev.grid().size());
  auto& queue = ws.queue();
  queue.clear();
  bool touched_boundary = false;
  for (const auto& s : ev.source()) {
    const auto idx = ev.grid().index(s);
    if (ws.visit(idx)) {
      queue.emplace_back(idx, s);
      if (keep_cluster) out.explored->vertices.insert(s);
    }
  }
  const auto& offs = ev.lattice().offsets();
  const auto& deltas = ev.deltas();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [cur, p] = queue[head];
    if (ev.target(cur)) {
      out.connected = true;
      return out;
    }
    if (ev.window_boundary(cur)) touched_boundary = true;
    for (std::size_t k = 0; k < offs.size(); ++k) {
      const auto nxt = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cur) + deltas[k]);
      if (!ev.allowed(nxt)) continue;
      if (!oracle.open(p, static_cast<int>(k))) continue;
      if (keep_cluster) out.explored->edges.emplace(p, p + offs[k]);
      if (!ws.visit(nxt)) continue;
      const Point q = p + offs[k];
      if (keep_cluster) out.explored->vertices.insert(q);
      queue.emplace_back(nxt, q);
    }
  }
  out.truncated = touched_boundary;
  return out;
}

/// Validates well-posedness and evaluates once. Prefer CompiledEvent + evaluate() in loops.
EventOutcome evaluate_event(const EdgeOracle& oracle, const EventSpec& event, bool keep_cluster = false);

/// Constants shared by the event constructors.
inline constexpr double kDefaultAlpha = 4.0;

/// Q_{s',delta}(s, N): coarse connection from 0 to N s inside the cone Y_{s',delta} with the
/// half-space H_{s'}(N s) removed.
EventSpec q_event(const LatticeSpec& lattice, const Direction& cone_axis, double delta, const Direction& s,
                  double n, double alpha = kDefaultAlpha);

/// {0 <-> H_s(N s)}; constrained variant uses only edges inside H_s.
EventSpec half_space_event(const LatticeSpec& lattice, const Direction& s, double n, double alpha = kDefaultAlpha,
                           bool coarse = true);
EventSpec constrained_half_space_event(const LatticeSpec& lattice, const Direction& s, double n,
                                       double alpha = kDefaultAlpha, bool coarse = true);

/// {0 <-> round(N s)}, coarse by default.
EventSpec point_event(const LatticeSpec& lattice, const Direction& s, double n, double alpha = kDefaultAlpha,
                      bool coarse = true);

/// {0 <-> ext boundary of Lambda_n}, the subcriticality probe.
EventSpec exit_box_event(const LatticeSpec& lattice, int n);

}  // namespace percolab
