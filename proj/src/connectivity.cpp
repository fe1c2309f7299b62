#include "percolab/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "percolab/error.hpp"

namespace percolab {

Cluster cluster_of(const EdgeOracle& oracle, const Point& x, const PointSet& allowed) {
  if (!allowed.contains(x)) throw Error(ErrorKind::IllPosedEvent, "cluster seed " + x.str() + " is not allowed");
  return cluster_of(oracle.model().lattice, oracle, x, [&](const Point& q) { return allowed.contains(q); });
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Custom: return "custom";
    case EventKind::Point: return "point";
    case EventKind::Q: return "q";
    case EventKind::HalfSpace: return "halfspace";
    case EventKind::ConstrainedHalfSpace: return "halfspace-constrained";
  }
  return "custom";
}

// ---------------------------------------------------------------- CompiledEvent

CompiledEvent::CompiledEvent(const LatticeSpec& lattice, const EventSpec& event)
    : lattice_(&lattice), grid_(Point(lattice.dim()), event.window_radius, lattice.linf_range()) {
  if (event.medium.dim() != lattice.dim()) throw Error(ErrorKind::DimensionMismatch, "event medium dimension");
  const int r0 = lattice.coarse_radius();
  allowed_ = discretize_mask(event.medium, grid_, r0, event.coarse);
  boundary_.assign(grid_.size(), 0);
  target_.assign(grid_.size(), 0);
  for (const auto& g : lattice.offsets()) deltas_.push_back(grid_.delta(g));

  const PointSet window = box(lattice.dim(), event.window_radius);
  for (const auto& z : window) {
    for (const auto& g : lattice.offsets()) {
      if (!grid_.in_box(z + g)) {
        boundary_[grid_.index(z)] = 1;
        break;
      }
    }
  }

  if (event.target_region) {
    const Region& region = *event.target_region;
    std::unordered_map<Point, bool, PointHash> cell_cache;
    auto member = [&](const Point& z) {
      if (!event.coarse) return contains(region, z);
      const Point v = cell_of(lattice, z);
      auto it = cell_cache.find(v);
      if (it == cell_cache.end()) it = cell_cache.emplace(v, cell_intersects(region, v, r0)).first;
      return it->second;
    };
    for (const auto& z : window) {
      if (!member(z)) continue;
      for (const auto& g : lattice.offsets()) {
        if (!member(z + g)) {
          target_[grid_.index(z)] = 1;
          break;
        }
      }
    }
  }
  for (const auto& t : event.target)
    if (grid_.in_box(t)) target_[grid_.index(t)] = 1;

  if (event.source.empty()) throw Error(ErrorKind::IllPosedEvent, "empty source set");
  for (const auto& s : event.source) {
    if (s.dim() != lattice.dim()) throw Error(ErrorKind::DimensionMismatch, "source point dimension");
    if (!grid_.in_box(s)) throw Error(ErrorKind::IllPosedEvent, "source " + s.str() + " lies outside the window");
    if (!allowed_[grid_.index(s)]) throw Error(ErrorKind::IllPosedEvent, "source " + s.str() + " lies outside the medium");
    if (target_[grid_.index(s)]) trivial_ = true;
    source_.push_back(s);
  }
  std::sort(source_.begin(), source_.end());
}

std::size_t CompiledEvent::allowed_count() const {
  return static_cast<std::size_t>(std::count(allowed_.begin(), allowed_.end(), 1));
}

std::vector<Point> CompiledEvent::allowed_points() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < allowed_.size(); ++i)
    if (allowed_[i]) out.push_back(grid_.point(i));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Point> CompiledEvent::target_points() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < target_.size(); ++i)
    if (target_[i]) out.push_back(grid_.point(i));
  std::sort(out.begin(), out.end());
  return out;
}

void Workspace::prepare(std::size_t size) {
  if (stamp_.size() != size) {
    stamp_.assign(size, 0);
    epoch_ = 0;
  }
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
}

EventOutcome evaluate_event(const EdgeOracle& oracle, const EventSpec& event, bool keep_cluster) {
  const CompiledEvent compiled(oracle.model().lattice, event);
  Workspace ws;
  return evaluate(oracle, compiled, ws, keep_cluster);
}

// ---------------------------------------------------------------- event families

namespace {

std::vector<Point> cell_points(const LatticeSpec& lattice, const Point& v) {
  const PointSet s = box_at(v, lattice.coarse_radius());
  std::vector<Point> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

Point scaled_round(const Direction& s, double n) {
  const Vec x = s.scaled(n);
  return round_to_lattice(x);
}

int window_for(double alpha, double n) { return static_cast<int>(std::ceil(alpha * n - 1e-9)); }

void fill_point_endpoints(const LatticeSpec& lattice, EventSpec& ev, const Point& y, bool coarse) {
  const Point origin(lattice.dim());
  if (coarse) {
    const Point vt = cell_of(lattice, y);
    ev.source = cell_points(lattice, origin);
    ev.target = cell_points(lattice, vt);
    ev.window_radius = std::max(ev.window_radius, vt.linf_norm() + lattice.coarse_radius());
  } else {
    ev.source = {origin};
    ev.target = {y};
    ev.window_radius = std::max(ev.window_radius, y.linf_norm());
  }
}

void check_direction(const LatticeSpec& lattice, const Direction& s) {
  if (s.dim() != lattice.dim()) throw Error(ErrorKind::DimensionMismatch, "direction dimension");
}

}  // namespace

EventSpec point_event(const LatticeSpec& lattice, const Direction& s, double n, double alpha, bool coarse) {
  check_direction(lattice, s);
  if (!(n >= 0.0)) throw Error(ErrorKind::IllPosedEvent, "N must be nonnegative");
  EventSpec ev;
  ev.kind = EventKind::Point;
  ev.coarse = coarse;
  ev.medium = Region::full_space(lattice.dim());
  ev.window_radius = window_for(alpha, n);
  ev.direction = s;
  ev.scale = n;
  ev.alpha = alpha;
  fill_point_endpoints(lattice, ev, scaled_round(s, n), coarse);
  return ev;
}

EventSpec q_event(const LatticeSpec& lattice, const Direction& cone_axis, double delta, const Direction& s, double n,
                  double alpha) {
  check_direction(lattice, s);
  check_direction(lattice, cone_axis);
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorKind::InvalidAperture, "delta must lie in (0, 1]");
  if (!(dot(s.vec(), cone_axis.vec()) > 1.0 - delta)) {
    throw Error(ErrorKind::DirectionOutsideCone, "direction is not interior to the cone");
  }
  if (!(n > 0.0)) throw Error(ErrorKind::IllPosedEvent, "N must be positive");
  const Vec origin(static_cast<std::size_t>(lattice.dim()), 0.0);
  EventSpec ev;
  ev.kind = EventKind::Q;
  ev.coarse = true;
  ev.medium = Region::difference(Region::cone(cone_axis, delta, origin), Region::half_space(cone_axis, s.scaled(n)));
  ev.window_radius = window_for(alpha, n);
  ev.direction = s;
  ev.cone_axis = cone_axis;
  ev.delta = delta;
  ev.scale = n;
  ev.alpha = alpha;
  fill_point_endpoints(lattice, ev, scaled_round(s, n), true);
  return ev;
}

namespace {

EventSpec half_space_common(const LatticeSpec& lattice, const Direction& s, double n, double alpha, bool coarse,
                            bool constrained) {
  check_direction(lattice, s);
  if (!(n > 0.0)) throw Error(ErrorKind::IllPosedEvent, "N must be positive");
  if (!(alpha >= 2.0)) throw Error(ErrorKind::IllPosedEvent, "alpha must be at least 2");
  const Vec origin(static_cast<std::size_t>(lattice.dim()), 0.0);
  EventSpec ev;
  ev.kind = constrained ? EventKind::ConstrainedHalfSpace : EventKind::HalfSpace;
  ev.coarse = coarse;
  ev.medium = constrained ? Region::half_space(s, origin) : Region::full_space(lattice.dim());
  ev.window_radius = std::max(window_for(alpha, n), coarse ? lattice.coarse_radius() : 0);
  ev.target_region = Region::half_space(s, s.scaled(n));
  ev.direction = s;
  ev.scale = n;
  ev.alpha = alpha;
  const Point o(lattice.dim());
  ev.source = coarse ? cell_points(lattice, o) : std::vector<Point>{o};
  return ev;
}

}  // namespace

EventSpec half_space_event(const LatticeSpec& lattice, const Direction& s, double n, double alpha, bool coarse) {
  return half_space_common(lattice, s, n, alpha, coarse, false);
}

EventSpec constrained_half_space_event(const LatticeSpec& lattice, const Direction& s, double n, double alpha,
                                       bool coarse) {
  return half_space_common(lattice, s, n, alpha, coarse, true);
}

EventSpec exit_box_event(const LatticeSpec& lattice, int n) {
  EventSpec ev;
  ev.kind = EventKind::Custom;
  ev.coarse = false;
  ev.medium = Region::full_space(lattice.dim());
  ev.window_radius = n + lattice.linf_range();
  ev.source = {Point(lattice.dim())};
  const PointSet inner = box(lattice.dim(), n);
  for (const auto& z : box(lattice.dim(), ev.window_radius))
    if (!inner.contains(z)) ev.target.push_back(z);
  std::sort(ev.target.begin(), ev.target.end());
  ev.scale = n;
  return ev;
}

}  // namespace percolab
