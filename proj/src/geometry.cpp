#include "percolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "percolab/error.hpp"

namespace percolab {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vec axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  Vec r(y.begin(), y.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
  return r;
}

// ---------------------------------------------------------------- Direction

Direction::Direction(Vec v) : v_(std::move(v)) {
  if (v_.empty() || static_cast<int>(v_.size()) > kMaxDim) {
    throw Error(ErrorKind::DimensionMismatch, "direction dimension");
  }
  if (std::abs(norm(v_) - 1.0) > 1e-12) {
    throw Error(ErrorKind::DimensionMismatch, "direction is not a unit vector");
  }
}

Direction Direction::normalized(Vec v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::DimensionMismatch, "cannot normalize zero vector");
  for (auto& x : v) x /= n;
  return Direction(std::move(v));
}

Direction Direction::from_angle(double theta) { return Direction::normalized({std::cos(theta), std::sin(theta)}); }

Direction Direction::axis(int dim, int axis, int sign) {
  Vec v(static_cast<std::size_t>(dim), 0.0);
  v[static_cast<std::size_t>(axis)] = sign >= 0 ? 1.0 : -1.0;
  return Direction(std::move(v));
}

double Direction::angle() const {
  if (dim() != 2) throw Error(ErrorKind::DimensionMismatch, "angle() needs d = 2");
  return std::atan2(v_[1], v_[0]);
}

Direction Direction::operator-() const {
  Vec v = v_;
  for (auto& x : v) x = -x;
  return Direction(std::move(v));
}

Vec Direction::scaled(double t) const {
  Vec v = v_;
  for (auto& x : v) x *= t;
  return v;
}

// ---------------------------------------------------------------- Region

namespace {

void check_dim(int a, std::size_t b, const char* what) {
  if (static_cast<std::size_t>(a) != b) throw Error(ErrorKind::DimensionMismatch, what);
}

}  // namespace

Region Region::full_space(int dim) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::FullSpace;
  n->dim = dim;
  return Region(std::move(n));
}

Region Region::half_space(const Direction& s, Vec anchor) {
  check_dim(s.dim(), anchor.size(), "half_space anchor");
  auto n = std::make_shared<Node>();
  n->kind = Kind::HalfSpace;
  n->dim = s.dim();
  n->direction = s.vec();
  n->anchor = std::move(anchor);
  return Region(std::move(n));
}

Region Region::cone(const Direction& s, double delta, Vec apex) {
  check_dim(s.dim(), apex.size(), "cone apex");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error(ErrorKind::InvalidAperture, "cone aperture must lie in [0, 1]");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cone;
  n->dim = s.dim();
  n->direction = s.vec();
  n->anchor = std::move(apex);
  n->delta = delta;
  return Region(std::move(n));
}

Region Region::truncated_cone(const Direction& s, double delta, double cutoff, Vec apex) {
  check_dim(s.dim(), apex.size(), "truncated cone apex");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error(ErrorKind::InvalidAperture, "cone aperture must lie in [0, 1]");
  if (!(cutoff > 0.0)) throw Error(ErrorKind::InvalidAperture, "truncation cutoff must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::TruncatedCone;
  n->dim = s.dim();
  n->direction = s.vec();
  n->anchor = std::move(apex);
  n->delta = delta;
  n->cutoff = cutoff;
  return Region(std::move(n));
}

Region Region::box(Vec center, double radius) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Box;
  n->dim = static_cast<int>(center.size());
  n->anchor = std::move(center);
  n->radius = radius;
  return Region(std::move(n));
}

Region Region::intersection(std::vector<Region> parts) {
  if (parts.empty()) throw Error(ErrorKind::DimensionMismatch, "empty intersection has no dimension");
  const int d = parts.front().dim();
  for (const auto& p : parts) check_dim(d, static_cast<std::size_t>(p.dim()), "intersection operand");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Intersection;
  n->dim = d;
  n->children = std::move(parts);
  return Region(std::move(n));
}

Region Region::difference(Region left, Region right) {
  check_dim(left.dim(), static_cast<std::size_t>(right.dim()), "difference operand");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Difference;
  n->dim = left.dim();
  n->children = {std::move(left), std::move(right)};
  return Region(std::move(n));
}

Region Region::complement(Region inner) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Complement;
  n->dim = inner.dim();
  n->children = {std::move(inner)};
  return Region(std::move(n));
}

Region Region::translated(std::span<const double> v) const {
  check_dim(dim(), v.size(), "translation");
  auto n = std::make_shared<Node>(*node_);
  if (!n->anchor.empty()) n->anchor = axpy(1.0, v, n->anchor);
  for (auto& c : n->children) c = c.translated(v);
  return Region(std::move(n));
}

namespace {

double cone_slack(std::span<const double> s, std::span<const double> apex, double delta,
                  std::span<const double> y) {
  double along = 0.0, len2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - apex[i];
    along += d * s[i];
    len2 += d * d;
  }
  return along - (1.0 - delta) * std::sqrt(len2);
}

double half_space_slack(std::span<const double> s, std::span<const double> anchor, std::span<const double> y) {
  double v = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) v += (y[i] - anchor[i]) * s[i];
  return v;
}

}  // namespace

double Region::slack(std::span<const double> y) const {
  check_dim(dim(), y.size(), "region membership");
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::FullSpace:
      return std::numeric_limits<double>::infinity();
    case Kind::HalfSpace:
      return half_space_slack(n.direction, n.anchor, y);
    case Kind::Cone:
      return cone_slack(n.direction, n.anchor, n.delta, y);
    case Kind::TruncatedCone: {
      const Vec cut = axpy(n.cutoff, n.direction, n.anchor);
      return std::min(cone_slack(n.direction, n.anchor, n.delta, y), -half_space_slack(n.direction, cut, y));
    }
    case Kind::Box: {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < y.size(); ++i) m = std::min(m, n.radius - std::abs(y[i] - n.anchor[i]));
      return m;
    }
    case Kind::Intersection: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) m = std::min(m, c.slack(y));
      return m;
    }
    case Kind::Difference:
      return std::min(n.children[0].slack(y), -n.children[1].slack(y));
    case Kind::Complement:
      return -n.children[0].slack(y);
  }
  return 0.0;
}

bool contains(const Region& region, std::span<const double> y) { return region.slack(y) >= -kBoundaryTol; }

bool contains(const Region& region, const Point& y) {
  const auto r = y.to_real();
  return contains(region, std::span<const double>(r));
}

// ---------------------------------------------------------------- discretization

namespace {

// a . y >= b
struct Linear {
  Vec a;
  double b;
};

// { y : <y - apex, s> >= (1 - delta) |y - apex| }
struct ConeAtom {
  Vec s;
  Vec apex;
  double delta;
};

struct Piece {
  std::vector<Linear> lin;
  std::vector<ConeAtom> cones;
};

using Dnf = std::vector<Piece>;  // union of convex pieces; {} is empty, {Piece{}} is everything

Linear negate(const Linear& l) {
  Vec a = l.a;
  for (auto& x : a) x = -x;
  return {std::move(a), -l.b};
}

// Rotate a 2-vector by angle t.
Vec rotate2(std::span<const double> v, double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

// Polyhedral description of a cone in d <= 2 as a conjunction of half-spaces.
std::vector<Linear> cone_linear(std::span<const double> s, std::span<const double> apex, double delta) {
  std::vector<Linear> out;
  auto add = [&](Vec a) {
    const double b = dot(a, apex);
    out.push_back({std::move(a), b});
  };
  add(Vec(s.begin(), s.end()));
  if (s.size() == 2) {
    const double phi = std::acos(std::clamp(1.0 - delta, -1.0, 1.0));
    const double pi2 = std::numbers::pi / 2;
    add(rotate2(s, phi - pi2));
    add(rotate2(s, pi2 - phi));
  }
  return out;
}

Dnf product(const Dnf& x, const Dnf& y) {
  Dnf out;
  for (const auto& p : x)
    for (const auto& q : y) {
      Piece r = p;
      r.lin.insert(r.lin.end(), q.lin.begin(), q.lin.end());
      r.cones.insert(r.cones.end(), q.cones.begin(), q.cones.end());
      out.push_back(std::move(r));
    }
  return out;
}

Dnf union_of(Dnf x, const Dnf& y) {
  x.insert(x.end(), y.begin(), y.end());
  return x;
}

Dnf single_linear(Linear l) { return {Piece{{std::move(l)}, {}}}; }

Dnf to_dnf(const Region& region, bool negated);

Dnf cone_dnf(std::span<const double> s, std::span<const double> apex, double delta, bool negated) {
  if (s.size() <= 2) {
    auto lin = cone_linear(s, apex, delta);
    if (!negated) return {Piece{std::move(lin), {}}};
    Dnf out;
    for (const auto& l : lin) out.push_back(Piece{{negate(l)}, {}});
    return out;
  }
  if (negated) throw Error(ErrorKind::Unsupported, "discretizing the complement of a cone needs d <= 2");
  return {Piece{{}, {ConeAtom{Vec(s.begin(), s.end()), Vec(apex.begin(), apex.end()), delta}}}};
}

Dnf to_dnf(const Region& region, bool negated) {
  const auto& n = region.node();
  switch (n.kind) {
    case Region::Kind::FullSpace:
      return negated ? Dnf{} : Dnf{Piece{}};
    case Region::Kind::HalfSpace: {
      Linear l{n.direction, dot(n.direction, n.anchor)};
      return single_linear(negated ? negate(l) : l);
    }
    case Region::Kind::Cone:
      return cone_dnf(n.direction, n.anchor, n.delta, negated);
    case Region::Kind::TruncatedCone: {
      const Vec cut = axpy(n.cutoff, n.direction, n.anchor);
      Linear below = negate(Linear{n.direction, dot(n.direction, cut)});
      if (!negated) return product(cone_dnf(n.direction, n.anchor, n.delta, false), single_linear(below));
      return union_of(cone_dnf(n.direction, n.anchor, n.delta, true), single_linear(negate(below)));
    }
    case Region::Kind::Box: {
      std::vector<Linear> faces;
      for (int i = 0; i < n.dim; ++i) {
        Vec e(static_cast<std::size_t>(n.dim), 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        faces.push_back({e, n.anchor[static_cast<std::size_t>(i)] - n.radius});
        e[static_cast<std::size_t>(i)] = -1.0;
        faces.push_back({e, -n.anchor[static_cast<std::size_t>(i)] - n.radius});
      }
      if (!negated) return {Piece{std::move(faces), {}}};
      Dnf out;
      for (const auto& f : faces) out.push_back(Piece{{negate(f)}, {}});
      return out;
    }
    case Region::Kind::Intersection: {
      if (negated) {
        Dnf out;
        for (const auto& c : n.children) out = union_of(std::move(out), to_dnf(c, true));
        return out;
      }
      Dnf out{Piece{}};
      for (const auto& c : n.children) out = product(out, to_dnf(c, false));
      return out;
    }
    case Region::Kind::Difference:
      if (negated) return union_of(to_dnf(n.children[0], true), to_dnf(n.children[1], false));
      return product(to_dnf(n.children[0], false), to_dnf(n.children[1], true));
    case Region::Kind::Complement:
      return to_dnf(n.children[0], !negated);
  }
  return {};
}

// Fourier-Motzkin feasibility of { y : a_k . y >= b_k } with each constraint relaxed by
// kBoundaryTol in Euclidean distance.
bool linear_feasible(std::vector<Linear> rows, int dim) {
  for (auto& r : rows) r.b -= kBoundaryTol * norm(r.a);
  for (int k = dim - 1; k >= 0; --k) {
    std::vector<Linear> pos, neg, keep;
    for (auto& r : rows) {
      const double c = r.a[static_cast<std::size_t>(k)];
      if (c > 1e-14) pos.push_back(std::move(r));
      else if (c < -1e-14) neg.push_back(std::move(r));
      else keep.push_back(std::move(r));
    }
    for (const auto& p : pos)
      for (const auto& q : neg) {
        const double cp = p.a[static_cast<std::size_t>(k)];
        const double cq = -q.a[static_cast<std::size_t>(k)];
        Linear l{Vec(static_cast<std::size_t>(dim), 0.0), p.b / cp + q.b / cq};
        for (int j = 0; j < dim; ++j) {
          if (j == k) continue;
          const auto jj = static_cast<std::size_t>(j);
          l.a[jj] = p.a[jj] / cp + q.a[jj] / cq;
        }
        keep.push_back(std::move(l));
      }
    rows = std::move(keep);
  }
  for (const auto& r : rows)
    if (r.b > 1e-12) return false;
  return true;
}

void project_cone(Vec& y, const ConeAtom& c) {
  const std::size_t d = y.size();
  Vec rel(d);
  for (std::size_t i = 0; i < d; ++i) rel[i] = y[i] - c.apex[i];
  const double t = dot(rel, c.s);
  Vec w = axpy(-t, c.s, rel);
  const double r = norm(w);
  const double cos_a = std::clamp(1.0 - c.delta, 0.0, 1.0);
  const double sin_a = std::sqrt(1.0 - cos_a * cos_a);
  if (t >= cos_a * std::sqrt(t * t + r * r)) return;
  Vec u = c.s;
  for (auto& x : u) x *= cos_a;
  if (r > 0) {
    for (std::size_t i = 0; i < d; ++i) u[i] += sin_a * w[i] / r;
  }
  const double proj = std::max(0.0, dot(rel, u));
  for (std::size_t i = 0; i < d; ++i) y[i] = c.apex[i] + proj * u[i];
}

void project_linear(Vec& y, const Linear& l) {
  const double v = dot(l.a, y) - l.b;
  if (v >= 0) return;
  const double nn = dot(l.a, l.a);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= v * l.a[i] / nn;
}

// Dykstra alternating projections for pieces with curved cone atoms (d >= 3).
bool convex_feasible(const Piece& piece, std::span<const double> lo, std::span<const double> hi) {
  const std::size_t d = lo.size();
  Vec y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = 0.5 * (lo[i] + hi[i]);
  const std::size_t nsets = 1 + piece.lin.size() + piece.cones.size();
  std::vector<Vec> incr(nsets, Vec(d, 0.0));
  for (int it = 0; it < 4000; ++it) {
    for (std::size_t k = 0; k < nsets; ++k) {
      Vec z(d);
      for (std::size_t i = 0; i < d; ++i) z[i] = y[i] + incr[k][i];
      Vec p = z;
      if (k == 0) {
        for (std::size_t i = 0; i < d; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
      } else if (k <= piece.lin.size()) {
        project_linear(p, piece.lin[k - 1]);
      } else {
        project_cone(p, piece.cones[k - 1 - piece.lin.size()]);
      }
      for (std::size_t i = 0; i < d; ++i) incr[k][i] = z[i] - p[i];
      y = std::move(p);
    }
  }
  constexpr double tol = 1e-7;
  for (std::size_t i = 0; i < d; ++i)
    if (y[i] < lo[i] - tol || y[i] > hi[i] + tol) return false;
  for (const auto& l : piece.lin)
    if (dot(l.a, y) - l.b < -tol * norm(l.a)) return false;
  for (const auto& c : piece.cones)
    if (cone_slack(c.s, c.apex, c.delta, y) < -tol) return false;
  return true;
}

bool piece_meets_box(const Piece& piece, std::span<const double> lo, std::span<const double> hi) {
  const int d = static_cast<int>(lo.size());
  if (piece.cones.empty()) {
    std::vector<Linear> rows = piece.lin;
    for (int i = 0; i < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      Vec e(lo.size(), 0.0);
      e[ii] = 1.0;
      rows.push_back({e, lo[ii]});
      e[ii] = -1.0;
      rows.push_back({e, -hi[ii]});
    }
    return linear_feasible(std::move(rows), d);
  }
  return convex_feasible(piece, lo, hi);
}

bool dnf_meets_box(const Dnf& dnf, std::span<const double> lo, std::span<const double> hi) {
  for (const auto& p : dnf)
    if (piece_meets_box(p, lo, hi)) return true;
  return false;
}

bool dnf_cell(const Dnf& dnf, const Point& v, int r0) {
  Vec lo(static_cast<std::size_t>(v.dim())), hi(lo.size());
  for (int i = 0; i < v.dim(); ++i) {
    lo[static_cast<std::size_t>(i)] = v[i] - r0 - 0.5;
    hi[static_cast<std::size_t>(i)] = v[i] + r0 + 0.5;
  }
  return dnf_meets_box(dnf, lo, hi);
}

Point cell_center(const Point& z, int r0) {
  const int w = 2 * r0 + 1;
  Point v(z.dim());
  for (int i = 0; i < z.dim(); ++i) {
    const int shifted = z[i] + r0;
    const int q = (shifted >= 0) ? shifted / w : -((-shifted + w - 1) / w);
    v[i] = q * w;
  }
  return v;
}

}  // namespace

bool box_intersects(const Region& region, std::span<const double> lo, std::span<const double> hi) {
  check_dim(region.dim(), lo.size(), "box_intersects");
  return dnf_meets_box(to_dnf(region, false), lo, hi);
}

bool cell_intersects(const Region& region, const Point& v, int coarse_radius) {
  check_dim(region.dim(), static_cast<std::size_t>(v.dim()), "cell_intersects");
  return dnf_cell(to_dnf(region, false), v, coarse_radius);
}

PointSet discretize(const Region& region, const PointSet& window, int coarse_radius) {
  const Dnf dnf = to_dnf(region, false);
  std::unordered_map<Point, bool, PointHash> cache;
  PointSet out;
  for (const auto& z : window) {
    check_dim(region.dim(), static_cast<std::size_t>(z.dim()), "discretize window");
    const Point v = cell_center(z, coarse_radius);
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, dnf_cell(dnf, v, coarse_radius)).first;
    if (it->second) out.insert(z);
  }
  return out;
}

std::vector<unsigned char> discretize_mask(const Region& region, const BoxGrid& grid, int coarse_radius,
                                           bool coarse) {
  check_dim(region.dim(), static_cast<std::size_t>(grid.dim()), "discretize_mask");
  std::vector<unsigned char> mask(grid.size(), 0);
  const Dnf dnf = to_dnf(region, false);
  std::unordered_map<Point, bool, PointHash> cache;
  for (const auto& z : box_at(grid.center(), grid.radius())) {
    bool inside;
    if (coarse) {
      const Point v = cell_center(z, coarse_radius);
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, dnf_cell(dnf, v, coarse_radius)).first;
      inside = it->second;
    } else {
      inside = contains(region, z);
    }
    mask[grid.index(z)] = inside ? 1 : 0;
  }
  return mask;
}

// ---------------------------------------------------------------- cone covers

namespace {

// Orthonormal completion of `first` by Gram-Schmidt against the standard basis.
std::vector<Vec> orthonormal_basis(const Vec& first) {
  const std::size_t d = first.size();
  std::vector<Vec> basis{first};
  for (std::size_t k = 0; k < d && basis.size() < d; ++k) {
    Vec e(d, 0.0);
    e[k] = 1.0;
    for (const auto& b : basis) e = axpy(-dot(e, b), b, e);
    const double n = norm(e);
    if (n < 1e-8) continue;
    for (auto& x : e) x /= n;
    basis.push_back(std::move(e));
  }
  return basis;
}

// Unit vectors in span(basis) covering that sphere within angle rho.
std::vector<Vec> cover_sphere(std::span<const Vec> basis, double rho) {
  const std::size_t d = basis.front().size();
  std::vector<Vec> out;
  if (basis.size() == 1) {
    Vec m = basis[0];
    for (auto& x : m) x = -x;
    return {basis[0], m};
  }
  if (basis.size() == 2) {
    const int n = std::max(3, static_cast<int>(std::ceil(2 * std::numbers::pi / rho)));
    for (int i = 0; i < n; ++i) {
      const double t = 2 * std::numbers::pi * i / n;
      Vec v(d, 0.0);
      v = axpy(std::cos(t), basis[0], v);
      v = axpy(std::sin(t), basis[1], v);
      out.push_back(std::move(v));
    }
    return out;
  }
  // Polar angle about basis[0] at spacing rho/2, each ring covered within rho/2.
  const int rings = std::max(1, static_cast<int>(std::ceil(std::numbers::pi / (rho / 2))));
  for (int j = 0; j <= rings; ++j) {
    const double psi = std::numbers::pi * j / rings;
    const double s = std::sin(psi);
    Vec axis_part = basis[0];
    for (auto& x : axis_part) x *= std::cos(psi);
    if (s < 1e-12) {
      out.push_back(axis_part);
      continue;
    }
    const double reach = std::min(std::numbers::pi, (rho / 2) / std::min(1.0, s + rho / 4));
    for (const auto& w : cover_sphere(basis.subspan(1), reach)) out.push_back(axpy(s, w, axis_part));
  }
  return out;
}

}  // namespace

std::vector<Direction> cone_cover_directions(const Direction& s_star, double delta, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0) || !(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorKind::InvalidAperture, "apertures must lie in (0, 1]");
  }
  if (epsilon >= delta || s_star.dim() == 1) return {s_star};
  const double phi_delta = std::acos(1.0 - delta);
  const double phi_eps = std::acos(1.0 - epsilon);
  std::vector<Direction> out;
  if (s_star.dim() == 2) {
    const int n = static_cast<int>(std::ceil(2 * phi_delta / phi_eps)) + 1;
    const double base = s_star.angle();
    for (int i = 0; i < n; ++i) {
      const double t = base - phi_delta + 2 * phi_delta * i / (n - 1);
      out.push_back(Direction::from_angle(t));
    }
    return out;
  }
  // d >= 3: rings of polar angle theta about s_star at spacing phi_eps/2, each ring's
  // (d-2)-sphere of transverse directions covered within phi_eps/2 in true angle.
  const auto basis = orthonormal_basis(s_star.vec());
  const double h = phi_eps / 2;
  const int rings = static_cast<int>(std::ceil(phi_delta / h));
  for (int j = 0; j <= rings; ++j) {
    const double theta = std::min(phi_delta, j * h);
    if (theta < 1e-12) {
      out.push_back(s_star);
      continue;
    }
    const double reach = std::min(std::numbers::pi, (phi_eps / 2) / std::min(1.0, std::sin(std::min(theta + h / 2, std::numbers::pi / 2))));
    for (const auto& w : cover_sphere(std::span<const Vec>(basis).subspan(1), reach)) {
      Vec v = s_star.scaled(std::cos(theta));
      v = axpy(std::sin(theta), w, v);
      out.push_back(Direction::normalized(std::move(v)));
    }
  }
  return out;
}

}  // namespace percolab
