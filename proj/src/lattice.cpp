#include "percolab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "percolab/error.hpp"

namespace percolab {

namespace {

constexpr int kMaxCoarseRadius = 64;

void require_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                    std::to_string(dim));
  }
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// BFS distances from `source` restricted to grid's box; -1 marks unreachable.
std::vector<int> bfs_in_box(const LatticeSpec& spec, const BoxGrid& grid, const Point& source) {
  std::vector<int> dist(grid.size(), -1);
  std::vector<std::ptrdiff_t> deltas;
  for (const auto& g : spec.offsets()) deltas.push_back(grid.delta(g));
  std::deque<std::size_t> queue;
  const auto s = grid.index(source);
  dist[s] = 0;
  queue.push_back(s);
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    const Point p = grid.point(cur);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const Point q = p + spec.offsets()[k];
      if (!grid.in_box(q)) continue;
      const auto nxt = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cur) + deltas[k]);
      if (dist[nxt] >= 0) continue;
      dist[nxt] = dist[cur] + 1;
      queue.push_back(nxt);
    }
  }
  return dist;
}

bool box_connected(const LatticeSpec& spec, int radius) {
  const Point origin(spec.dim());
  BoxGrid grid(origin, radius, spec.linf_range());
  const auto dist = bfs_in_box(spec, grid, origin);
  for (const auto& p : box(spec.dim(), radius)) {
    if (dist[grid.index(p)] < 0) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- Point

Point::Point(int dim) : dim_(dim) { require_dim(dim); }

Point::Point(std::initializer_list<int> coords) : dim_(static_cast<int>(coords.size())) {
  require_dim(dim_);
  std::copy(coords.begin(), coords.end(), x_.begin());
}

Point Point::from(std::span<const int> coords) {
  Point p(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), p.x_.begin());
  return p;
}

Point Point::operator+(const Point& o) const {
  if (o.dim_ != dim_) throw Error(ErrorKind::DimensionMismatch, "point addition");
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r[i] += o[i];
  return r;
}

Point Point::operator-(const Point& o) const {
  if (o.dim_ != dim_) throw Error(ErrorKind::DimensionMismatch, "point subtraction");
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r[i] -= o[i];
  return r;
}

Point Point::operator-() const {
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r[i] = -r[i];
  return r;
}

Point Point::scaled(int k) const {
  Point r = *this;
  for (int i = 0; i < dim_; ++i) r[i] *= k;
  return r;
}

int Point::linf_norm() const noexcept {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(x_[i]));
  return m;
}

int Point::l1_norm() const noexcept {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m += std::abs(x_[i]);
  return m;
}

double Point::euclidean_norm() const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += double(x_[i]) * x_[i];
  return std::sqrt(s);
}

bool Point::is_zero() const noexcept {
  for (int i = 0; i < dim_; ++i)
    if (x_[i] != 0) return false;
  return true;
}

std::vector<double> Point::to_real() const {
  std::vector<double> r(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) r[i] = x_[i];
  return r;
}

std::string Point::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << x_[i];
  os << ')';
  return os.str();
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(p.dim());
  for (int i = 0; i < p.dim(); ++i)
    h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p[i])) + 0x9e3779b97f4a7c15ULL));
  return static_cast<std::size_t>(h);
}

Edge::Edge(const Point& u, const Point& v) : a(std::min(u, v)), b(std::max(u, v)) {}

std::size_t EdgeHash::operator()(const Edge& e) const noexcept {
  PointHash h;
  return static_cast<std::size_t>(mix64(h(e.a) * 31 + h(e.b)));
}

// ---------------------------------------------------------------- LatticeSpec

bool LatticeSpec::is_edge(const Point& x, const Point& y) const {
  const Point d = y - x;
  return std::binary_search(offsets_.begin(), offsets_.end(), d);
}

std::vector<Point> LatticeSpec::neighbors(const Point& x) const {
  std::vector<Point> out;
  out.reserve(offsets_.size());
  for (const auto& g : offsets_) out.push_back(x + g);
  return out;
}

LatticeSpec make_lattice_spec(int dim, std::span<const Point> offsets,
                              const LatticeOptions& options) {
  require_dim(dim);
  if (offsets.empty()) throw Error(ErrorKind::Reducible, "empty generator set");

  std::vector<Point> gens;
  for (const auto& g : offsets) {
    if (g.dim() != dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "offset " + g.str() + " does not have dimension " + std::to_string(dim));
    }
    if (g.is_zero()) throw Error(ErrorKind::DimensionMismatch, "zero offset is not an edge");
    gens.push_back(g);
  }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());

  for (const auto& g : std::vector<Point>(gens)) {
    if (!std::binary_search(gens.begin(), gens.end(), -g)) {
      if (!options.auto_symmetrize) {
        throw Error(ErrorKind::NotSymmetric, "offset " + g.str() + " lacks its negation");
      }
      gens.push_back(-g);
    }
  }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());

  LatticeSpec spec;
  spec.dim_ = dim;
  spec.offsets_ = gens;
  for (const auto& g : gens) {
    spec.range_ = std::max(spec.range_, g.euclidean_norm());
    spec.linf_range_ = std::max(spec.linf_range_, g.linf_norm());
    if (Point(dim) < g) spec.positive_.push_back(g);
  }

  // Finite certificate of irreducibility: every residue representative in {-1,0,1}^d
  // must be reachable from 0 inside a box of side 4*ceil(R)+1.
  const int ceil_r = static_cast<int>(std::ceil(spec.range_ - 1e-12));
  {
    const Point origin(dim);
    BoxGrid grid(origin, 2 * ceil_r, spec.linf_range_);
    const auto dist = bfs_in_box(spec, grid, origin);
    for (const auto& p : box(dim, 1)) {
      if (dist[grid.index(p)] < 0) {
        throw Error(ErrorKind::Reducible, "point " + p.str() + " is not reachable from the origin");
      }
    }
  }

  int r0 = std::max(1, ceil_r);
  while (r0 <= kMaxCoarseRadius && !box_connected(spec, r0)) ++r0;
  if (r0 > kMaxCoarseRadius) throw Error(ErrorKind::Reducible, "no connected box Lambda_{R_0} found");
  if (options.coarse_radius) {
    if (*options.coarse_radius < r0 || !box_connected(spec, *options.coarse_radius)) {
      throw Error(ErrorKind::Reducible, "coarse_radius override " +
                                            std::to_string(*options.coarse_radius) +
                                            " is below the minimal valid value " + std::to_string(r0));
    }
    r0 = *options.coarse_radius;
  }
  spec.coarse_radius_ = r0;

  // Distortion constant relating graph and Euclidean distance; metadata only.
  {
    const int probe = 2 * ceil_r;
    const Point origin(dim);
    BoxGrid grid(origin, 4 * probe, spec.linf_range_);
    const auto dist = bfs_in_box(spec, grid, origin);
    double c = spec.range_;
    for (const auto& v : box(dim, probe)) {
      if (v.is_zero()) continue;
      const double dv = dist[grid.index(v)];
      c = std::max(c, dv / v.euclidean_norm());
    }
    spec.c_e_ = c;
  }
  return spec;
}

LatticeSpec make_lattice_spec(int dim, std::initializer_list<Point> offsets,
                              const LatticeOptions& options) {
  std::vector<Point> v(offsets);
  return make_lattice_spec(dim, std::span<const Point>(v), options);
}

LatticeSpec nearest_neighbor_lattice(int dim) {
  std::vector<Point> gens;
  for (int i = 0; i < dim; ++i) {
    gens.push_back(unit_vector(dim, i, 1));
    gens.push_back(unit_vector(dim, i, -1));
  }
  return make_lattice_spec(dim, std::span<const Point>(gens));
}

Point unit_vector(int dim, int axis, int sign) {
  Point p(dim);
  p[axis] = sign;
  return p;
}

// ---------------------------------------------------------------- distances and sets

int graph_distance(const LatticeSpec& spec, const Point& x, const Point& y) {
  if (x.dim() != spec.dim() || y.dim() != spec.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "graph_distance");
  }
  if (x == y) return 0;
  // First pass gives an upper bound L; a shortest path never leaves the l_inf ball of
  // radius L * linf_range around x, so a second pass in that box is exact.
  int radius = (y - x).linf_norm() + 2 * spec.linf_range();
  int upper = -1;
  while (upper < 0) {
    BoxGrid grid(x, radius, spec.linf_range());
    upper = bfs_in_box(spec, grid, x)[grid.index(y)];
    radius *= 2;
  }
  BoxGrid grid(x, upper * spec.linf_range(), spec.linf_range());
  return bfs_in_box(spec, grid, x)[grid.index(y)];
}

PointSet box(int dim, int radius) { return box_at(Point(dim), radius); }

PointSet box_at(const Point& center, int radius) {
  PointSet out;
  if (radius < 0) return out;
  const int dim = center.dim();
  Point cur = center;
  for (int i = 0; i < dim; ++i) cur[i] -= radius;
  while (true) {
    out.insert(cur);
    int i = 0;
    for (; i < dim; ++i) {
      if (cur[i] < center[i] + radius) {
        ++cur[i];
        break;
      }
      cur[i] = center[i] - radius;
    }
    if (i == dim) break;
  }
  return out;
}

PointSet interior_boundary(const LatticeSpec& spec, const PointSet& a) {
  PointSet out;
  for (const auto& x : a) {
    for (const auto& g : spec.offsets()) {
      if (!a.contains(x + g)) {
        out.insert(x);
        break;
      }
    }
  }
  return out;
}

PointSet exterior_boundary(const LatticeSpec& spec, const PointSet& a) {
  PointSet out;
  for (const auto& x : a)
    for (const auto& g : spec.offsets()) {
      const Point y = x + g;
      if (!a.contains(y)) out.insert(y);
    }
  return out;
}

EdgeSet edges_within(const LatticeSpec& spec, const PointSet& a) {
  EdgeSet out;
  for (const auto& x : a)
    for (const auto& g : spec.positive_offsets()) {
      const Point y = x + g;
      if (a.contains(y)) out.emplace(x, y);
    }
  return out;
}

Point round_to_lattice(std::span<const double> x) {
  Point p(static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) p[static_cast<int>(i)] = static_cast<int>(std::floor(x[i] + 0.5));
  return p;
}

bool total_order_less(const Point& x, const Point& y) { return x < y; }

Point cell_of(const LatticeSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.dim()) throw Error(ErrorKind::DimensionMismatch, "cell_of");
  const int r0 = spec.coarse_radius();
  const double w = spec.coarse_spacing();
  Point v(spec.dim());
  for (int i = 0; i < spec.dim(); ++i)
    v[i] = static_cast<int>(w * std::floor((x[static_cast<std::size_t>(i)] + r0 + 0.5) / w));
  return v;
}

Point cell_of(const LatticeSpec& spec, const Point& x) {
  const auto r = x.to_real();
  return cell_of(spec, std::span<const double>(r));
}

// ---------------------------------------------------------------- BoxGrid

BoxGrid::BoxGrid(const Point& center, int radius, int pad)
    : center_(center), radius_(radius), pad_(pad), side_(2 * (radius + pad) + 1) {
  std::ptrdiff_t s = 1;
  for (int i = 0; i < center.dim(); ++i) {
    stride_[static_cast<std::size_t>(i)] = s;
    s *= side_;
  }
  size_ = static_cast<std::size_t>(s);
}

bool BoxGrid::in_box(const Point& p) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (std::abs(p[i] - center_[i]) > radius_) return false;
  return true;
}

bool BoxGrid::in_padded(const Point& p) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (std::abs(p[i] - center_[i]) > radius_ + pad_) return false;
  return true;
}

std::size_t BoxGrid::index(const Point& p) const noexcept {
  std::ptrdiff_t idx = 0;
  for (int i = 0; i < dim(); ++i)
    idx += (p[i] - center_[i] + radius_ + pad_) * stride_[static_cast<std::size_t>(i)];
  return static_cast<std::size_t>(idx);
}

Point BoxGrid::point(std::size_t idx) const {
  Point p(dim());
  auto rem = static_cast<std::ptrdiff_t>(idx);
  for (int i = 0; i < dim(); ++i) {
    p[i] = static_cast<int>(rem % side_) - radius_ - pad_ + center_[i];
    rem /= side_;
  }
  return p;
}

std::ptrdiff_t BoxGrid::delta(const Point& offset) const noexcept {
  std::ptrdiff_t d = 0;
  for (int i = 0; i < dim(); ++i) d += offset[i] * stride_[static_cast<std::size_t>(i)];
  return d;
}

}  // namespace percolab
