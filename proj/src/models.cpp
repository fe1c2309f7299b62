#include "percolab/models.hpp"

#include <algorithm>
#include <sstream>

#include "percolab/error.hpp"

namespace percolab {

namespace {

constexpr std::uint64_t kSiteSalt = 0x517e5a17c0ffee01ULL;
constexpr std::uint64_t kEdgeSalt = 0xed6e5a1700000000ULL;

std::uint64_t hash_point(std::uint64_t h, const Point& x) noexcept {
  for (int i = 0; i < x.dim(); ++i)
    h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x[i])) + 0x9e3779b97f4a7c15ULL * (i + 1)));
  return h;
}

double to_unit(std::uint64_t h) noexcept { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index ^ 0xa5a5a5a5a5a5a5a5ULL));
}

double ModelSpec::theta() const { return insertion_tolerance_bound(*this); }

double ModelSpec::dependence_range() const { return kind == ModelKind::Bernoulli ? 0.0 : lattice.range(); }

std::string ModelSpec::describe() const {
  std::ostringstream os;
  if (kind == ModelKind::Bernoulli) os << "bernoulli(p=" << p << ")";
  else os << "site-modulated(p=" << p << ", eps=" << epsilon << ")";
  os << " d=" << lattice.dim();
  return os.str();
}

ModelSpec make_bernoulli(LatticeSpec lattice, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::ConfigInvalid, "p must lie in (0, 1)");
  return ModelSpec{std::move(lattice), ModelKind::Bernoulli, p, 0.0};
}

ModelSpec make_site_modulated(LatticeSpec lattice, double p, double epsilon) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::ConfigInvalid, "p must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw Error(ErrorKind::ConfigInvalid, "epsilon must lie in [0, 1)");
  if (!(p * (1.0 + epsilon) < 1.0)) throw Error(ErrorKind::ConfigInvalid, "p (1 + epsilon) must be below 1");
  return ModelSpec{std::move(lattice), ModelKind::SiteModulated, p, epsilon};
}

double insertion_tolerance_bound(const ModelSpec& model) {
  return model.kind == ModelKind::Bernoulli ? model.p : model.p * (1.0 - model.epsilon);
}

EdgeOracle::EdgeOracle(const ModelSpec& model, std::uint64_t key) : model_(&model), key_(key) {
  const auto& offs = model.lattice.offsets();
  const auto& pos = model.lattice.positive_offsets();
  for (const auto& g : offs) {
    const bool fwd = Point(g.dim()) < g;
    const Point canon = fwd ? g : -g;
    const auto it = std::lower_bound(pos.begin(), pos.end(), canon);
    pos_index_.push_back(static_cast<int>(it - pos.begin()));
    forward_.push_back(fwd);
  }
}

double EdgeOracle::edge_uniform(const Point& base, int positive_index) const noexcept {
  const std::uint64_t h = hash_point(key_ ^ kEdgeSalt, base);
  return to_unit(mix64(h ^ static_cast<std::uint64_t>(positive_index)));
}

int EdgeOracle::site_sign(const Point& x) const noexcept {
  return (hash_point(key_ ^ kSiteSalt, x) & 1U) ? 1 : -1;
}

bool EdgeOracle::open(const Point& x, int k) const noexcept {
  const auto kk = static_cast<std::size_t>(k);
  const Point& g = model_->lattice.offsets()[kk];
  const Point base = forward_[kk] ? x : x + g;
  const double u = edge_uniform(base, pos_index_[kk]);
  if (model_->kind == ModelKind::Bernoulli) return u < model_->p;
  const int s = site_sign(x) * site_sign(x + g);
  return u < model_->p * (1.0 + model_->epsilon * s);
}

bool EdgeOracle::open(const Edge& e) const {
  const auto& offs = model_->lattice.offsets();
  const Point d = e.b - e.a;
  const auto it = std::lower_bound(offs.begin(), offs.end(), d);
  if (it == offs.end() || *it != d) throw Error(ErrorKind::DimensionMismatch, "not an edge of the lattice");
  return open(e.a, static_cast<int>(it - offs.begin()));
}

Configuration sample_full(const ModelSpec& model, const PointSet& window, std::uint64_t seed) {
  const EdgeOracle oracle = lazy_sampler(model, seed);
  Configuration c{window, {}};
  for (const auto& e : edges_within(model.lattice, window))
    if (oracle.open(e)) c.open_edges.insert(e);
  return c;
}

}  // namespace percolab
