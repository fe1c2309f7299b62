#include "percolab/convex.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "percolab/error.hpp"

namespace percolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSameDirection = 1e-12;

double wrap(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

double angle_between(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  double diff = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += std::pow(a[i] / na - b[i] / nb, 2);
    sum += std::pow(a[i] / na + b[i] / nb, 2);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

/// Table directions sorted by angle in [0, 2 pi).
struct AngularIndex {
  std::vector<double> angles;
  std::vector<std::size_t> order;
};

AngularIndex angular_index(const NormTable& t) {
  AngularIndex idx;
  std::vector<std::pair<double, std::size_t>> a;
  for (std::size_t i = 0; i < t.entries.size(); ++i) a.emplace_back(wrap(t.entries[i].direction.angle()), i);
  std::sort(a.begin(), a.end());
  for (const auto& [ang, i] : a) {
    idx.angles.push_back(ang);
    idx.order.push_back(i);
  }
  return idx;
}

double max_gap(const AngularIndex& idx) {
  double g = 0.0;
  const std::size_t n = idx.angles.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? idx.angles[i + 1] : idx.angles[0] + kTwoPi;
    g = std::max(g, next - idx.angles[i]);
  }
  return g;
}

struct Bracket {
  std::size_t lo, hi;  // entry indices
  double weight;       // of hi
};

/// Neighbouring table directions around u (d = 2); nullopt when u falls in a gap of at least pi.
std::optional<Bracket> bracket(const AngularIndex& idx, const Direction& u) {
  const double th = wrap(u.angle());
  const std::size_t n = idx.angles.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(idx.angles[i] - th);
    if (std::min(d, kTwoPi - d) < kSameDirection) return Bracket{idx.order[i], idx.order[i], 0.0};
  }
  const auto it = std::upper_bound(idx.angles.begin(), idx.angles.end(), th);
  const std::size_t j = static_cast<std::size_t>(it - idx.angles.begin()) % n;
  const std::size_t i = (j + n - 1) % n;
  const double gap = wrap(idx.angles[j] - idx.angles[i]);
  if (gap >= kPi || n < 2) return std::nullopt;
  return Bracket{idx.order[i], idx.order[j], wrap(th - idx.angles[i]) / gap};
}

/// d >= 3: inverse-angle weights over the d nearest table directions.
std::vector<std::pair<std::size_t, double>> nearest_weights(const NormTable& t, const Direction& u) {
  std::vector<std::pair<double, std::size_t>> by_angle;
  for (std::size_t i = 0; i < t.entries.size(); ++i)
    by_angle.emplace_back(angle_between(u.vec(), t.entries[i].direction.vec()), i);
  std::sort(by_angle.begin(), by_angle.end());
  if (by_angle.front().first < kSameDirection) return {{by_angle.front().second, 1.0}};
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t.dim), by_angle.size());
  std::vector<std::pair<std::size_t, double>> w;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double wi = 1.0 / by_angle[i].first;
    w.emplace_back(by_angle[i].second, wi);
    total += wi;
  }
  for (auto& [i, wi] : w) wi /= total;
  return w;
}

struct Polygon {
  std::vector<Vec> vertices;  // CCW
  std::vector<Vec> normals;   // outward unit normal of edge k -> k+1
  std::vector<double> offsets;

  double gauge(std::span<const double> x) const {
    double g = 0.0;
    for (std::size_t k = 0; k < normals.size(); ++k) g = std::max(g, dot(x, normals[k]) / offsets[k]);
    return g;
  }
};

Polygon make_polygon(std::vector<Vec> v) {
  Polygon p;
  p.vertices = std::move(v);
  const std::size_t n = p.vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& a = p.vertices[k];
    const Vec& b = p.vertices[(k + 1) % n];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len = std::hypot(dx, dy);
    Vec nrm{dy / len, -dx / len};
    p.offsets.push_back(dot(a, nrm));
    p.normals.push_back(std::move(nrm));
  }
  return p;
}

/// Andrew's monotone chain; drops collinear points.
std::vector<Vec> convex_hull(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, std::hypot(p[0], p[1]));
  const double eps = 1e-12 * scale * scale;
  auto turn = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], p) <= eps) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(h[k - 2], h[k - 1], pts[i]) <= eps) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

Polygon hull_of(const NormTable& t) {
  std::vector<Vec> pts;
  for (const auto& e : t.entries) pts.push_back(e.direction.scaled(1.0 / e.value));
  auto h = convex_hull(std::move(pts));
  if (h.size() < 3) throw Error(ErrorKind::DegenerateTable, "unit ball has empty interior");
  return make_polygon(std::move(h));
}

void require_planar(const NormTable& t, const char* what) {
  if (t.dim != 2) throw Error(ErrorKind::Unsupported, std::string(what) + " is available in d = 2 only");
}

}  // namespace

std::string to_string(Closure c) { return c == Closure::ConvexGauge ? "convex_gauge" : "angular_linear"; }

Closure closure_from_string(const std::string& name) {
  if (name == "convex_gauge") return Closure::ConvexGauge;
  if (name == "angular_linear") return Closure::AngularLinear;
  throw Error(ErrorKind::ConfigInvalid, "unknown closure '" + name + "'");
}

void NormTable::validate() const {
  if (entries.empty()) throw Error(ErrorKind::EmptyTable, "norm table has no entries");
  for (const auto& e : entries) {
    if (e.direction.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "table direction dimension");
    if (!(e.value > 0.0) || !std::isfinite(e.value))
      throw Error(ErrorKind::DegenerateTable, "table values must be positive and finite");
    if (!(e.uncertainty >= 0.0)) throw Error(ErrorKind::DegenerateTable, "uncertainties must be nonnegative");
  }
  if (entries.size() < static_cast<std::size_t>(dim) + 1)
    throw Error(ErrorKind::DegenerateTable, "need at least d + 1 directions");
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (angle_between(entries[i].direction.vec(), entries[j].direction.vec()) < kSameDirection)
        throw Error(ErrorKind::DegenerateTable, "repeated table direction");

  // Spanning check by Gram-Schmidt.
  std::vector<Vec> basis;
  for (const auto& e : entries) {
    Vec r = e.direction.vec();
    for (const auto& b : basis) r = axpy(-dot(r, b), b, r);
    const double nr = norm(r);
    if (nr > 1e-9) {
      for (auto& x : r) x /= nr;
      basis.push_back(r);
    }
  }
  if (static_cast<int>(basis.size()) < dim) throw Error(ErrorKind::DegenerateTable, "directions do not span");

  if (symmetric) {
    for (const auto& e : entries) {
      const bool found = std::any_of(entries.begin(), entries.end(), [&](const NormEntry& o) {
        return angle_between(o.direction.vec(), (-e.direction).vec()) < 1e-9;
      });
      if (!found) throw Error(ErrorKind::DegenerateTable, "antipode missing in a symmetric table");
    }
  }
  if (dim == 2 && closure == Closure::ConvexGauge && max_gap(angular_index(*this)) >= kPi)
    throw Error(ErrorKind::DegenerateTable, "directions leave a half-plane uncovered");
}

NormTable NormTable::scaled(double lambda) const {
  NormTable t = *this;
  for (auto& e : t.entries) {
    e.value *= lambda;
    e.uncertainty *= lambda;
  }
  return t;
}

NormTable table_from_function(int n, const std::function<double(const Direction&)>& f, Closure closure,
                              bool symmetric) {
  NormTable t;
  t.dim = 2;
  t.closure = closure;
  t.symmetric = symmetric;
  for (int i = 0; i < n; ++i) {
    const Direction d = Direction::from_angle(kTwoPi * i / n);
    t.entries.push_back({d, f(d), 0.0});
  }
  return t;
}

double ConvexBody::support(std::span<const double> u) const {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) h = std::max(h, dot(v, u));
  return h;
}

bool ConvexBody::contains(std::span<const double> x, double tol) const {
  const Polygon p = make_polygon(vertices);
  for (std::size_t k = 0; k < p.normals.size(); ++k)
    if (dot(x, p.normals[k]) > p.offsets[k] + tol) return false;
  return true;
}

bool representable(const NormTable& table, const Direction& u) {
  if (table.entries.empty()) return false;
  if (table.dim != 2)
    return std::any_of(table.entries.begin(), table.entries.end(),
                       [&](const NormEntry& e) { return dot(e.direction.vec(), u.vec()) > 0.0; });
  if (table.closure == Closure::ConvexGauge) return max_gap(angular_index(table)) < kPi;
  return bracket(angular_index(table), u).has_value();
}

double extend_homogeneous(const NormTable& table, std::span<const double> x) {
  if (table.entries.empty()) throw Error(ErrorKind::EmptyTable, "norm table has no entries");
  if (static_cast<int>(x.size()) != table.dim) throw Error(ErrorKind::DimensionMismatch, "point dimension");
  const double r = norm(x);
  if (r == 0.0) return 0.0;
  const Direction u = Direction::normalized(Vec(x.begin(), x.end()));
  if (table.dim != 2) {
    double v = 0.0;
    for (const auto& [i, w] : nearest_weights(table, u)) v += w * table.entries[i].value;
    return r * v;
  }
  if (table.closure == Closure::ConvexGauge) return hull_of(table).gauge(x);
  const auto b = bracket(angular_index(table), u);
  if (!b) throw Error(ErrorKind::MissingDirection, "direction outside the table's interpolation span");
  const double v = (1.0 - b->weight) * table.entries[b->lo].value + b->weight * table.entries[b->hi].value;
  return r * v;
}

double interpolate_uncertainty(const NormTable& table, const Direction& u) {
  if (table.entries.empty()) throw Error(ErrorKind::EmptyTable, "norm table has no entries");
  if (table.dim != 2) {
    double v = 0.0;
    for (const auto& [i, w] : nearest_weights(table, u)) v += w * table.entries[i].uncertainty;
    return v;
  }
  const auto b = bracket(angular_index(table), u);
  if (!b) throw Error(ErrorKind::MissingDirection, "direction outside the table's interpolation span");
  return (1.0 - b->weight) * table.entries[b->lo].uncertainty + b->weight * table.entries[b->hi].uncertainty;
}

ConvexBody unit_ball(const NormTable& table) {
  require_planar(table, "unit_ball");
  table.validate();
  if (max_gap(angular_index(table)) >= kPi)
    throw Error(ErrorKind::DegenerateTable, "directions leave a half-plane uncovered");
  const Polygon p = hull_of(table);
  ConvexBody body;
  body.vertices = p.vertices;
  for (const auto& e : table.entries) {
    const Vec x = e.direction.scaled(1.0 / e.value);
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.normals.size(); ++k) d = std::min(d, p.offsets[k] - dot(x, p.normals[k]));
    body.convexity_defect = std::max(body.convexity_defect, std::max(0.0, d));
  }
  return body;
}

ConvexBody polar_set(const NormTable& table) {
  require_planar(table, "polar_set");
  table.validate();
  if (max_gap(angular_index(table)) >= kPi) throw Error(ErrorKind::DegenerateTable, "polar set is unbounded");
  double vmax = 0.0;
  for (const auto& e : table.entries) vmax = std::max(vmax, e.value);
  const double big = 1e6 * vmax;
  std::vector<Vec> poly{{-big, -big}, {big, -big}, {big, big}, {-big, big}};
  for (const auto& e : table.entries) {
    const Vec& s = e.direction.vec();
    std::vector<Vec> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec& a = poly[k];
      const Vec& b = poly[(k + 1) % poly.size()];
      const double fa = dot(a, s) - e.value, fb = dot(b, s) - e.value;
      if (fa <= 0) out.push_back(a);
      if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) {
        const double t = fa / (fa - fb);
        out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
      }
    }
    poly = std::move(out);
    if (poly.empty()) throw Error(ErrorKind::DegenerateTable, "polar set is empty");
  }
  for (const auto& v : poly)
    if (std::abs(v[0]) > big / 2 || std::abs(v[1]) > big / 2)
      throw Error(ErrorKind::DegenerateTable, "polar set is unbounded");
  ConvexBody body;
  body.vertices = convex_hull(std::move(poly));
  return body;
}

std::vector<Direction> dual_directions(const NormTable& table, const Direction& s) {
  table.validate();
  if (table.dim != 2) {
    // Support-function sampling: table directions u for which s / nu(s) attains h_U(u).
    const double ns = extend_homogeneous(table, s.vec());
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t j = 0; j < table.entries.size(); ++j) {
      const Vec& u = table.entries[j].direction.vec();
      double h = 0.0;
      for (const auto& e : table.entries) h = std::max(h, dot(e.direction.vec(), u) / e.value);
      scored.emplace_back(dot(s.vec(), u) / ns / h, j);
    }
    std::sort(scored.begin(), scored.end(), std::greater<>());
    std::vector<Direction> out;
    for (const auto& [score, j] : scored)
      if (score >= scored.front().first - 1e-9) out.push_back(table.entries[j].direction);
    return out;
  }
  if (max_gap(angular_index(table)) >= kPi)
    throw Error(ErrorKind::DegenerateTable, "directions leave a half-plane uncovered");
  const Polygon p = hull_of(table);
  const Vec b = s.scaled(1.0 / p.gauge(s.vec()));
  const std::size_t n = p.normals.size();
  std::vector<bool> incident(n);
  for (std::size_t k = 0; k < n; ++k) incident[k] = dot(b, p.normals[k]) / p.offsets[k] >= 1.0 - 1e-9;
  std::size_t start = 0;
  while (!(incident[start] && !incident[(start + n - 1) % n])) ++start;
  std::vector<Direction> out;
  for (std::size_t k = start; incident[k % n] && out.size() < n; ++k) out.emplace_back(p.normals[k % n]);
  if (out.size() > 2) out.erase(out.begin() + 1, out.end() - 1);
  return out;
}

DualPair choose_dual(const NormTable& table, const Direction& s) {
  const auto normals = dual_directions(table, s);
  DualPair pair{s, normals.front(), 0.0};
  if (table.dim == 2 && normals.size() == 2) {
    const double a = wrap(normals[0].angle());
    const double width = wrap(normals[1].angle() - a);
    if (wrap(s.angle() - a) <= width) {
      pair.s_star = s;
    } else {
      const double da = angle_between(s.vec(), normals[0].vec());
      const double db = angle_between(s.vec(), normals[1].vec());
      pair.s_star = db < da ? normals[1] : normals[0];
    }
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : normals) {
      const double d = angle_between(s.vec(), u.vec());
      if (d < best) {
        best = d;
        pair.s_star = u;
      }
    }
  }
  return pair;
}

Residual duality_residual(const NormTable& table_pp, const NormTable& table_hs, const Direction& s) {
  table_pp.validate();
  table_hs.validate();
  Residual r;
  r.pair = choose_dual(table_pp, s);
  const Direction& ss = r.pair.s_star;
  if (!representable(table_hs, ss))
    throw Error(ErrorKind::MissingDirection, "dual direction outside the half-space table's span");
  const double c = dot(s.vec(), ss.vec());
  const double nu = extend_homogeneous(table_pp, s.vec());
  const double nh = extend_homogeneous(table_hs, ss.vec());
  r.value = nu - nh * c;
  r.uncertainty = std::hypot(interpolate_uncertainty(table_pp, s), c * interpolate_uncertainty(table_hs, ss));
  r.pair.gap = r.value;
  return r;
}

NormTable halfspace_table_from(const NormTable& table_pp, const std::vector<Direction>& directions) {
  NormTable t;
  t.dim = table_pp.dim;
  t.closure = Closure::AngularLinear;
  for (const auto& u : directions) {
    double best = std::numeric_limits<double>::infinity();
    double sigma = 0.0;
    for (const auto& e : table_pp.entries) {
      const double c = dot(u.vec(), e.direction.vec());
      if (c <= 1e-12) continue;
      if (e.value / c < best) {
        best = e.value / c;
        sigma = e.uncertainty / c;
      }
    }
    if (!std::isfinite(best)) throw Error(ErrorKind::MissingDirection, "no table direction faces " + std::to_string(u.angle()));
    t.entries.push_back({u, best, sigma});
  }
  return t;
}

double triangle_check(const NormTable& table, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto d = static_cast<std::size_t>(table.dim);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    Vec x(d), y(d);
    for (auto& v : x) v = gauss(rng);
    for (auto& v : y) v = gauss(rng);
    const Vec z = axpy(1.0, x, y);
    worst = std::max(worst, extend_homogeneous(table, z) - extend_homogeneous(table, x) - extend_homogeneous(table, y));
  }
  return worst;
}

MinimizerReport minimizer_check(const NormTable& table, const Direction& s, const Direction& s_star, double tol) {
  MinimizerReport rep;
  const double cs = dot(s_star.vec(), s.vec());
  if (cs <= 0.0) {
    rep.holds = false;
    return rep;
  }
  const double base = extend_homogeneous(table, s.vec()) / cs;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const double c = dot(s_star.vec(), table.entries[i].direction.vec());
    if (c <= 1e-12) continue;
    const double deficit = base - table.entries[i].value / c;
    if (deficit > tol && deficit > rep.worst_deficit) {
      rep.holds = false;
      rep.worst_deficit = deficit;
      rep.worst_entry = i;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- CSV

std::string to_csv(const NormTable& table) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# closure=" << to_string(table.closure) << " symmetric=" << (table.symmetric ? "true" : "false") << '\n';
  if (table.dim == 2) {
    os << "angle,value,uncertainty\n";
    for (const auto& e : table.entries) os << e.direction.angle() << ',' << e.value << ',' << e.uncertainty << '\n';
  } else {
    for (int i = 0; i < table.dim; ++i) os << 's' << i + 1 << ',';
    os << "value,uncertainty\n";
    for (const auto& e : table.entries) {
      for (double c : e.direction.vec()) os << c << ',';
      os << e.value << ',' << e.uncertainty << '\n';
    }
  }
  return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::ConfigInvalid, "bad number '" + s + "' in norm table");
}

}  // namespace

NormTable table_from_csv(const std::string& text) {
  NormTable t;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.starts_with('#')) {
      std::istringstream ls(line.substr(1));
      for (std::string tok; ls >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "closure") t.closure = closure_from_string(val);
        if (key == "symmetric") t.symmetric = val == "true" || val == "1";
      }
      continue;
    }
    const auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      if (header.size() < 3 || header[header.size() - 2] != "value" || header.back() != "uncertainty")
        throw Error(ErrorKind::ConfigInvalid, "norm table header must end with value,uncertainty");
      t.dim = header.front() == "angle" ? 2 : static_cast<int>(header.size()) - 2;
      continue;
    }
    if (cells.size() != header.size()) throw Error(ErrorKind::ConfigInvalid, "ragged norm table row '" + line + "'");
    NormEntry e;
    if (header.front() == "angle") {
      e.direction = Direction::from_angle(parse_double(cells[0]));
    } else {
      Vec v;
      for (int i = 0; i < t.dim; ++i) v.push_back(parse_double(cells[static_cast<std::size_t>(i)]));
      e.direction = Direction::normalized(v);
    }
    e.value = parse_double(cells[cells.size() - 2]);
    e.uncertainty = parse_double(cells.back());
    t.entries.push_back(e);
  }
  if (header.empty()) throw Error(ErrorKind::EmptyTable, "norm table file has no header");
  return t;
}

std::string to_csv(const ConvexBody& body) {
  std::ostringstream os;
  os << std::setprecision(17) << "x,y\n";
  for (const auto& v : body.vertices) os << v[0] << ',' << v[1] << '\n';
  return os.str();
}

}  // namespace percolab
