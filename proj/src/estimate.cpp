#include "percolab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <boost/math/distributions/normal.hpp>

#include "percolab/error.hpp"

namespace percolab {

double normal_quantile(double level) {
  static const boost::math::normal standard;
  return boost::math::quantile(standard, 0.5 + level / 2.0);
}

Interval binomial_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  if (successes == 0) return {0.0, 1.0 - std::pow(1.0 - level, 1.0 / n)};
  if (successes == trials) return {std::pow(1.0 - level, 1.0 / n), 1.0};
  const double z = normal_quantile(level);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

double sigma_log_of(double p, double n) {
  if (p <= 0.0 || p >= 1.0 || n <= 0) return 0.0;
  return std::sqrt((1.0 - p) / (n * p));
}

}  // namespace

double ProbEstimate::sigma_log() const { return sigma_log_of(p_hat, static_cast<double>(trials)); }

double ProbEstimate::sigma_log_optimistic() const { return sigma_log_of(optimistic_p, static_cast<double>(trials)); }

ProbEstimate make_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t truncated, double level) {
  ProbEstimate e;
  e.successes = successes;
  e.trials = trials;
  e.truncated_count = truncated;
  e.ci_level = level;
  const double n = std::max<double>(1.0, static_cast<double>(trials));
  e.p_hat = static_cast<double>(successes) / n;
  e.pessimistic_p = e.p_hat;
  e.optimistic_p = static_cast<double>(successes + truncated) / n;
  const Interval ci = binomial_interval(successes, trials, level);
  e.ci_lo = std::min(ci.lo, e.p_hat);
  e.ci_hi = std::max(ci.hi, e.p_hat);
  return e;
}

ProbEstimate estimate_probability(const ModelSpec& model, const CompiledEvent& event, const MCConfig& mc) {
  return run_samples(mc, [&](std::uint64_t i, Workspace& ws) {
    const EdgeOracle oracle(model, stream_key(mc.seed, i));
    const EventOutcome o = evaluate(oracle, event, ws);
    return SampleResult{o.connected, o.truncated};
  });
}

ProbEstimate estimate_probability(const ModelSpec& model, const EventSpec& event, const MCConfig& mc) {
  const CompiledEvent compiled(model.lattice, event);
  return estimate_probability(model, compiled, mc);
}

// ---------------------------------------------------------------- exact enumeration

namespace {

struct Enumeration {
  std::vector<Edge> edges;
  std::vector<Point> sites;
};

Enumeration relevant_variables(const ModelSpec& model, const CompiledEvent& ev) {
  Enumeration out;
  const auto& grid = ev.grid();
  const auto& offs = model.lattice.offsets();
  PointSet seen(ev.source().begin(), ev.source().end());
  std::vector<Point> queue(ev.source().begin(), ev.source().end());
  EdgeSet edges;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Point p = queue[head];
    if (ev.target(grid.index(p))) continue;
    for (const auto& g : offs) {
      const Point q = p + g;
      if (!grid.in_padded(q) || !ev.allowed(grid.index(q))) continue;
      edges.emplace(p, q);
      if (seen.insert(q).second) queue.push_back(q);
    }
  }
  out.edges.assign(edges.begin(), edges.end());
  std::sort(out.edges.begin(), out.edges.end());
  if (model.kind == ModelKind::SiteModulated) {
    PointSet sites;
    for (const auto& e : out.edges) {
      sites.insert(e.a);
      sites.insert(e.b);
    }
    out.sites.assign(sites.begin(), sites.end());
    std::sort(out.sites.begin(), out.sites.end());
  }
  return out;
}

class MaskOracle {
 public:
  MaskOracle(const LatticeSpec& lattice, const std::unordered_map<Edge, int, EdgeHash>& index)
      : lattice_(&lattice), index_(&index) {}
  void set(std::uint64_t mask) { mask_ = mask; }
  bool open(const Point& x, int k) const {
    const auto it = index_->find(Edge(x, x + lattice_->offsets()[static_cast<std::size_t>(k)]));
    return it != index_->end() && ((mask_ >> it->second) & 1U);
  }

 private:
  const LatticeSpec* lattice_;
  const std::unordered_map<Edge, int, EdgeHash>* index_;
  std::uint64_t mask_ = 0;
};

}  // namespace

int exact_variable_count(const ModelSpec& model, const EventSpec& event) {
  const CompiledEvent ev(model.lattice, event);
  const auto vars = relevant_variables(model, ev);
  return static_cast<int>(vars.edges.size() + vars.sites.size());
}

double exact_probability(const ModelSpec& model, const EventSpec& event, int edge_limit) {
  const CompiledEvent ev(model.lattice, event);
  if (ev.trivially_connected()) return 1.0;
  const auto vars = relevant_variables(model, ev);
  const int ne = static_cast<int>(vars.edges.size());
  const int ns = static_cast<int>(vars.sites.size());
  if (ne + ns > edge_limit || ne + ns > 40) {
    throw Error(ErrorKind::TooLarge, std::to_string(ne + ns) + " binary variables exceed the limit of " +
                                         std::to_string(edge_limit));
  }
  std::unordered_map<Edge, int, EdgeHash> index;
  for (int i = 0; i < ne; ++i) index.emplace(vars.edges[static_cast<std::size_t>(i)], i);
  std::unordered_map<Point, int, PointHash> site_index;
  for (int i = 0; i < ns; ++i) site_index.emplace(vars.sites[static_cast<std::size_t>(i)], i);

  // Indicator of the event for every edge mask; independent of the signs.
  MaskOracle oracle(model.lattice, index);
  Workspace ws;
  const std::uint64_t configs = std::uint64_t{1} << ne;
  std::vector<unsigned char> indicator(configs);
  for (std::uint64_t m = 0; m < configs; ++m) {
    oracle.set(m);
    indicator[m] = evaluate(oracle, ev, ws).connected ? 1 : 0;
  }

  const std::uint64_t sign_configs = std::uint64_t{1} << ns;
  std::vector<double> prob(static_cast<std::size_t>(ne));
  double total = 0.0;
  for (std::uint64_t sm = 0; sm < sign_configs; ++sm) {
    for (int i = 0; i < ne; ++i) {
      const Edge& e = vars.edges[static_cast<std::size_t>(i)];
      double q = model.p;
      if (model.kind == ModelKind::SiteModulated) {
        const int sa = ((sm >> site_index.at(e.a)) & 1U) ? 1 : -1;
        const int sb = ((sm >> site_index.at(e.b)) & 1U) ? 1 : -1;
        q = model.p * (1.0 + model.epsilon * sa * sb);
      }
      prob[static_cast<std::size_t>(i)] = q;
    }
    double acc = 0.0;
    for (std::uint64_t m = 0; m < configs; ++m) {
      if (!indicator[m]) continue;
      double w = 1.0;
      for (int i = 0; i < ne; ++i) w *= ((m >> i) & 1U) ? prob[static_cast<std::size_t>(i)] : 1.0 - prob[static_cast<std::size_t>(i)];
      acc += w;
    }
    total += acc;
  }
  return total / static_cast<double>(sign_configs);
}

// ---------------------------------------------------------------- rates

RateEntry make_rate_entry(double n, const ProbEstimate& est) {
  RateEntry r;
  r.n = n;
  r.estimate = est;
  const double inf = std::numeric_limits<double>::infinity();
  auto neglog = [&](double p) { return p > 0.0 ? -std::log(p) / n : inf; };
  r.rate_lo = neglog(est.ci_hi);
  r.rate_hi = neglog(est.ci_lo);
  r.lower_bound_only = est.successes == 0;
  r.rate = r.lower_bound_only ? r.rate_lo : neglog(est.p_hat);
  return r;
}

RateFit fit_rates(const std::vector<RateEntry>& entries, double ci_level, bool optimistic) {
  RateFit fit;
  fit.z = normal_quantile(ci_level);
  if (entries.empty()) return fit;
  std::vector<double> xs, ys, sig;
  for (const auto& e : entries) {
    const double p = optimistic ? e.estimate.optimistic_p : e.estimate.p_hat;
    if (!(p > 0.0)) throw Error(ErrorKind::AllFailures, "zero successes at N = " + std::to_string(e.n));
    xs.push_back(e.n);
    ys.push_back(-std::log(p));
    sig.push_back(optimistic ? e.estimate.sigma_log_optimistic() : e.estimate.sigma_log());
  }
  const std::size_t k = xs.size();
  fit.endpoint = ys.back() / xs.back();
  fit.endpoint_sigma = sig.back() / xs.back();
  if (k == 1) {
    fit.slope = fit.endpoint;
    fit.slope_sigma = fit.endpoint_sigma;
    return fit;
  }
  double mx = 0.0;
  for (double x : xs) mx += x;
  mx /= static_cast<double>(k);
  double sxx = 0.0;
  for (double x : xs) sxx += (x - mx) * (x - mx);
  double slope = 0.0, var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = (xs[i] - mx) / sxx;
    slope += w * ys[i];
    var += w * w * sig[i] * sig[i];
  }
  fit.slope = slope;
  fit.slope_sigma = std::sqrt(var);
  fit.consistent = std::abs(fit.slope - fit.endpoint) <=
                   fit.z * std::hypot(fit.slope_sigma, fit.endpoint_sigma);
  return fit;
}

RateSequence rate_sequence(const ModelSpec& model, const EventFamily& family, const std::vector<double>& n_list,
                           const MCConfig& mc) {
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (!(n_list[i] > 0.0) || (i > 0 && !(n_list[i] > n_list[i - 1]))) {
      throw Error(ErrorKind::ConfigInvalid, "N list must be positive and increasing");
    }
  }
  RateSequence seq;
  std::vector<double> failed;
  for (double n : n_list) {
    const ProbEstimate est = estimate_probability(model, family(n), mc);
    seq.entries.push_back(make_rate_entry(n, est));
    if (est.successes == 0) failed.push_back(n);
  }
  if (!failed.empty()) {
    std::ostringstream os;
    os << "zero successes at N =";
    for (double n : failed) os << ' ' << n;
    throw Error(ErrorKind::AllFailures, os.str());
  }
  seq.fit = fit_rates(seq.entries, mc.ci_level, false);
  seq.optimistic_fit = fit_rates(seq.entries, mc.ci_level, true);
  return seq;
}

// ---------------------------------------------------------------- relaxed Fekete

FeketeReport fekete_check(const std::vector<double>& a, const std::function<double(long)>& f,
                          const std::function<long(long)>& g, long n0, double c_minus, double c_plus,
                          const std::vector<double>* uncertainty) {
  FeketeReport rep;
  const long len = static_cast<long>(a.size());
  auto at = [&](long n) { return a[static_cast<std::size_t>(n - 1)]; };
  auto unc = [&](long n) { return uncertainty ? (*uncertainty)[static_cast<std::size_t>(n - 1)] : 0.0; };
  for (long n = std::max<long>(n0, 1); n <= len; ++n) {
    for (long m = std::max<long>(n0, 1); m <= n; ++m) {
      const long mn = std::min(n, m);
      const long idx = n + m + g(mn);
      if (idx < 1 || idx > len) continue;
      ++rep.pairs_checked;
      const double lhs = at(idx);
      const double rhs = at(n) + at(m) + f(mn);
      if (lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs))) continue;
      FeketeViolation v{n, m, lhs, rhs, false};
      v.excused = uncertainty && (lhs - rhs) <= unc(idx) + unc(n) + unc(m);
      (v.excused ? rep.excused : rep.violations).push_back(v);
    }
  }
  rep.vacuous = rep.pairs_checked == 0;
  rep.holds = rep.violations.empty();
  rep.limit_estimate = std::numeric_limits<double>::infinity();
  for (long n = std::max<long>(n0, 1); n <= len; ++n) rep.limit_estimate = std::min(rep.limit_estimate, at(n) / n);
  for (long n = 1; n <= len; ++n)
    if (!(c_minus * n < at(n) && at(n) < c_plus * n)) rep.bounds_ok = false;
  return rep;
}

// ---------------------------------------------------------------- oracle cases

namespace {

class CaseRng {
 public:
  explicit CaseRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return mix64(state_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::uint64_t state_;
};

}  // namespace

OracleCase random_oracle_case(std::uint64_t seed, int max_vars) {
  CaseRng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int dim = rng.integer(1, 2);
    const bool long_range = dim == 1 && rng.integer(0, 1) == 1;
    LatticeSpec lattice = long_range ? make_lattice_spec(1, {Point{1}, Point{2}}) : nearest_neighbor_lattice(dim);
    const bool modulated = rng.integer(0, 2) == 0;
    const double p = rng.uniform(0.2, modulated ? 0.6 : 0.8);
    ModelSpec model = modulated ? make_site_modulated(lattice, p, rng.uniform(0.1, 0.6)) : make_bernoulli(lattice, p);

    EventSpec ev;
    ev.kind = EventKind::Custom;
    ev.coarse = false;
    ev.window_radius = dim == 1 ? rng.integer(2, 5) : rng.integer(1, 2);
    const Vec origin(static_cast<std::size_t>(dim), 0.0);
    const bool restricted = dim == 2 && rng.integer(0, 1) == 1;
    const double angle = rng.uniform(-3.14159, 3.14159);
    ev.medium = restricted ? Region::half_space(Direction::from_angle(angle), origin) : Region::full_space(dim);
    ev.source = {Point(dim)};
    Point t(dim);
    for (int i = 0; i < dim; ++i) t[i] = rng.integer(-ev.window_radius, ev.window_radius);
    if (t.is_zero() || !contains(ev.medium, t.to_real())) continue;
    ev.target = {t};
    const int vars = exact_variable_count(model, ev);
    if (vars > max_vars || vars == 0) continue;

    OracleCase c{model, ev, vars, exact_probability(model, ev, max_vars), {}};
    std::ostringstream os;
    os << model.describe() << (long_range ? " range-2" : "") << " window=" << ev.window_radius << " target="
       << t.str() << (restricted ? " half-plane angle=" + std::to_string(angle) : "") << " vars=" << vars;
    c.description = os.str();
    return c;
  }
  throw Error(ErrorKind::TooLarge, "no small random event found");
}

OracleReport oracle_test(int cases, const MCConfig& mc, int max_vars) {
  OracleReport rep;
  for (int i = 0; i < cases; ++i) {
    OracleOutcome o{random_oracle_case(stream_key(mc.seed, static_cast<std::uint64_t>(i)), max_vars), {}, false};
    MCConfig sub = mc;
    sub.seed = stream_key(mc.seed ^ 0x0c0ffee0ULL, static_cast<std::uint64_t>(i));
    o.estimate = estimate_probability(o.oracle_case.model, o.oracle_case.event, sub);
    o.covered = o.estimate.ci_lo <= o.oracle_case.exact && o.oracle_case.exact <= o.estimate.ci_hi;
    rep.covered += o.covered;
    rep.outcomes.push_back(std::move(o));
  }
  return rep;
}

// ---------------------------------------------------------------- subcriticality probe

ProbeReport subcriticality_probe(const ModelSpec& model, const std::vector<int>& radii, const MCConfig& mc) {
  ProbeReport rep;
  rep.radii = radii;
  for (int n : radii) rep.estimates.push_back(estimate_probability(model, exit_box_event(model.lattice, n), mc));
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const auto& a = rep.estimates[i - 1];
    const auto& b = rep.estimates[i];
    if (b.successes == 0) break;
    if (b.successes >= a.successes) {
      rep.doubt = true;
      rep.reason = "exit probability does not decrease between radii " + std::to_string(radii[i - 1]) + " and " +
                   std::to_string(radii[i]);
      return rep;
    }
    rep.local_rates.push_back(std::log(a.p_hat / b.p_hat) / (radii[i] - radii[i - 1]));
  }
  if (rep.local_rates.size() >= 2 && rep.local_rates.back() < 0.25 * rep.local_rates.front()) {
    rep.doubt = true;
    rep.reason = "local decay rate fell below a quarter of its initial value";
  }
  return rep;
}

}  // namespace percolab
