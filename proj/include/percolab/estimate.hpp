#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "percolab/connectivity.hpp"
#include "percolab/models.hpp"

namespace percolab {

struct MCConfig {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
  double ci_level = 0.95;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Two-sided normal quantile z with P(|Z| <= z) = level.
double normal_quantile(double level);

/// Wilson score interval; one-sided Clopper-Pearson bound when successes is 0 or trials.
Interval binomial_interval(std::uint64_t successes, std::uint64_t trials, double level);

struct ProbEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  std::uint64_t truncated_count = 0;
  double optimistic_p = 0.0;   // truncated samples counted as successes
  double pessimistic_p = 0.0;  // truncated samples counted as failures (= p_hat)
  double ci_level = 0.95;

  /// Delta-method standard error of log(p_hat); 0 when p_hat is 0 or 1.
  double sigma_log() const;
  double sigma_log_optimistic() const;
};

ProbEstimate make_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t truncated, double level);

/// Per-sample outcome fed to the parallel reducer.
struct SampleResult {
  bool success = false;
  bool truncated = false;
};

/// Runs `body(sample_index, workspace)` for every sample index and sums the outcomes.
/// Sample i always sees stream_key(seed, i), so the counts do not depend on `workers`.
template <class Body>
ProbEstimate run_samples(const MCConfig& mc, Body&& body) {
  const int workers = std::max(1, mc.workers);
  std::vector<std::uint64_t> succ(static_cast<std::size_t>(workers), 0), trunc(succ);
  auto job = [&](int w) {
    Workspace ws;
    const std::uint64_t lo = mc.samples * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = mc.samples * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    for (std::uint64_t i = lo; i < hi; ++i) {
      const SampleResult r = body(i, ws);
      succ[static_cast<std::size_t>(w)] += r.success;
      trunc[static_cast<std::size_t>(w)] += r.truncated;
    }
  };
  if (workers == 1) {
    job(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(job, w);
  }
  std::uint64_t s = 0, t = 0;
  for (std::size_t w = 0; w < succ.size(); ++w) {
    s += succ[w];
    t += trunc[w];
  }
  return make_estimate(s, mc.samples, t, mc.ci_level);
}

ProbEstimate estimate_probability(const ModelSpec& model, const EventSpec& event, const MCConfig& mc);
ProbEstimate estimate_probability(const ModelSpec& model, const CompiledEvent& event, const MCConfig& mc);

/// Exact P(event) by enumerating every state of the edges reachable from the source inside
/// the medium (plus their endpoint signs for site-modulated models).
double exact_probability(const ModelSpec& model, const EventSpec& event, int edge_limit = 20);
/// Number of binary variables exact_probability would enumerate.
int exact_variable_count(const ModelSpec& model, const EventSpec& event);

// ---------------------------------------------------------------- rates

struct RateEntry {
  double n = 0.0;
  ProbEstimate estimate;
  double rate = 0.0;     // -log(p_hat) / N; the lower bound rate_lo when p_hat = 0
  double rate_lo = 0.0;  // from the binomial interval
  double rate_hi = 0.0;
  bool lower_bound_only = false;
};

struct RateFit {
  double slope = 0.0;
  double slope_sigma = 0.0;
  double endpoint = 0.0;
  double endpoint_sigma = 0.0;
  double z = 1.96;  // quantile used for half-widths
  bool consistent = true;  // the two estimators agree within their combined interval

  double slope_half_width() const { return z * slope_sigma; }
  double endpoint_half_width() const { return z * endpoint_sigma; }
};

struct RateSequence {
  std::vector<RateEntry> entries;
  RateFit fit;             // pessimistic (truncation counted as failure)
  RateFit optimistic_fit;  // truncation counted as success
};

RateEntry make_rate_entry(double n, const ProbEstimate& est);
/// Least-squares slope of -log p against N and the endpoint a_N / N, both with propagated
/// delta-method uncertainty.
RateFit fit_rates(const std::vector<RateEntry>& entries, double ci_level, bool optimistic = false);

using EventFamily = std::function<EventSpec(double)>;

/// Throws AllFailures when some N had zero successes.
RateSequence rate_sequence(const ModelSpec& model, const EventFamily& family, const std::vector<double>& n_list,
                           const MCConfig& mc);

// ---------------------------------------------------------------- relaxed Fekete

struct FeketeViolation {
  long n = 0;
  long m = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool excused = false;  // deficit within the summed uncertainty of the three terms
};

struct FeketeReport {
  bool holds = true;
  bool vacuous = false;
  std::vector<FeketeViolation> violations;  // unexcused violations only
  std::vector<FeketeViolation> excused;
  long pairs_checked = 0;
  double limit_estimate = 0.0;
  bool bounds_ok = true;
};

/// Scans a_{n+m+g(min)} <= a_n + a_m + f(min) over all n, m >= N0 in range. `a[0]` is a_1.
/// When `uncertainty` is given, a violation whose deficit is at most the summed
/// uncertainties of the three terms is excused.
FeketeReport fekete_check(const std::vector<double>& a, const std::function<double(long)>& f,
                          const std::function<long(long)>& g, long n0, double c_minus, double c_plus,
                          const std::vector<double>* uncertainty = nullptr);

// ---------------------------------------------------------------- oracle cases

struct OracleCase {
  ModelSpec model;
  EventSpec event;
  int variables = 0;
  double exact = 0.0;
  std::string description;
};

/// Small random plain-mode event with at most `max_vars` binary variables, reproducible from `seed`.
OracleCase random_oracle_case(std::uint64_t seed, int max_vars = 18);

struct OracleOutcome {
  OracleCase oracle_case;
  ProbEstimate estimate;
  bool covered = false;  // exact value inside the interval
};

struct OracleReport {
  std::vector<OracleOutcome> outcomes;
  int covered = 0;
};

/// Case i uses seed stream_key(mc.seed, i) for generation and sampling.
OracleReport oracle_test(int cases, const MCConfig& mc, int max_vars = 18);

// ---------------------------------------------------------------- subcriticality probe

struct ProbeReport {
  std::vector<int> radii;
  std::vector<ProbEstimate> estimates;  // P(0 <-> outside Lambda_n)
  std::vector<double> local_rates;      // decay per unit radius between consecutive radii
  bool doubt = false;
  std::string reason;
};

/// Flags doubt when the exit probability stops decreasing or its local decay rate collapses.
ProbeReport subcriticality_probe(const ModelSpec& model, const std::vector<int>& radii, const MCConfig& mc);

}  // namespace percolab
