#include "percolab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "percolab/coarsegrain.hpp"
#include "percolab/convex.hpp"
#include "percolab/error.hpp"

#ifndef PERCOLAB_VERSION
#define PERCOLAB_VERSION "0.0.0"
#endif

namespace percolab {

using json = nlohmann::json;

std::string_view version() { return PERCOLAB_VERSION; }

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// ---------------------------------------------------------------- config access

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::ConfigInvalid, "'" + key + "' " + why);
}

/// JSON object together with its dotted path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) invalid(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_->contains(k) && !(*j_)[k].is_null(); }

  const json& raw(const std::string& k) const {
    if (!has(k)) invalid(key(k), "is missing");
    return (*j_)[k];
  }

  Node child(const std::string& k) const { return Node(raw(k), key(k)); }

  template <class T>
  T get(const std::string& k) const {
    const json& v = raw(k);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) invalid(key(k), "must be true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) invalid(key(k), "must be an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) invalid(key(k), "must be a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) invalid(key(k), "must be a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      invalid(key(k), std::string("has the wrong type: ") + e.what());
    }
  }

  template <class T>
  T get_or(const std::string& k, T fallback) const {
    return has(k) ? get<T>(k) : fallback;
  }

  std::vector<double> numbers(const std::string& k) const {
    const json& v = raw(k);
    if (!v.is_array() || v.empty()) invalid(key(k), "must be a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) invalid(key(k), "must contain only numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  const json* j_;
  std::string path_;
};

Direction parse_direction(const json& v, const std::string& key, int dim) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) invalid(key, "must be an array of " + std::to_string(dim) + " numbers");
  Vec x;
  for (const auto& c : v) {
    if (!c.is_number()) invalid(key, "must contain only numbers");
    x.push_back(c.get<double>());
  }
  if (std::all_of(x.begin(), x.end(), [](double c) { return c == 0.0; })) invalid(key, "must be nonzero");
  return Direction::normalized(x);
}

LatticeSpec parse_lattice(const Node& n) {
  const int dim = n.get<int>("dim");
  if (dim < 1) invalid(n.key("dim"), "must be positive");
  LatticeOptions opt;
  if (n.has("coarse_radius")) opt.coarse_radius = n.get<int>("coarse_radius");
  opt.auto_symmetrize = n.get_or<bool>("symmetrize", true);
  if (!n.has("offsets")) return make_lattice_spec(dim, std::span<const Point>(nearest_neighbor_lattice(dim).offsets()), opt);
  const json& offs = n.raw("offsets");
  if (!offs.is_array() || offs.empty()) invalid(n.key("offsets"), "must be a nonempty array of integer vectors");
  std::vector<Point> pts;
  for (const auto& o : offs) {
    if (!o.is_array() || static_cast<int>(o.size()) != dim) invalid(n.key("offsets"), "entries must have dim integers");
    Point p(dim);
    for (int i = 0; i < dim; ++i) {
      if (!o[static_cast<std::size_t>(i)].is_number_integer()) invalid(n.key("offsets"), "entries must be integers");
      p[i] = o[static_cast<std::size_t>(i)].get<int>();
    }
    pts.push_back(p);
  }
  return make_lattice_spec(dim, std::span<const Point>(pts), opt);
}

ModelSpec parse_model(const Node& n) {
  const LatticeSpec lattice = n.has("lattice") ? parse_lattice(n.child("lattice")) : nearest_neighbor_lattice(2);
  const std::string kind = n.get<std::string>("kind");
  const double p = n.get<double>("p");
  if (kind == "bernoulli") return make_bernoulli(lattice, p);
  if (kind == "site_modulated") return make_site_modulated(lattice, p, n.get<double>("epsilon"));
  invalid(n.key("kind"), "must be bernoulli or site_modulated");
}

EventConfig parse_event(const Node& n, int dim) {
  EventConfig e;
  e.kind = n.get_or<std::string>("kind", "point");
  if (e.kind != "point" && e.kind != "q" && e.kind != "half_space" && e.kind != "constrained_half_space")
    invalid(n.key("kind"), "must be point, q, half_space or constrained_half_space");
  if (n.has("directions")) {
    const json& ds = n.raw("directions");
    if (!ds.is_array() || ds.empty()) invalid(n.key("directions"), "must be a nonempty array of vectors");
    for (const auto& d : ds) e.directions.push_back(parse_direction(d, n.key("directions"), dim));
  } else if (n.has("direction")) {
    e.directions.push_back(parse_direction(n.raw("direction"), n.key("direction"), dim));
  } else {
    e.directions.push_back(Direction::axis(dim, 0));
  }
  if (n.has("cone_axis")) e.cone_axis = parse_direction(n.raw("cone_axis"), n.key("cone_axis"), dim);
  e.delta = n.get_or<double>("delta", 1.0);
  if (!(e.delta > 0.0 && e.delta <= 1.0)) invalid(n.key("delta"), "must lie in (0, 1]");
  e.n = n.numbers("n");
  for (std::size_t i = 0; i < e.n.size(); ++i) {
    if (!(e.n[i] > 0.0)) invalid(n.key("n"), "values must be positive");
    if (i > 0 && !(e.n[i] > e.n[i - 1])) invalid(n.key("n"), "values must be increasing");
  }
  e.alpha = n.get_or<double>("alpha", kDefaultAlpha);
  if (!(e.alpha >= 1.0)) invalid(n.key("alpha"), "must be at least 1");
  e.coarse = n.get_or<bool>("coarse", e.kind == "point" ? dim > 1 : true);
  return e;
}

MCConfig parse_mc(const Node& n) {
  MCConfig mc;
  if (!n.has("seed")) invalid(n.key("seed"), "is missing; runs are never seeded from the clock");
  const json& seed = n.raw("seed");
  if (!seed.is_number_integer()) invalid(n.key("seed"), "must be an integer");
  mc.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : static_cast<std::uint64_t>(seed.get<std::int64_t>());
  const auto samples = n.get<std::int64_t>("samples");
  if (samples <= 0) invalid(n.key("samples"), "must be positive");
  mc.samples = static_cast<std::uint64_t>(samples);
  mc.workers = n.get_or<int>("workers", 1);
  if (mc.workers < 1) invalid(n.key("workers"), "must be positive");
  mc.ci_level = n.get_or<double>("ci_level", 0.95);
  if (!(mc.ci_level > 0.0 && mc.ci_level < 1.0)) invalid(n.key("ci_level"), "must lie in (0, 1)");
  return mc;
}

template <class T>
const T& need(const std::optional<T>& v, const char* section) {
  if (!v) invalid(section, "section is missing");
  return *v;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------- output helpers

struct Manifest {
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;
  std::string subcommand;

  std::string hash_hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash;
    return os.str();
  }
  /// Deterministic comment line for CSV and text artifacts.
  std::string comment() const {
    return "# config_hash=" + hash_hex() + " seed=" + std::to_string(seed) + " version=" + std::string(version()) +
           " subcommand=" + subcommand + "\n";
  }
  json to_json() const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return {{"config_hash", hash_hex()}, {"seed", seed}, {"version", version()}, {"subcommand", subcommand},
            {"timestamp", ts.str()}};
  }
};

class Writer {
 public:
  Writer(std::filesystem::path dir, std::string prefix, RunReport& report)
      : dir_(std::move(dir)), prefix_(std::move(prefix)), report_(&report) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& suffix, const std::string& body) {
    const auto path = dir_ / (prefix_ + suffix);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write '" + path.string() + "' (output.dir)");
    out << body;
    report_->artifacts.push_back(path);
  }

 private:
  std::filesystem::path dir_;
  std::string prefix_;
  RunReport* report_;
};

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

json finite(double x) { return std::isfinite(x) ? json(x) : json(fmt(x)); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string read_file(const std::filesystem::path& path, const std::string& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid(key, "names a file that cannot be read: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path resolve(const ExperimentConfig& c, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : c.base_dir / path;
}

json estimate_json(const ProbEstimate& e) {
  return {{"successes", e.successes},     {"trials", e.trials},       {"p_hat", e.p_hat},
          {"ci_lo", e.ci_lo},             {"ci_hi", e.ci_hi},         {"truncated", e.truncated_count},
          {"optimistic_p", e.optimistic_p}, {"ci_level", e.ci_level}};
}

json fit_json(const RateFit& f) {
  return {{"slope", finite(f.slope)},
          {"slope_half_width", finite(f.slope_half_width())},
          {"endpoint", finite(f.endpoint)},
          {"endpoint_half_width", finite(f.endpoint_half_width())},
          {"consistent", f.consistent}};
}

std::string direction_cells(const Direction& s) {
  std::string out;
  for (int i = 0; i < s.dim(); ++i) out += (i ? "," : "") + fmt(s[i]);
  return out;
}

std::string direction_header(int dim) {
  std::string out;
  for (int i = 0; i < dim; ++i) out += (i ? "," : "") + std::string("s") + std::to_string(i + 1);
  return out;
}

/// Optional subcriticality probe; returns its JSON record and throws SubcriticalityDoubt when asked to.
json maybe_probe(const Node& root, const ModelSpec& model, const MCConfig& mc) {
  if (!root.has("probe")) return nullptr;
  const Node p = root.child("probe");
  std::vector<int> radii;
  for (double r : p.numbers("radii")) {
    if (r < 1 || r != std::floor(r)) invalid(p.key("radii"), "must be positive integers");
    radii.push_back(static_cast<int>(r));
  }
  MCConfig pm = mc;
  pm.samples = static_cast<std::uint64_t>(p.get_or<std::int64_t>("samples", static_cast<std::int64_t>(mc.samples)));
  const ProbeReport rep = subcriticality_probe(model, radii, pm);
  json j = {{"radii", radii}, {"doubt", rep.doubt}, {"reason", rep.reason}, {"local_rates", rep.local_rates}};
  for (const auto& e : rep.estimates) j["estimates"].push_back(estimate_json(e));
  if (rep.doubt && p.get_or<bool>("abort_on_doubt", true)) throw Error(ErrorKind::SubcriticalityDoubt, rep.reason);
  return j;
}

// ---------------------------------------------------------------- subcommands

struct Context {
  const ExperimentConfig& config;
  json root;
  Manifest manifest;
  MCConfig mc;
  Writer writer;
};

void estimate_rate(Context& ctx, RunReport& report) {
  const ModelSpec& model = need(ctx.config.model, "model");
  const EventConfig& ev = need(ctx.config.event, "event");
  json out = {{"manifest", ctx.manifest.to_json()}, {"model", model.describe()}, {"event_kind", ev.kind}};
  out["probe"] = maybe_probe(Node(ctx.root, ""), model, ctx.mc);
  std::ostringstream csv;
  csv << ctx.manifest.comment();
  csv << "direction," << direction_header(model.lattice.dim())
      << ",N,successes,trials,truncated,p_hat,ci_lo,ci_hi,optimistic_p,rate,rate_lo,rate_hi,lower_bound_only\n";
  std::ostringstream summary;
  for (std::size_t k = 0; k < ev.directions.size(); ++k) {
    const Direction& s = ev.directions[k];
    const RateSequence seq = rate_sequence(model, ev.family(model.lattice, s), ev.n, ctx.mc);
    for (const auto& e : seq.entries) {
      csv << k << "," << direction_cells(s) << "," << fmt(e.n) << "," << e.estimate.successes << ","
          << e.estimate.trials << "," << e.estimate.truncated_count << "," << fmt(e.estimate.p_hat) << ","
          << fmt(e.estimate.ci_lo) << "," << fmt(e.estimate.ci_hi) << "," << fmt(e.estimate.optimistic_p) << ","
          << fmt(e.rate) << "," << fmt(e.rate_lo) << "," << fmt(e.rate_hi) << ","
          << (e.lower_bound_only ? "true" : "false") << "\n";
    }
    out["directions"].push_back({{"s", s.vec()}, {"fit", fit_json(seq.fit)}, {"optimistic_fit", fit_json(seq.optimistic_fit)}});
    summary << "direction " << k << ": rate " << fmt(seq.fit.slope) << " +- " << fmt(seq.fit.slope_half_width())
            << " (endpoint " << fmt(seq.fit.endpoint) << ")" << (seq.fit.consistent ? "" : " [estimators disagree]")
            << "\n";
  }
  ctx.writer.write(".csv", csv.str());
  ctx.writer.write(".json", out.dump(2) + "\n");
  report.summary = summary.str();
}

void norm_table(Context& ctx, RunReport& report) {
  const ModelSpec& model = need(ctx.config.model, "model");
  if (model.lattice.dim() != 2) invalid("model.lattice.dim", "must be 2 for norm-table");
  const EventConfig& ev = need(ctx.config.event, "event");
  const Node nt = Node(ctx.root, "").child("norm_table");
  const int count = nt.get<int>("directions");
  if (count < 3) invalid(nt.key("directions"), "must be at least 3");
  const std::string estimator = nt.get_or<std::string>("estimator", "slope");
  if (estimator != "slope" && estimator != "endpoint") invalid(nt.key("estimator"), "must be slope or endpoint");
  const bool optimistic = nt.get_or<std::string>("bracket", "pessimistic") == "optimistic";
  NormTable table;
  table.closure = closure_from_string(nt.get_or<std::string>("closure", "convex_gauge"));
  table.symmetric = count % 2 == 0;
  json out = {{"manifest", ctx.manifest.to_json()}, {"model", model.describe()}, {"estimator", estimator}};
  for (int i = 0; i < count; ++i) {
    const Direction s = Direction::from_angle(2.0 * std::numbers::pi * i / count);
    const RateSequence seq = rate_sequence(model, ev.family(model.lattice, s), ev.n, ctx.mc);
    const RateFit& fit = optimistic ? seq.optimistic_fit : seq.fit;
    const double value = estimator == "slope" ? fit.slope : fit.endpoint;
    const double unc = estimator == "slope" ? fit.slope_half_width() : fit.endpoint_half_width();
    table.entries.push_back({s, value, unc});
    out["fits"].push_back({{"angle", s.angle()}, {"fit", fit_json(fit)}});
  }
  table.validate();
  const ConvexBody ball = unit_ball(table);
  out["convexity_defect"] = ball.convexity_defect;
  out["triangle_max_violation"] = triangle_check(table, nt.get_or<int>("triangle_trials", 2000), ctx.mc.seed);
  ctx.writer.write("_table.csv", ctx.manifest.comment() + to_csv(table));
  ctx.writer.write("_ball.csv", ctx.manifest.comment() + to_csv(ball));
  ctx.writer.write("_polar.csv", ctx.manifest.comment() + to_csv(polar_set(table)));
  ctx.writer.write(".json", out.dump(2) + "\n");
  report.summary = std::to_string(count) + " directions tabulated; convexity defect " + fmt(ball.convexity_defect) + "\n";
}

void duality_check(Context& ctx, RunReport& report) {
  const Node d = Node(ctx.root, "").child("duality");
  const NormTable pp = table_from_csv(read_file(resolve(ctx.config, d.get<std::string>("pp_table")), d.key("pp_table")));
  pp.validate();
  std::vector<Direction> dirs;
  for (const auto& e : pp.entries) dirs.push_back(e.direction);
  const NormTable hs = d.has("hs_table")
                           ? table_from_csv(read_file(resolve(ctx.config, d.get<std::string>("hs_table")), d.key("hs_table")))
                           : halfspace_table_from(pp, dirs);
  hs.validate();
  const double slack = d.get_or<double>("sigmas", 2.0);
  std::ostringstream csv;
  csv << ctx.manifest.comment() << "angle,s_star_angle,nu,nu_h,residual,uncertainty,within,minimizer\n";
  int within = 0, minimizer_ok = 0;
  double worst = 0.0;
  for (const auto& s : dirs) {
    const Residual r = duality_residual(pp, hs, s);
    const bool ok = std::abs(r.value) <= slack * r.uncertainty + 1e-9;
    const bool mini = minimizer_check(pp, s, r.pair.s_star).holds;
    within += ok;
    minimizer_ok += mini;
    worst = std::max(worst, std::abs(r.value));
    const double nu = extend_homogeneous(pp, s.vec());
    const double nu_h = extend_homogeneous(hs, r.pair.s_star.vec());
    csv << fmt(s.angle()) << "," << fmt(r.pair.s_star.angle()) << "," << fmt(nu) << "," << fmt(nu_h) << ","
        << fmt(r.value) << "," << fmt(r.uncertainty) << "," << (ok ? "true" : "false") << ","
        << (mini ? "true" : "false") << "\n";
  }
  const double tri = triangle_check(pp, d.get_or<int>("triangle_trials", 2000), ctx.mc.seed);
  const json out = {{"manifest", ctx.manifest.to_json()},
                    {"directions", dirs.size()},
                    {"within", within},
                    {"minimizer_holds", minimizer_ok},
                    {"max_abs_residual", worst},
                    {"triangle_max_violation", tri},
                    {"hs_table_derived", !d.has("hs_table")}};
  ctx.writer.write(".csv", csv.str());
  ctx.writer.write(".json", out.dump(2) + "\n");
  report.status = within == static_cast<int>(dirs.size()) ? 0 : 1;
  report.summary = std::to_string(within) + "/" + std::to_string(dirs.size()) + " residuals within " + fmt(slack) +
                   " sigma; max |residual| " + fmt(worst) + "\n";
}

void coarse_grain_demo(Context& ctx, RunReport& report) {
  const ModelSpec& model = need(ctx.config.model, "model");
  const Node cg = Node(ctx.root, "").child("coarse_grain");
  const CellSpec cell = box_cell(model.lattice, cg.get_or<int>("delta_radius", 1), cg.get<int>("k"));
  const int clusters = cg.get<int>("clusters");
  const int radius = cg.get_or<int>("box_radius", 40);
  if (clusters < 1) invalid(cg.key("clusters"), "must be positive");
  std::ostringstream csv, trees;
  csv << ctx.manifest.comment()
      << "cluster,vertices,truncated,tree_vertices,tree_edges,valid,round_trip,covering,covering_ok,max_degree,degree_ok\n";
  trees << ctx.manifest.comment();
  int valid = 0, round = 0, cover = 0, cover_exact = 0, degree = 0;
  for (int i = 0; i < clusters; ++i) {
    const SampledCluster sc = sample_cluster(model, stream_key(ctx.mc.seed, static_cast<std::uint64_t>(i)), radius);
    const CoarseTree t = coarse_grain(sc.cluster, cell);
    const bool v = is_valid_tree(t, cell).ok();
    bool rt = false;
    try {
      rt = reconstruct(t.vertices, cell) == t;
    } catch (const Error&) {
    }
    const int cd = covering_distance(sc.cluster, t);
    const int md = max_tree_degree(t);
    valid += v;
    round += rt;
    cover += cd <= cell.covering_bound();
    cover_exact += cd <= cell.covering_bound_exact();
    degree += md <= cell.max_degree();
    csv << i << "," << sc.cluster.vertices.size() << "," << (sc.truncated ? "true" : "false") << ","
        << t.vertices.size() << "," << t.edge_count() << "," << (v ? "true" : "false") << ","
        << (rt ? "true" : "false") << "," << cd << "," << (cd <= cell.covering_bound() ? "true" : "false") << ","
        << md << "," << (md <= cell.max_degree() ? "true" : "false") << "\n";
    trees << "# cluster " << i << "\n" << to_text(t);
  }
  const json out = {{"manifest", ctx.manifest.to_json()},
                    {"model", model.describe()},
                    {"clusters", clusters},
                    {"valid", valid},
                    {"round_trip", round},
                    {"covering_bound", cell.covering_bound()},
                    {"covering_ok", cover},
                    {"covering_bound_with_range", cell.covering_bound_exact()},
                    {"covering_with_range_ok", cover_exact},
                    {"max_degree_bound", cell.max_degree()},
                    {"degree_ok", degree}};
  ctx.writer.write(".csv", csv.str());
  ctx.writer.write("_trees.txt", trees.str());
  ctx.writer.write(".json", out.dump(2) + "\n");
  const bool all = valid == clusters && round == clusters && cover_exact == clusters && degree == clusters;
  report.status = all ? 0 : 1;
  report.summary = std::to_string(valid) + "/" + std::to_string(clusters) + " valid, " + std::to_string(round) +
                   " round trips, " + std::to_string(cover) + " within covering bound " +
                   std::to_string(cell.covering_bound()) + ", " + std::to_string(cover_exact) + " within " +
                   std::to_string(cell.covering_bound_exact()) + " (range included), " + std::to_string(degree) +
                   " within degree bound\n";
}

std::function<double(long)> parse_defect(const Node& n) {
  const std::string kind = n.get<std::string>("kind");
  const double c = n.get_or<double>("c", 1.0);
  const double offset = n.get_or<double>("offset", 0.0);
  if (kind == "zero") return [](long) { return 0.0; };
  if (kind == "constant") return [c](long) { return c; };
  if (kind == "sqrt") return [c, offset](long m) { return offset + c * std::sqrt(static_cast<double>(m)); };
  if (kind == "log_squared")
    return [c, offset](long m) { return offset + c * std::pow(std::log(static_cast<double>(m)), 2); };
  invalid(n.key("kind"), "must be zero, constant, sqrt or log_squared");
}

std::function<long(long)> parse_shift(const Node& n) {
  const std::string kind = n.get<std::string>("kind");
  const double c = n.get_or<double>("c", 1.0);
  if (kind == "zero") return [](long) { return 0L; };
  if (kind == "constant") return [c](long) { return static_cast<long>(c); };
  if (kind == "log_squared")
    return [c](long m) { return static_cast<long>(std::floor(c * std::pow(std::log(static_cast<double>(m)), 2))); };
  invalid(n.key("kind"), "must be zero, constant or log_squared");
}

/// Sequence file: one value per line, or CSV with a header naming columns `a` and optionally `uncertainty`.
void read_sequence(const std::string& text, const std::string& key, std::vector<double>& a, std::vector<double>& u) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  long a_col = 0, u_col = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with('#')) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) {
        const auto ia = std::find(cells.begin(), cells.end(), "a");
        if (ia == cells.end()) invalid(key, "header must name a column 'a'");
        a_col = ia - cells.begin();
        const auto iu = std::find(cells.begin(), cells.end(), "uncertainty");
        if (iu != cells.end()) u_col = iu - cells.begin();
        continue;
      }
    }
    try {
      a.push_back(std::stod(cells.at(static_cast<std::size_t>(a_col))));
      if (u_col >= 0) u.push_back(std::stod(cells.at(static_cast<std::size_t>(u_col))));
    } catch (const std::exception&) {
      invalid(key, "has an unreadable row '" + line + "'");
    }
  }
}

void fekete(Context& ctx, RunReport& report) {
  const Node f = Node(ctx.root, "").child("fekete");
  std::vector<double> a, u;
  if (f.has("sequence")) {
    a = f.numbers("sequence");
    if (f.has("uncertainty")) u = f.numbers("uncertainty");
  } else {
    read_sequence(read_file(resolve(ctx.config, f.get<std::string>("file")), f.key("file")), f.key("file"), a, u);
  }
  if (a.empty()) invalid(f.key("sequence"), "is empty");
  if (!u.empty() && u.size() != a.size()) invalid(f.key("uncertainty"), "must match the sequence length");
  const FeketeReport rep = fekete_check(a, parse_defect(f.child("f")), parse_shift(f.child("g")), f.get_or<long>("n0", 1),
                                        f.get<double>("c_minus"), f.get<double>("c_plus"), u.empty() ? nullptr : &u);
  std::ostringstream csv;
  csv << ctx.manifest.comment() << "n,m,lhs,rhs,excused\n";
  auto row = [&](const FeketeViolation& v) {
    csv << v.n << "," << v.m << "," << fmt(v.lhs) << "," << fmt(v.rhs) << "," << (v.excused ? "true" : "false") << "\n";
  };
  for (const auto& v : rep.violations) row(v);
  for (const auto& v : rep.excused) row(v);
  const json out = {{"manifest", ctx.manifest.to_json()},   {"holds", rep.holds},
                    {"vacuous", rep.vacuous},               {"pairs_checked", rep.pairs_checked},
                    {"violations", rep.violations.size()},  {"excused", rep.excused.size()},
                    {"limit_estimate", finite(rep.limit_estimate)}, {"bounds_ok", rep.bounds_ok}};
  ctx.writer.write(".csv", csv.str());
  ctx.writer.write(".json", out.dump(2) + "\n");
  report.status = rep.holds ? 0 : 1;
  report.summary = std::string(rep.holds ? "holds" : "violated") + (rep.vacuous ? " (vacuously)" : "") + "; " +
                   std::to_string(rep.violations.size()) + " violations, " + std::to_string(rep.excused.size()) +
                   " excused; limit estimate " + fmt(rep.limit_estimate) + "\n";
}

void oracle(Context& ctx, RunReport& report) {
  const Node root(ctx.root, "");
  static const json empty = json::object();
  const Node o = root.has("oracle") ? root.child("oracle") : Node(empty, "oracle");
  const int cases = o.get_or<int>("cases", 20);
  const int max_vars = o.get_or<int>("max_vars", 18);
  const int min_covered = o.get_or<int>("min_covered", cases - cases / 10);
  if (cases < 1) invalid(o.key("cases"), "must be positive");
  const OracleReport rep = oracle_test(cases, ctx.mc, max_vars);
  std::ostringstream csv;
  csv << ctx.manifest.comment() << "case,variables,exact,p_hat,ci_lo,ci_hi,covered,description\n";
  for (std::size_t i = 0; i < rep.outcomes.size(); ++i) {
    const auto& c = rep.outcomes[i];
    csv << i << "," << c.oracle_case.variables << "," << fmt(c.oracle_case.exact) << "," << fmt(c.estimate.p_hat)
        << "," << fmt(c.estimate.ci_lo) << "," << fmt(c.estimate.ci_hi) << "," << (c.covered ? "true" : "false")
        << "," << csv_quote(c.oracle_case.description) << "\n";
  }
  const bool pass = rep.covered >= min_covered;
  const json out = {{"manifest", ctx.manifest.to_json()},
                    {"cases", cases},
                    {"covered", rep.covered},
                    {"required", min_covered},
                    {"ci_level", ctx.mc.ci_level},
                    {"pass", pass}};
  ctx.writer.write(".csv", csv.str());
  ctx.writer.write(".json", out.dump(2) + "\n");
  report.status = pass ? 0 : 1;
  report.summary = std::to_string(rep.covered) + "/" + std::to_string(cases) + " exact values inside their " +
                   fmt(100 * ctx.mc.ci_level) + "% intervals (" + (pass ? "pass" : "fail") + ")\n";
}

}  // namespace

// ---------------------------------------------------------------- public API

EventFamily EventConfig::family(const LatticeSpec& lattice, const Direction& s) const {
  const EventConfig e = *this;
  return [e, lattice, s](double n) -> EventSpec {
    if (e.kind == "q") return q_event(lattice, e.cone_axis.value_or(s), e.delta, s, n, e.alpha);
    if (e.kind == "half_space") return half_space_event(lattice, s, n, e.alpha, e.coarse);
    if (e.kind == "constrained_half_space") return constrained_half_space_event(lattice, s, n, e.alpha, e.coarse);
    return point_event(lattice, s, n, e.alpha, e.coarse);
  };
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text);
  const Node root(j, "");
  ExperimentConfig c;
  c.canonical = j.dump();
  c.hash = fnv1a(c.canonical);
  c.base_dir = base_dir;
  if (root.has("model")) c.model = parse_model(root.child("model"));
  if (root.has("event")) {
    const int dim = c.model ? c.model->lattice.dim() : 2;
    c.event = parse_event(root.child("event"), dim);
  }
  if (!root.has("mc")) invalid("mc", "section is missing; mc.seed is mandatory");
  c.mc = parse_mc(root.child("mc"));
  if (root.has("output")) {
    const Node o = root.child("output");
    c.output.dir = o.get_or<std::string>("dir", ".");
    c.output.prefix = o.get_or<std::string>("prefix", "");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot read config file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"estimate-rate",     "norm-table",   "duality-check",
                                              "coarse-grain-demo", "fekete-check", "oracle-test"};
  return names;
}

RunReport run(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw Error(ErrorKind::ConfigInvalid, "unknown subcommand '" + subcommand + "'");
  MCConfig mc = need(config.mc, "mc");
  if (options.workers) mc.workers = std::max(1, *options.workers);
  RunReport report;
  Manifest manifest{config.hash, mc.seed, subcommand};
  Context ctx{config, json::parse(config.canonical), manifest, mc,
              Writer(options.output_dir.value_or(config.output.dir),
                     config.output.prefix.empty() ? subcommand : config.output.prefix, report)};
  if (subcommand == "estimate-rate") estimate_rate(ctx, report);
  if (subcommand == "norm-table") norm_table(ctx, report);
  if (subcommand == "duality-check") duality_check(ctx, report);
  if (subcommand == "coarse-grain-demo") coarse_grain_demo(ctx, report);
  if (subcommand == "fekete-check") fekete(ctx, report);
  if (subcommand == "oracle-test") oracle(ctx, report);
  return report;
}

RunReport run(const std::string& subcommand, const std::filesystem::path& config_path, const RunOptions& options) {
  return run(subcommand, load_config(config_path), options);
}

}  // namespace percolab
