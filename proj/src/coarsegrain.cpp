#include "percolab/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "percolab/error.hpp"

namespace percolab {

CellSpec make_cell_spec(const LatticeSpec& lattice, std::vector<Point> delta, int k) {
  if (k < 1) throw Error(ErrorKind::ConfigInvalid, "K must be at least 1");
  const Point origin(lattice.dim());
  CellSpec c;
  c.lattice_ = lattice;
  c.k_ = k;
  for (const auto& x : delta)
    if (x.dim() != lattice.dim()) throw Error(ErrorKind::DimensionMismatch, "cell point dimension");
  std::sort(delta.begin(), delta.end());
  delta.erase(std::unique(delta.begin(), delta.end()), delta.end());
  if (!std::binary_search(delta.begin(), delta.end(), origin))
    throw Error(ErrorKind::ConfigInvalid, "the unit cell must contain 0");
  c.delta_ = delta;
  c.delta_set_.insert(delta.begin(), delta.end());
  for (const auto& x : delta) {
    c.radius_ = std::max(c.radius_, x.linf_norm());
    const PointSet b = box_at(x, k);
    c.delta_k_.insert(b.begin(), b.end());
  }
  const PointSet ext = exterior_boundary(lattice, c.delta_k_);
  c.boundary_k_.assign(ext.begin(), ext.end());
  std::sort(c.boundary_k_.begin(), c.boundary_k_.end());
  c.boundary_k_set_ = ext;
  return c;
}

CellSpec box_cell(const LatticeSpec& lattice, int r, int k) {
  const PointSet b = box(lattice.dim(), r);
  return make_cell_spec(lattice, std::vector<Point>(b.begin(), b.end()), k);
}

// ---------------------------------------------------------------- algorithm

namespace {

using Adjacency = std::unordered_map<Point, std::vector<Point>, PointHash>;

Adjacency adjacency_of(const Cluster& cluster) {
  Adjacency adj;
  for (const auto& v : cluster.vertices) adj[v];
  for (const auto& e : cluster.edges) {
    const auto ia = adj.find(e.a);
    const auto ib = adj.find(e.b);
    if (ia == adj.end() || ib == adj.end())
      throw Error(ErrorKind::NotConnected, "edge " + e.a.str() + "-" + e.b.str() + " leaves the vertex set");
    ia->second.push_back(e.b);
    ib->second.push_back(e.a);
  }
  return adj;
}

void check_cluster(const Cluster& cluster, const Adjacency& adj, const Point& origin) {
  if (!cluster.vertices.contains(origin)) throw Error(ErrorKind::ZeroNotInCluster, "0 is not a cluster vertex");
  PointSet seen{origin};
  std::vector<Point> queue{origin};
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (const auto& y : adj.at(queue[h]))
      if (seen.insert(y).second) queue.push_back(y);
  if (seen.size() != cluster.vertices.size())
    throw Error(ErrorKind::NotConnected, std::to_string(cluster.vertices.size() - seen.size()) +
                                             " vertices are not connected to 0");
}

/// z <-> ext(z + Delta) through (z + Delta) \ V along cluster edges.
bool exits_cell(const Point& z, const Adjacency& adj, const PointSet& v, const CellSpec& cell) {
  PointSet seen{z};
  std::vector<Point> queue{z};
  for (std::size_t h = 0; h < queue.size(); ++h) {
    for (const auto& y : adj.at(queue[h])) {
      if (!cell.delta_set().contains(y - z)) return true;
      if (v.contains(y)) continue;
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  return false;
}

Point smallest_parent(const Point& child, const std::vector<Point>& chosen, const CellSpec& cell) {
  std::optional<Point> best;
  for (const auto& t : chosen)
    if (cell.in_boundary_k(child - t) && (!best || t < *best)) best = t;
  return *best;
}

std::optional<CoarseTree> try_reconstruct(const std::vector<Point>& w, const CellSpec& cell) {
  const Point origin(cell.lattice().dim());
  std::vector<Point> rest(w);
  std::sort(rest.begin(), rest.end());
  if (std::adjacent_find(rest.begin(), rest.end()) != rest.end()) return std::nullopt;
  const auto root = std::lower_bound(rest.begin(), rest.end(), origin);
  if (root == rest.end() || *root != origin) return std::nullopt;
  rest.erase(root);
  CoarseTree t;
  t.vertices.push_back(origin);
  while (!rest.empty()) {
    auto it = std::find_if(rest.begin(), rest.end(), [&](const Point& x) {
      return std::any_of(t.vertices.begin(), t.vertices.end(),
                         [&](const Point& v) { return cell.in_boundary_k(x - v); });
    });
    if (it == rest.end()) return std::nullopt;
    const Point x = *it;
    rest.erase(it);
    t.edges.emplace_back(x, smallest_parent(x, t.vertices, cell));
    t.vertices.push_back(x);
  }
  return t;
}

}  // namespace

CoarseTree coarse_grain(const Cluster& cluster, const CellSpec& cell) {
  const Point origin(cell.lattice().dim());
  const Adjacency adj = adjacency_of(cluster);
  check_cluster(cluster, adj, origin);

  std::vector<Point> order(cluster.vertices.begin(), cluster.vertices.end());
  std::sort(order.begin(), order.end());
  const auto& offs = cell.lattice().offsets();

  CoarseTree tree;
  tree.vertices.push_back(origin);
  PointSet v = cell.delta_k();
  while (true) {
    // Only cluster vertices can start a connection, so A lies inside the cluster.
    std::optional<Point> next;
    for (const auto& z : order) {
      if (v.contains(z)) continue;
      const bool on_boundary = std::any_of(offs.begin(), offs.end(), [&](const Point& g) { return v.contains(z + g); });
      if (!on_boundary || !exits_cell(z, adj, v, cell)) continue;
      next = z;
      break;
    }
    if (!next) break;
    tree.edges.emplace_back(*next, smallest_parent(*next, tree.vertices, cell));
    tree.vertices.push_back(*next);
    for (const auto& x : cell.delta_k()) v.insert(x + *next);
  }
  return tree;
}

TreeValidity is_valid_tree(const CoarseTree& tree, const CellSpec& cell) {
  TreeValidity r;
  const auto& t = tree.vertices;
  const auto& f = tree.edges;
  const Point origin(cell.lattice().dim());

  PointSet set(t.begin(), t.end());
  if (set.size() != t.size()) {
    r.distinct = false;
    r.diagnostics.push_back("a vertex occurs more than once");
  }

  if (t.empty() || f.size() + 1 != t.size()) {
    r.is_tree = false;
    r.diagnostics.push_back("edge count is not vertex count minus one");
  } else {
    std::unordered_map<Point, std::vector<Point>, PointHash> adj;
    bool endpoints_ok = true;
    for (const auto& e : f) {
      if (!set.contains(e.a) || !set.contains(e.b) || e.a == e.b) endpoints_ok = false;
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
    PointSet seen{t.front()};
    std::vector<Point> queue{t.front()};
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (const auto& y : adj[queue[h]])
        if (seen.insert(y).second) queue.push_back(y);
    if (!endpoints_ok || seen.size() != set.size()) {
      r.is_tree = false;
      r.diagnostics.push_back("(t, f) is not a connected graph on t");
    }
  }

  if (t.empty() || t.front() != origin) {
    r.embedded = false;
    r.diagnostics.push_back("t_0 is not the origin");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (i - 1 >= f.size()) break;
    const Edge& e = f[i - 1];
    if (e.a != t[i] && e.b != t[i]) {
      r.embedded = false;
      r.diagnostics.push_back("f_" + std::to_string(i) + " does not contain t_" + std::to_string(i));
      continue;
    }
    const Point& other = e.a == t[i] ? e.b : e.a;
    if (!cell.in_boundary_k(t[i] - other)) {
      r.embedded = false;
      r.diagnostics.push_back("t_" + std::to_string(i) + " " + t[i].str() + " is not on the exterior boundary of " +
                              "Delta_K + " + other.str());
    }
  }

  const auto rec = try_reconstruct(t, cell);
  if (!rec || !(*rec == tree)) {
    r.reconstructible = false;
    r.diagnostics.push_back(rec ? "reconstruction yields different labels or edges"
                                : "the vertex set is not reconstructible");
  }
  return r;
}

CoarseTree reconstruct(const std::vector<Point>& vertices, const CellSpec& cell) {
  const Point origin(cell.lattice().dim());
  if (std::find(vertices.begin(), vertices.end(), origin) == vertices.end())
    throw Error(ErrorKind::NotReconstructible, "the vertex set does not contain 0");
  auto t = try_reconstruct(vertices, cell);
  if (!t) throw Error(ErrorKind::NotReconstructible, "some vertex never becomes eligible");
  return *t;
}

std::vector<CoarseTree> enumerate_trees(const CellSpec& cell, int l, std::optional<int> window, int max_l) {
  if (l < 1) throw Error(ErrorKind::ConfigInvalid, "tree size must be positive");
  if (l > max_l) throw Error(ErrorKind::TooLarge, "tree size " + std::to_string(l) + " exceeds the guard " +
                                                      std::to_string(max_l));
  constexpr std::size_t kMaxSets = 5'000'000;
  const Point origin(cell.lattice().dim());
  std::set<std::vector<Point>> level{{origin}};
  for (int size = 1; size < l; ++size) {
    std::set<std::vector<Point>> next;
    for (const auto& s : level) {
      PointSet candidates;
      for (const auto& v : s)
        for (const auto& b : cell.boundary_k()) {
          const Point x = v + b;
          if (window && x.linf_norm() > *window) continue;
          if (!std::binary_search(s.begin(), s.end(), x)) candidates.insert(x);
        }
      for (const auto& x : candidates) {
        std::vector<Point> w(s);
        w.insert(std::upper_bound(w.begin(), w.end(), x), x);
        if (next.contains(w) || !try_reconstruct(w, cell)) continue;
        next.insert(std::move(w));
        if (next.size() > kMaxSets) throw Error(ErrorKind::TooLarge, "too many trees to enumerate");
      }
    }
    level = std::move(next);
  }
  std::vector<CoarseTree> out;
  out.reserve(level.size());
  for (const auto& w : level) out.push_back(*try_reconstruct(w, cell));
  return out;
}

std::uint64_t regular_tree_subtrees(std::uint64_t degree, int l) {
  if (l < 1) return 0;
  using Poly = std::vector<unsigned __int128>;
  const auto n = static_cast<std::size_t>(l);
  constexpr unsigned __int128 cap = std::numeric_limits<std::uint64_t>::max();
  auto mul = [&](const Poly& a, const Poly& b) {
    Poly c(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; i + j < n; ++j) {
        if (!a[i] || !b[j]) continue;
        if (a[i] > cap || b[j] > cap) throw Error(ErrorKind::TooLarge, "subtree count overflow");
        c[i + j] += a[i] * b[j];
      }
    return c;
  };
  auto power = [&](Poly base, std::uint64_t e) {
    Poly r(n, 0);
    r[0] = 1;
    while (e) {
      if (e & 1U) r = mul(r, base);
      e >>= 1U;
      if (e) base = mul(base, base);
    }
    return r;
  };
  // Series in x truncated at x^l, stored shifted by one: a[i] is the coefficient of x^{i+1}.
  // A = x (1 + A)^{D-1} counts subtrees hanging below a non-root vertex.
  Poly a(n, 0);
  for (int it = 0; it < l; ++it) {
    Poly one_plus(n, 0);
    one_plus[0] = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) one_plus[i + 1] += a[i];
    a = power(one_plus, degree == 0 ? 0 : degree - 1);
  }
  Poly one_plus(n, 0);
  one_plus[0] = 1;
  for (std::size_t i = 0; i + 1 < n; ++i) one_plus[i + 1] += a[i];
  const Poly root = power(one_plus, degree);
  if (root[n - 1] > cap) throw Error(ErrorKind::TooLarge, "subtree count overflow");
  return static_cast<std::uint64_t>(root[n - 1]);
}

double energy_bound_rhs(double p_exit, const CellSpec& cell, double c_mix, int tree_edges, double dependence_range) {
  if (tree_edges < 0) throw Error(ErrorKind::ConfigInvalid, "tree edge count must be nonnegative");
  const double correction = cell.k() > dependence_range
                                ? 0.0
                                : static_cast<double>(cell.delta().size()) * std::exp(-c_mix * cell.k() / 2.0);
  return std::pow(p_exit * (1.0 + correction), tree_edges);
}

double energy_bound_rhs(const ProbEstimate& p_exit, const CellSpec& cell, double c_mix, int tree_edges,
                        double dependence_range) {
  return energy_bound_rhs(p_exit.p_hat, cell, c_mix, tree_edges, dependence_range);
}

EventSpec exit_cell_event(const CellSpec& cell) {
  const auto& lattice = cell.lattice();
  EventSpec ev;
  ev.kind = EventKind::Custom;
  ev.coarse = false;
  ev.medium = Region::full_space(lattice.dim());
  ev.window_radius = cell.radius() + lattice.linf_range();
  ev.source = {Point(lattice.dim())};
  for (const auto& z : box(lattice.dim(), ev.window_radius))
    if (!cell.delta_set().contains(z)) ev.target.push_back(z);
  std::sort(ev.target.begin(), ev.target.end());
  return ev;
}

int covering_distance(const Cluster& cluster, const CoarseTree& tree) {
  int worst = 0;
  for (const auto& x : cluster.vertices) {
    int best = std::numeric_limits<int>::max();
    for (const auto& t : tree.vertices) best = std::min(best, (x - t).linf_norm());
    worst = std::max(worst, best);
  }
  return worst;
}

int max_tree_degree(const CoarseTree& tree) {
  std::unordered_map<Point, int, PointHash> deg;
  int worst = 0;
  for (const auto& e : tree.edges) {
    worst = std::max(worst, ++deg[e.a]);
    worst = std::max(worst, ++deg[e.b]);
  }
  return worst;
}

SampledCluster sample_cluster(const ModelSpec& model, std::uint64_t key, int radius) {
  const EdgeOracle oracle(model, key);
  const Point origin(model.lattice.dim());
  SampledCluster s;
  s.cluster = cluster_of(model.lattice, oracle, origin, [&](const Point& q) { return q.linf_norm() <= radius; });
  const int inner = radius - model.lattice.linf_range();
  s.truncated = std::any_of(s.cluster.vertices.begin(), s.cluster.vertices.end(),
                            [&](const Point& x) { return x.linf_norm() > inner; });
  return s;
}

// ---------------------------------------------------------------- text format

namespace {

std::string coords(const Point& p) {
  std::string s;
  for (int i = 0; i < p.dim(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s;
}

Point parse_coords(const std::string& tok) {
  std::vector<int> xs;
  std::stringstream ss(tok);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      xs.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigInvalid, "bad coordinate '" + part + "' in tree text");
    }
  }
  if (xs.empty() || xs.size() > static_cast<std::size_t>(kMaxDim))
    throw Error(ErrorKind::ConfigInvalid, "bad point '" + tok + "' in tree text");
  return Point::from(xs);
}

}  // namespace

std::string to_text(const CoarseTree& tree) {
  std::string out;
  for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
    out += coords(tree.vertices[i]);
    if (i > 0 && i - 1 < tree.edges.size()) {
      const Edge& e = tree.edges[i - 1];
      out += ' ' + coords(e.a == tree.vertices[i] ? e.b : e.a);
    }
    out += '\n';
  }
  return out;
}

CoarseTree tree_from_text(const std::string& text) {
  CoarseTree tree;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.empty() || toks.front().starts_with('#')) continue;
    const bool root = tree.vertices.empty();
    if (toks.size() != (root ? 1U : 2U)) throw Error(ErrorKind::ConfigInvalid, "malformed tree line '" + line + "'");
    const Point v = parse_coords(toks[0]);
    if (!root) {
      const Point parent = parse_coords(toks[1]);
      if (std::find(tree.vertices.begin(), tree.vertices.end(), parent) == tree.vertices.end())
        throw Error(ErrorKind::ConfigInvalid, "parent of '" + toks[0] + "' is not listed before it");
      tree.edges.emplace_back(v, parent);
    }
    tree.vertices.push_back(v);
  }
  return tree;
}

}  // namespace percolab
