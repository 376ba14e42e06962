#include "lingbayes/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "lingbayes/error.hpp"

namespace lingbayes {

Graph::Graph(int p) : p_(p) {
  if (p < 1) fail(ErrorCode::InvalidArgument, "graph needs at least one node");
  bits_.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0);
}

std::size_t Graph::index(int i, int j) const {
  if (i < 0 || j < 0 || i >= p_ || j >= p_) {
    fail(ErrorCode::IndexOutOfRange, fmt::format("node index ({}, {}) outside 0..{}", i, j, p_ - 1));
  }
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(j);
}

void Graph::set(int i, int j, bool present) {
  const std::size_t k = index(i, j);
  if (i == j && present) fail(ErrorCode::InvalidArgument, fmt::format("self-loop at node {}", i + 1));
  bits_[k] = present ? 1 : 0;
}

std::vector<int> Graph::parents(int i) const {
  std::vector<int> out;
  for (int j = 0; j < p_; ++j) {
    if ((*this)(i, j)) out.push_back(j);
  }
  return out;
}

int Graph::edge_count() const noexcept {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < p_; ++i) {
    for (int j = 0; j < p_; ++j) {
      if ((*this)(i, j)) out.push_back({j, i});
    }
  }
  return out;
}

bool Graph::reaches(int from, int to) const {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(p_), 0);
  std::vector<int> stack{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == to) return true;
    for (int v = 0; v < p_; ++v) {
      if ((*this)(v, u) && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return false;
}

Graph graph_from_edges(int p, const std::vector<Edge>& edges) {
  Graph g(p);
  for (const auto& e : edges) g.add(e);
  return g;
}

bool is_acyclic(const Graph& g) {
  // Kahn's algorithm: a topological order exists iff every node gets removed.
  const int p = g.size();
  std::vector<int> indegree(static_cast<std::size_t>(p), 0);
  for (int i = 0; i < p; ++i) indegree[static_cast<std::size_t>(i)] = static_cast<int>(g.parents(i).size());
  std::vector<int> ready;
  for (int i = 0; i < p; ++i) {
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  }
  int removed = 0;
  while (!ready.empty()) {
    const int u = ready.back();
    ready.pop_back();
    ++removed;
    for (int v = 0; v < p; ++v) {
      if (g(v, u) && --indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
  }
  return removed == p;
}

namespace {

void require_same_size(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch, fmt::format("graphs have {} and {} nodes", a.size(), b.size()));
  }
}

// Descendants (including the seeds themselves) of a node set.
std::vector<std::uint8_t> descendants(const Graph& g, const std::vector<std::uint8_t>& seeds) {
  const int p = g.size();
  std::vector<std::uint8_t> out = seeds;
  std::vector<int> stack;
  for (int u = 0; u < p; ++u) {
    if (out[static_cast<std::size_t>(u)]) stack.push_back(u);
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < p; ++v) {
      if (g(v, u) && !out[static_cast<std::size_t>(v)]) {
        out[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> ancestors(const Graph& g, const std::vector<std::uint8_t>& seeds) {
  const int p = g.size();
  std::vector<std::uint8_t> out = seeds;
  std::vector<int> stack;
  for (int u = 0; u < p; ++u) {
    if (out[static_cast<std::size_t>(u)]) stack.push_back(u);
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w = 0; w < p; ++w) {
      if (g(u, w) && !out[static_cast<std::size_t>(w)]) {
        out[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  return out;
}

// d-separation of a and b given z, via reachability in the moralized
// ancestral graph of {a, b} ∪ z with z removed.
bool d_separated(const Graph& g, int a, int b, const std::vector<std::uint8_t>& z) {
  const int p = g.size();
  auto seeds = z;
  seeds[static_cast<std::size_t>(a)] = 1;
  seeds[static_cast<std::size_t>(b)] = 1;
  const auto keep = ancestors(g, seeds);

  std::vector<std::uint8_t> adj(static_cast<std::size_t>(p * p), 0);
  auto link = [&](int u, int v) {
    adj[static_cast<std::size_t>(u * p + v)] = 1;
    adj[static_cast<std::size_t>(v * p + u)] = 1;
  };
  for (int v = 0; v < p; ++v) {
    if (!keep[static_cast<std::size_t>(v)]) continue;
    const auto pa = g.parents(v);
    for (std::size_t x = 0; x < pa.size(); ++x) {
      link(pa[x], v);
      for (std::size_t y = x + 1; y < pa.size(); ++y) link(pa[x], pa[y]);
    }
  }

  std::vector<std::uint8_t> seen(static_cast<std::size_t>(p), 0);
  std::vector<int> stack{a};
  seen[static_cast<std::size_t>(a)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == b) return false;
    for (int v = 0; v < p; ++v) {
      if (adj[static_cast<std::size_t>(u * p + v)] && keep[static_cast<std::size_t>(v)] &&
          !z[static_cast<std::size_t>(v)] && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return true;
}

// Parent adjustment by z for the effect of i on j is valid in g when no member
// of z descends from a node on a causal path i -> ... -> j (other than i), and
// z d-separates i and j once the first edges of those causal paths are cut.
bool valid_adjustment(const Graph& g, int i, int j, const std::vector<std::uint8_t>& z) {
  const int p = g.size();
  std::vector<std::uint8_t> causal(static_cast<std::size_t>(p), 0);
  for (int w = 0; w < p; ++w) {
    if (w != i && g.reaches(i, w) && g.reaches(w, j)) causal[static_cast<std::size_t>(w)] = 1;
  }
  const auto forbidden = descendants(g, causal);
  for (int w = 0; w < p; ++w) {
    if (z[static_cast<std::size_t>(w)] && forbidden[static_cast<std::size_t>(w)]) return false;
  }
  Graph cut = g;
  for (int w = 0; w < p; ++w) {
    if (causal[static_cast<std::size_t>(w)] && cut(w, i)) cut.set(w, i, false);
  }
  return d_separated(cut, i, j, z);
}

}  // namespace

int shd(const Graph& g1, const Graph& g2, ShdMode mode) {
  require_same_size(g1, g2);
  const int p = g1.size();
  int total = 0;
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      const bool x1 = g1(a, b), y1 = g1(b, a);
      const bool x2 = g2(a, b), y2 = g2(b, a);
      const int diff = (x1 != x2) + (y1 != y2);
      if (mode == ShdMode::Standard && diff == 2 && x1 != y1) {
        total += 1;  // a single reversal
      } else {
        total += diff;
      }
    }
  }
  return total;
}

int sid(const Graph& g_true, const Graph& g_est) {
  require_same_size(g_true, g_est);
  if (!is_acyclic(g_true) || !is_acyclic(g_est)) {
    fail(ErrorCode::CyclicInput, "SID is only applicable to DAGs");
  }
  const int p = g_true.size();
  int errors = 0;
  for (int i = 0; i < p; ++i) {
    std::vector<std::uint8_t> z(static_cast<std::size_t>(p), 0);
    for (int w : g_est.parents(i)) z[static_cast<std::size_t>(w)] = 1;
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      if (z[static_cast<std::size_t>(j)]) {
        // The estimate claims no effect of i on j.
        if (g_true.reaches(i, j)) ++errors;
      } else if (!valid_adjustment(g_true, i, j, z)) {
        ++errors;
      }
    }
  }
  return errors;
}

MotifSpec make_motif(std::vector<Edge> required_edges, MotifMode mode) {
  MotifSpec m;
  for (const auto& e : required_edges) {
    m.node_set.push_back(e.source);
    m.node_set.push_back(e.target);
  }
  std::sort(m.node_set.begin(), m.node_set.end());
  m.node_set.erase(std::unique(m.node_set.begin(), m.node_set.end()), m.node_set.end());
  m.required_edges = std::move(required_edges);
  m.mode = mode;
  validate_motif(m);
  return m;
}

void validate_motif(const MotifSpec& m) {
  auto in_set = [&](int v) { return std::find(m.node_set.begin(), m.node_set.end(), v) != m.node_set.end(); };
  for (const auto& e : m.required_edges) {
    if (e.source == e.target) fail(ErrorCode::InvalidArgument, fmt::format("motif self-loop at node {}", e.source + 1));
    if (!in_set(e.source) || !in_set(e.target)) {
      fail(ErrorCode::InvalidArgument,
           fmt::format("motif edge {}>{} has an endpoint outside the node set", e.source + 1, e.target + 1));
    }
  }
}

bool contains_motif(const Graph& g, const MotifSpec& m) {
  for (int v : m.node_set) {
    if (v < 0 || v >= g.size()) {
      fail(ErrorCode::IndexOutOfRange, fmt::format("motif node {} outside 1..{}", v + 1, g.size()));
    }
  }
  for (const auto& e : m.required_edges) {
    if (!g(e.target, e.source)) return false;
  }
  if (m.mode == MotifMode::AllPresent) return true;
  for (int target : m.node_set) {
    for (int source : m.node_set) {
      if (source == target || !g(target, source)) continue;
      const Edge e{source, target};
      if (std::find(m.required_edges.begin(), m.required_edges.end(), e) == m.required_edges.end()) return false;
    }
  }
  return true;
}

std::string canonical_key(const Graph& g) {
  std::string key;
  for (const auto& e : g.edges()) {
    if (!key.empty()) key += ';';
    key += fmt::format("{}<{}", e.target + 1, e.source + 1);
  }
  return key;
}

double GraphDistance::operator()(const Graph& a, const Graph& b) const {
  switch (kind) {
    case DistanceKind::ShdStandard:
      return shd(a, b, ShdMode::Standard);
    case DistanceKind::ShdHamming:
      return shd(a, b, ShdMode::Hamming);
    case DistanceKind::Sid:
      // The candidate plays the role of the estimate.
      return sid(b, a);
    case DistanceKind::Custom: {
      if (!custom_fn) fail(ErrorCode::InvalidArgument, "custom distance without a function");
      const double d = custom_fn(a, b);
      if (!(d >= 0.0)) fail(ErrorCode::InvalidArgument, fmt::format("custom distance returned {}", d));
      return d;
    }
  }
  return 0.0;
}

Graph read_adjacency(std::istream& in) {
  std::string line;
  int line_no = 0;
  int p = 0;
  while (p == 0 && std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    if (!(ls >> p)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      fail(ErrorCode::InvalidArgument, fmt::format("adjacency line {}: expected node count", line_no));
    }
  }
  if (p < 1) fail(ErrorCode::InvalidArgument, "adjacency file has no node count");
  Graph g(p);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int source = 0, target = 0;
    if (!(ls >> source >> target)) {
      fail(ErrorCode::InvalidArgument, fmt::format("adjacency line {}: expected 'source target'", line_no));
    }
    if (source < 1 || target < 1 || source > p || target > p) {
      fail(ErrorCode::IndexOutOfRange, fmt::format("adjacency line {}: node outside 1..{}", line_no, p));
    }
    if (source == target) fail(ErrorCode::InvalidArgument, fmt::format("adjacency line {}: self-loop", line_no));
    g.set(target - 1, source - 1, true);
  }
  return g;
}

Graph read_adjacency_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot open {}", path));
  return read_adjacency(in);
}

void write_adjacency(std::ostream& out, const Graph& g) {
  out << g.size() << '\n';
  for (const auto& e : g.edges()) out << e.source + 1 << ' ' << e.target + 1 << '\n';
}

}  // namespace lingbayes
