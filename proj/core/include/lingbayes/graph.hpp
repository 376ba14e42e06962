#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace lingbayes {

// A directed edge source -> target. Node indices are 0-based in the library
// and 1-based in every text format.
struct Edge {
  int source = 0;
  int target = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Binary edge-indicator matrix E over p labeled nodes, with E(i, j) == true
// meaning the edge j -> i (so the parents of i are the set bits of row i).
class Graph {
 public:
  Graph() = default;
  explicit Graph(int p);

  int size() const noexcept { return p_; }

  bool operator()(int i, int j) const { return bits_[index(i, j)] != 0; }
  void set(int i, int j, bool present);
  void add(const Edge& e) { set(e.target, e.source, true); }

  std::vector<int> parents(int i) const;
  int edge_count() const noexcept;
  // Edges sorted by (target, source).
  std::vector<Edge> edges() const;

  // True when a directed path from -> ... -> to exists (from == to counts).
  bool reaches(int from, int to) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t index(int i, int j) const;

  int p_ = 0;
  std::vector<std::uint8_t> bits_;
};

Graph graph_from_edges(int p, const std::vector<Edge>& edges);

bool is_acyclic(const Graph& g);

enum class ShdMode { Standard, Hamming };

// Standard mode prices a single-edge reversal at 1; Hamming mode counts
// differing ordered pairs, so a reversal costs 2.
int shd(const Graph& g1, const Graph& g2, ShdMode mode = ShdMode::Standard);

// Structural intervention distance of an estimated DAG from a true DAG:
// the number of ordered pairs (i, j) whose interventional distribution
// p(x_j | do(x_i)) is not recovered by adjusting for the parents of i in
// g_est. Throws CyclicInput when either graph has a cycle.
int sid(const Graph& g_true, const Graph& g_est);

enum class MotifMode { AllPresent, ExactInduced };

struct MotifSpec {
  std::vector<Edge> required_edges;
  std::vector<int> node_set;
  MotifMode mode = MotifMode::AllPresent;
};

// Builds a motif whose node set is the set of edge endpoints.
MotifSpec make_motif(std::vector<Edge> required_edges, MotifMode mode = MotifMode::AllPresent);
void validate_motif(const MotifSpec& m);

bool contains_motif(const Graph& g, const MotifSpec& m);

// "i<j;..." with 1-based (target, source) pairs in lexicographic order.
std::string canonical_key(const Graph& g);

enum class DistanceKind { ShdStandard, ShdHamming, Sid, Custom };

struct GraphDistance {
  DistanceKind kind = DistanceKind::ShdStandard;
  std::function<double(const Graph&, const Graph&)> custom_fn;

  double operator()(const Graph& a, const Graph& b) const;
};

// Adjacency text format: p on the first line, then one "source target" pair
// per line, 1-based.
Graph read_adjacency(std::istream& in);
Graph read_adjacency_file(const std::string& path);
void write_adjacency(std::ostream& out, const Graph& g);

}  // namespace lingbayes
