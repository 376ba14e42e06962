#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lingbayes/graph.hpp"
#include "oracles/oracles.hpp"

namespace testing_support {

inline oracle::Adj to_adj(const lingbayes::Graph& g) {
  oracle::Adj a = oracle::empty_adj(g.size());
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j) a[i][j] = g(i, j) ? 1 : 0;
  return a;
}

inline lingbayes::Graph from_adj(const oracle::Adj& a) {
  lingbayes::Graph g(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[i][j]) g.set(static_cast<int>(i), static_cast<int>(j), true);
  return g;
}

// Fresh scratch directory under the system temp path, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::string& path);

// Runs the command-line frontend in-process.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace testing_support
