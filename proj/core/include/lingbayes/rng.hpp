#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lingbayes {

// Seeded generator owned by a single chain. Distributions come from
// Boost.Random, whose output is specified exactly (the <random> distributions
// are implementation-defined), so identical seeds give identical draws on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream for chain `stream` of a run seeded with `seed`.
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();                       // [0, 1)
  double normal();                        // N(0, 1)
  double normal(double mean, double sd);
  double gamma(double shape);             // unit scale
  double beta(double a, double b);
  // Inverse-Gamma with density proportional to x^{-shape-1} exp(-scale/x).
  double inv_gamma(double shape, double scale);
  // Index drawn with probability proportional to exp(log_weights[k]).
  std::size_t categorical_log(std::span<const double> log_weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lingbayes
