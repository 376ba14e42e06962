#include "lingbayes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "lingbayes/error.hpp"

namespace lingbayes {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() {
  boost::random::uniform_01<double> dist;
  return dist(engine_);
}

double Rng::normal() {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) fail(ErrorCode::InvalidArgument, "gamma shape must be positive");
  boost::random::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

double Rng::inv_gamma(double shape, double scale) {
  if (!(scale > 0.0)) fail(ErrorCode::InvalidArgument, "inverse-gamma scale must be positive");
  return scale / gamma(shape);
}

std::size_t Rng::categorical_log(std::span<const double> log_weights) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (top == -std::numeric_limits<double>::infinity()) {
    fail(ErrorCode::InvalidArgument, "categorical draw with all-zero weights");
  }
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  double u = uniform() * total;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    u -= std::exp(log_weights[k] - top);
    if (u < 0.0) return k;
  }
  // Rounding can leave u marginally positive; take the last nonzero entry.
  for (std::size_t k = log_weights.size(); k-- > 0;) {
    if (log_weights[k] != -std::numeric_limits<double>::infinity()) return k;
  }
  return 0;
}

}  // namespace lingbayes
