#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lingbayes/error.hpp"
#include "lingbayes/likelihood.hpp"
#include "lingbayes/rng.hpp"
#include "oracles/oracles.hpp"

using namespace lingbayes;

namespace {

struct RegressionCase {
  std::vector<double> y;
  std::vector<std::vector<double>> columns;
  std::vector<double> v;
  double gamma1;
  Eigen::MatrixXd X() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
      for (std::size_t q = 0; q < y.size(); ++q) x(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) = columns[c][q];
    return x;
  }
};

RegressionCase random_case(Rng& rng, int n, int k) {
  RegressionCase rc;
  rc.gamma1 = 0.2 + 2.0 * rng.uniform();
  rc.columns.assign(static_cast<std::size_t>(k), {});
  for (int q = 0; q < n; ++q) {
    rc.y.push_back(rng.normal(0.0, 1.5));
    rc.v.push_back(0.3 + 1.5 * rng.uniform());
    for (auto& col : rc.columns) col.push_back(rng.normal());
  }
  return rc;
}

NoiseModel gaussian_noise(const Eigen::VectorXd& means, const Eigen::VectorXd& variances) {
  NoiseModel noise;
  for (Eigen::Index i = 0; i < means.size(); ++i) noise.per_node.push_back(GaussianMixture{{1.0}, {means(i)}, {variances(i)}});
  return noise;
}

WeightedSem random_sem(Rng& rng, int p, bool acyclic_only) {
  WeightedSem sem{Graph(p), Eigen::MatrixXd::Zero(p, p)};
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j || (acyclic_only && j > i) || rng.uniform() < 0.4) continue;
      sem.graph.set(i, j, true);
      sem.B(i, j) = rng.normal(0.0, 0.6);
    }
  }
  return sem;
}

}  // namespace

TEST(CollapsedMarginal, NoParents) {
  const std::vector<double> y{0.3, -1.2, 2.0};
  const std::vector<double> v{1.0, 0.5, 2.0};
  double expected = 0.0;
  for (std::size_t q = 0; q < y.size(); ++q) {
    expected += -0.5 * std::log(2.0 * std::numbers::pi * v[q]) - 0.5 * y[q] * y[q] / v[q];
  }
  EXPECT_NEAR(collapsed_node_log_marginal(y, Eigen::MatrixXd(3, 0), v, 1.0), expected, 1e-12);
}

TEST(CollapsedMarginal, SingleObservationConvolution) {
  const std::vector<double> y{0.0}, v{1.0};
  EXPECT_NEAR(collapsed_node_log_marginal(y, Eigen::MatrixXd::Ones(1, 1), v, 1.0), -0.5 * std::log(4.0 * std::numbers::pi),
              1e-12);
}

TEST(CollapsedMarginal, MatchesQuadrature) {
  Rng rng(21);
  for (int rep = 0; rep < 12; ++rep) {
    const int k = 1 + rep % 2;
    const auto rc = random_case(rng, 5, k);
    const double lib = collapsed_node_log_marginal(rc.y, rc.X(), rc.v, rc.gamma1);
    EXPECT_NEAR(lib, oracle::collapsed_quadrature(rc.y, rc.columns, rc.v, rc.gamma1), 1e-6) << "k=" << k;
  }
}

TEST(CollapsedMarginal, SufficientStatisticsAgree) {
  Rng rng(22);
  const auto rc = random_case(rng, 40, 3);
  const auto stats = node_suff_stats(rc.y, rc.X(), rc.v);
  const std::vector<std::vector<int>> subsets{{}, {0}, {2}, {0, 1}, {1, 2}, {0, 1, 2}};
  for (const auto& s : subsets) {
    Eigen::MatrixXd Xs(rc.X().rows(), static_cast<Eigen::Index>(s.size()));
    for (std::size_t c = 0; c < s.size(); ++c) Xs.col(static_cast<Eigen::Index>(c)) = rc.X().col(s[c]);
    EXPECT_NEAR(collapsed_log_marginal(stats, s, rc.gamma1), collapsed_node_log_marginal(rc.y, Xs, rc.v, rc.gamma1),
                1e-9);
  }
}

TEST(CollapsedMarginal, SpikeLimit) {
  Rng rng(23);
  const auto rc = random_case(rng, 30, 2);
  const double pinned = collapsed_node_log_marginal(rc.y, Eigen::MatrixXd(30, 0), rc.v, 1.0);
  EXPECT_NEAR(collapsed_node_log_marginal(rc.y, rc.X(), rc.v, 1e-12), pinned, 1e-8);
  double previous_gap = std::abs(collapsed_node_log_marginal(rc.y, rc.X(), rc.v, 1e-2) - pinned);
  for (double g1 : {1e-4, 1e-6, 1e-8}) {
    const double gap = std::abs(collapsed_node_log_marginal(rc.y, rc.X(), rc.v, g1) - pinned);
    EXPECT_LE(gap, previous_gap);
    previous_gap = gap;
  }
}

TEST(CollapsedMarginal, RejectsNonPositiveScales) {
  const std::vector<double> y{1.0}, v{1.0}, bad_v{0.0};
  EXPECT_THROW(collapsed_node_log_marginal(y, Eigen::MatrixXd::Ones(1, 1), v, 0.0), Error);
  EXPECT_THROW(collapsed_node_log_marginal(y, Eigen::MatrixXd::Ones(1, 1), bad_v, 1.0), Error);
}

TEST(DrawCoefficients, MatchesConjugatePosteriorMoments) {
  Rng rng(24);
  const auto rc = random_case(rng, 20, 2);
  const auto stats = node_suff_stats(rc.y, rc.X(), rc.v);
  const std::vector<int> parents{0, 1};
  Eigen::MatrixXd prec = stats.gram;
  prec.diagonal().array() += 1.0 / rc.gamma1;
  const Eigen::VectorXd mean = prec.ldlt().solve(stats.cross);
  const Eigen::MatrixXd cov = prec.inverse();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(2);
  const int draws = 40000;
  for (int d = 0; d < draws; ++d) total += draw_coefficients(stats, parents, rc.gamma1, rng);
  const Eigen::VectorXd avg = total / draws;
  for (int c = 0; c < 2; ++c) EXPECT_NEAR(avg(c), mean(c), 4.0 * std::sqrt(cov(c, c) / draws));
}

TEST(CyclicLikelihood, ZeroCoefficients) {
  Rng rng(25);
  const int p = 3, n = 20;
  Eigen::MatrixXd Y(n, p);
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < p; ++i) Y(q, i) = rng.normal();
  NoiseModel noise;
  for (int i = 0; i < p; ++i) noise.per_node.push_back(GaussianMixture{{0.4, 0.6}, {-1.0, 0.5}, {0.5, 1.2}});
  double expected = 0.0;
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < p; ++i) expected += log_density(Y(q, i), noise.per_node[static_cast<std::size_t>(i)]);
  EXPECT_NEAR(cyclic_log_likelihood(Y, WeightedSem{Graph(p), Eigen::MatrixXd::Zero(p, p)}, noise), expected, 1e-10);
}

TEST(CyclicLikelihood, TwoCycleJacobian) {
  Rng rng(26);
  const int n = 7;
  Eigen::MatrixXd Y(n, 2);
  for (int q = 0; q < n; ++q) Y.row(q) << rng.normal(), rng.normal();
  WeightedSem sem{graph_from_edges(2, {{0, 1}, {1, 0}}), Eigen::MatrixXd(2, 2)};
  sem.B << 0.0, 0.5, 0.5, 0.0;
  NoiseModel noise{{GaussianMixture::standard(1), GaussianMixture::standard(1)}};
  const Eigen::MatrixXd E = Y * (Eigen::MatrixXd::Identity(2, 2) - sem.B).transpose();
  double density_part = 0.0;
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < 2; ++i) density_part += log_density(E(q, i), noise.per_node[static_cast<std::size_t>(i)]);
  EXPECT_NEAR(cyclic_log_likelihood(Y, sem, noise) - density_part, n * std::log(0.75), 1e-12);
  EXPECT_NEAR(log_abs_det_i_minus_b(sem.B), std::log(0.75), 1e-14);
}

TEST(CyclicLikelihood, GaussianCaseMatchesMultivariateNormal) {
  Rng rng(27);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 2 + rep % 3;
    const auto sem = random_sem(rng, p, false);
    Eigen::VectorXd means(p), vars(p);
    for (int i = 0; i < p; ++i) {
      means(i) = rng.normal(0.0, 0.5);
      vars(i) = 0.3 + rng.uniform();
    }
    Eigen::MatrixXd Y(1, p);
    for (int i = 0; i < p; ++i) Y(0, i) = rng.normal(0.0, 2.0);
    const double expected = oracle::sem_mvn_log_density(Y.row(0).transpose(), sem.B, means, vars);
    EXPECT_NEAR(cyclic_log_likelihood(Y, sem, gaussian_noise(means, vars)), expected, 1e-8);
  }
}

TEST(CyclicLikelihood, AcyclicEqualsProductOfConditionals) {
  Rng rng(28);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 4;
    const auto sem = random_sem(rng, p, true);
    ASSERT_TRUE(is_acyclic(sem.graph));
    NoiseModel noise;
    for (int i = 0; i < p; ++i) noise.per_node.push_back(GaussianMixture{{0.5, 0.5}, {-0.7, 0.7}, {0.3, 0.3}});
    Eigen::MatrixXd Y(10, p);
    for (int q = 0; q < 10; ++q)
      for (int i = 0; i < p; ++i) Y(q, i) = rng.normal();
    double expected = 0.0;
    for (int q = 0; q < 10; ++q) {
      for (int i = 0; i < p; ++i) {
        double r = Y(q, i);
        for (int j = 0; j < p; ++j) r -= sem.B(i, j) * Y(q, j);
        expected += log_density(r, noise.per_node[static_cast<std::size_t>(i)]);
      }
    }
    EXPECT_NEAR(cyclic_log_likelihood(Y, sem, noise), expected, 1e-10);
  }
}

TEST(CyclicLikelihood, SingularSystemIsAnError) {
  WeightedSem sem{graph_from_edges(2, {{0, 1}, {1, 0}}), Eigen::MatrixXd(2, 2)};
  sem.B << 0.0, 1.0, 1.0, 0.0;
  Eigen::MatrixXd Y = Eigen::MatrixXd::Ones(3, 2);
  try {
    cyclic_log_likelihood(Y, sem, NoiseModel{{GaussianMixture::standard(1), GaussianMixture::standard(1)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
  }
}

TEST(WeightedSem, SupportMustMatch) {
  WeightedSem sem{Graph(2), Eigen::MatrixXd::Zero(2, 2)};
  sem.B(1, 0) = 0.3;
  EXPECT_THROW(sem.validate(), Error);
}

TEST(Simulate, ZeroCoefficientsGiveNoiseMoments) {
  const int n = 20000;
  NoiseModel noise{{GaussianMixture{{1.0}, {1.5}, {2.0}}, GaussianMixture{{0.5, 0.5}, {-1.0, 3.0}, {0.5, 0.5}}}};
  const auto sim = simulate_sem(WeightedSem{Graph(2), Eigen::MatrixXd::Zero(2, 2)}, noise, n, 31);
  const Eigen::VectorXd means = sim.data.values.colwise().mean();
  EXPECT_NEAR(means(0), 1.5, 4.0 * std::sqrt(2.0 / n));
  const double var2 = 0.5 + 0.25 * 16.0;
  EXPECT_NEAR(means(1), 1.0, 4.0 * std::sqrt(var2 / n));
}

TEST(Simulate, ChainVariance) {
  const double b = 0.8;
  WeightedSem sem{graph_from_edges(2, {{0, 1}}), Eigen::MatrixXd::Zero(2, 2)};
  sem.B(1, 0) = b;
  const auto sim = simulate_sem(sem, NoiseModel{{GaussianMixture::standard(1), GaussianMixture::standard(1)}}, 100000, 32);
  const Eigen::VectorXd y2 = sim.data.values.col(1);
  const double var = (y2.array() - y2.mean()).square().sum() / (y2.size() - 1);
  EXPECT_NEAR(var / (b * b + 1.0), 1.0, 0.05);
  EXPECT_FALSE(sim.unstable);
}

TEST(Simulate, SameSeedSameData) {
  WeightedSem sem{graph_from_edges(3, {{0, 1}, {1, 2}}), Eigen::MatrixXd::Zero(3, 3)};
  sem.B(1, 0) = 0.5;
  sem.B(2, 1) = -0.4;
  NoiseModel noise{std::vector<GaussianMixture>(3, GaussianMixture{{0.5, 0.5}, {-1, 1}, {0.2, 0.2}})};
  EXPECT_EQ(simulate_sem(sem, noise, 100, 7).data.values, simulate_sem(sem, noise, 100, 7).data.values);
  EXPECT_NE(simulate_sem(sem, noise, 100, 7).data.values, simulate_sem(sem, noise, 100, 8).data.values);
}

TEST(Simulate, CyclicCovarianceConverges) {
  WeightedSem sem{graph_from_edges(3, {{0, 1}, {1, 2}, {2, 0}}), Eigen::MatrixXd::Zero(3, 3)};
  sem.B(1, 0) = 0.6;
  sem.B(2, 1) = -0.5;
  sem.B(0, 2) = 0.4;
  const Eigen::Vector3d vars(1.0, 0.5, 2.0);
  const auto sim = simulate_sem(sem, gaussian_noise(Eigen::Vector3d::Zero(), vars), 100000, 33);
  EXPECT_FALSE(sim.unstable);
  const Eigen::MatrixXd centered = sim.data.values.rowwise() - sim.data.values.colwise().mean();
  const Eigen::MatrixXd sample_cov = centered.transpose() * centered / (centered.rows() - 1);
  const Eigen::MatrixXd A = (Eigen::MatrixXd::Identity(3, 3) - sem.B).inverse();
  const Eigen::MatrixXd cov = A * vars.asDiagonal() * A.transpose();
  EXPECT_LT((sample_cov - cov).norm() / cov.norm(), 0.05);
}

TEST(Simulate, FlagsUnstableFeedback) {
  WeightedSem sem{graph_from_edges(2, {{0, 1}, {1, 0}}), Eigen::MatrixXd::Zero(2, 2)};
  sem.B(1, 0) = 2.0;
  sem.B(0, 1) = 0.8;
  const auto sim = simulate_sem(sem, NoiseModel{{GaussianMixture::standard(1), GaussianMixture::standard(1)}}, 10, 34);
  EXPECT_TRUE(sim.unstable);
}
