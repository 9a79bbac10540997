// Copyright 2026 The fedcef Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "fedcef/algorithms/baselines.hpp"
#include "fedcef/metrics.hpp"
#include "fedcef/problems.hpp"
#include "oracles.hpp"

namespace fedcef {
namespace {

using testing::central_difference;
using testing::hetero_quadratic_problem;
using testing::quadratic_optimum;
using testing::random_vector;
using testing::resum_smooth;
using testing::sample_problem;

constexpr LossKind kSampleLosses[] = {LossKind::SquaredError, LossKind::Logistic, LossKind::SigmoidNonconvex};

TEST(Generate, SingleIidClientHoldsEverything) {
  const auto prob = sample_problem(LossKind::Logistic, 5, 123, 1, 1);
  ASSERT_EQ(prob.num_clients(), 1u);
  EXPECT_EQ(prob.shard_size(0), 123u);
}

TEST(Generate, IidSplitIsBalanced) {
  const auto prob = sample_problem(LossKind::Logistic, 5, 103, 4, 1);
  std::size_t total = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(prob.shard_size(i), 25u);
    EXPECT_LE(prob.shard_size(i), 26u);
    total += prob.shard_size(i);
  }
  EXPECT_EQ(total, 103u);
}

TEST(Generate, LabelsMatchLoss) {
  for (auto loss : {LossKind::Logistic, LossKind::SigmoidNonconvex}) {
    const auto prob = sample_problem(loss, 4, 50, 2, 3);
    for (std::size_t i = 0; i < 2; ++i) {
      for (double y : prob.shard(i).labels) ASSERT_TRUE(y == 1.0 || y == -1.0);
    }
  }
}

TEST(Generate, SamePseudoRandomStreamSameProblem) {
  const auto a = sample_problem(LossKind::SquaredError, 6, 40, 3, 9, PartitionSpec::dirichlet(0.5));
  const auto b = sample_problem(LossKind::SquaredError, 6, 40, 3, 9, PartitionSpec::dirichlet(0.5));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.shard(i).features, b.shard(i).features);
    EXPECT_EQ(a.shard(i).labels, b.shard(i).labels);
  }
}

TEST(Generate, RejectsBadInput) {
  SyntheticSpec s;
  s.samples = 2;
  s.clients = 3;
  RngStream r(1, "problem");
  EXPECT_THROW((void)generate_synthetic(s, r), DomainError);
  EXPECT_THROW((void)FederatedProblem::from_shards(LossKind::Logistic, 2, {}), DomainError);
  EXPECT_THROW((void)FederatedProblem::from_shards(LossKind::Logistic, 2, {DataShard{}}), DomainError);
  EXPECT_THROW((void)FederatedProblem::hetero_quadratic({{ParamVector{1.0, 0.0}, ParamVector{0.0, 0.0}}}),
               DomainError);
}

TEST(Dirichlet, ProportionsSumToOne) {
  RngStream r(2, "dir");
  for (double a : {0.01, 0.5, 1.0, 100.0}) {
    for (int i = 0; i < 50; ++i) {
      const auto p = dirichlet_proportions(7, a, r);
      double s = 0.0;
      for (double v : p) {
        ASSERT_GE(v, 0.0);
        s += v;
      }
      ASSERT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Dirichlet, LargestRemainderCountsSumToTotal) {
  const std::vector<double> p{0.125, 0.375, 0.5};
  const auto c = largest_remainder_counts(p, 10);
  EXPECT_EQ(c, (std::vector<std::size_t>{1, 4, 5}));
}

std::vector<int> two_classes(std::size_t n) {
  std::vector<int> y(n);
  for (std::size_t s = 0; s < n; ++s) y[s] = static_cast<int>(s % 2);
  return y;
}

TEST(Dirichlet, HugeConcentrationIsNearlyUniform) {
  const auto labels = two_classes(1000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream r(seed, "partition");
    const auto owner = dirichlet_partition(labels, 4, 1e6, r);
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<int> count(4, 0);
      for (std::size_t s = 0; s < owner.size(); ++s) {
        if (labels[s] == cls) ++count[owner[s]];
      }
      for (int c : count) ASSERT_LE(std::abs(c - 125), 12.5) << "seed " << seed;
    }
  }
}

TEST(Dirichlet, TinyConcentrationConcentratesAClass) {
  const auto labels = two_classes(1000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream r(seed, "partition");
    const auto owner = dirichlet_partition(labels, 2, 0.01, r);
    bool concentrated = false;
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<int> count(2, 0);
      for (std::size_t s = 0; s < owner.size(); ++s) {
        if (labels[s] == cls) ++count[owner[s]];
      }
      if (*std::max_element(count.begin(), count.end()) >= 450) concentrated = true;
    }
    EXPECT_TRUE(concentrated) << "seed " << seed;
  }
}

TEST(Dirichlet, SingleClientGetsEverything) {
  RngStream r(3, "partition");
  const auto owner = dirichlet_partition(two_classes(50), 1, 0.3, r);
  EXPECT_TRUE(std::all_of(owner.begin(), owner.end(), [](std::size_t o) { return o == 0; }));
}

TEST(Dirichlet, EveryClientNonempty) {
  const auto labels = two_classes(200);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream r(seed, "partition");
    const auto owner = dirichlet_partition(labels, 8, 0.5, r);
    std::vector<int> load(8, 0);
    for (auto o : owner) ++load[o];
    for (int l : load) ASSERT_GT(l, 0);
  }
}

TEST(Dirichlet, GivesUpAfterBoundedRetries) {
  RngStream r(4, "partition");
  const std::vector<int> labels{0, 0, 0, 0};
  EXPECT_THROW((void)dirichlet_partition(labels, 4, 1e-3, r), DomainError);
}

TEST(Gradient, SingleSampleSquaredErrorClosedForm) {
  DataShard s;
  s.rows = 1;
  s.features = {1.0, -2.0, 0.5};
  s.labels = {3.0};
  const auto prob = FederatedProblem::from_shards(LossKind::SquaredError, 3, {s});
  const ParamVector x{0.2, 0.1, -1.0};
  RngStream r(1, "g");
  const double resid = 0.2 - 0.2 - 0.5 - 3.0;
  const auto g = stochastic_gradient(prob, 0, x, BatchSize::full(), r);
  EXPECT_NEAR(g[0], resid * 1.0, 1e-15);
  EXPECT_NEAR(g[1], resid * -2.0, 1e-15);
  EXPECT_NEAR(g[2], resid * 0.5, 1e-15);
}

TEST(Gradient, HeteroQuadraticIsDeterministicForAnyBatch) {
  const auto prob = hetero_quadratic_problem(3, 6, 5);
  RngStream r(2, "g");
  const auto x = random_vector(r, 6);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& q = prob.quadratic(i);
    for (auto b : {BatchSize::full(), BatchSize::of(1), BatchSize::of(7)}) {
      const auto g = stochastic_gradient(prob, i, x, b, r);
      for (std::size_t j = 0; j < 6; ++j) ASSERT_EQ(g[j], q.curvature[j] * (x[j] - q.center[j]));
    }
  }
}

TEST(Gradient, MiniBatchIsUnbiased) {
  const auto prob = sample_problem(LossKind::Logistic, 5, 100, 1, 6);
  RngStream r(3, "mc");
  const auto x = random_vector(r, 5, 0.5);
  const auto full = prob.client_gradient(0, x);
  // Per-coordinate standard deviation of a single-sample gradient.
  std::vector<double> sd(5, 0.0);
  for (std::size_t s = 0; s < 100; ++s) {
    const auto g = prob.sample_gradient(0, s, x);
    for (std::size_t j = 0; j < 5; ++j) sd[j] += (g[j] - full[j]) * (g[j] - full[j]) / 100.0;
  }
  const int draws = 100000;
  std::vector<double> mean(5, 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto g = stochastic_gradient(prob, 0, x, BatchSize::of(2), r);
    for (std::size_t j = 0; j < 5; ++j) mean[j] += g[j];
  }
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_NEAR(mean[j] / draws, full[j], 3.0 * std::sqrt(sd[j]) / std::sqrt(2.0 * draws)) << "coord " << j;
  }
}

TEST(Gradient, FiniteDifferencesEveryLoss) {
  RngStream r(4, "fd");
  for (auto loss : kSampleLosses) {
    const auto prob = sample_problem(loss, 6, 40, 2, 7);
    for (int k = 0; k < 20; ++k) {
      const auto x = random_vector(r, 6, 0.7);
      for (std::size_t i = 0; i < 2; ++i) {
        const auto fd = central_difference([&](const ParamVector& y) { return prob.client_loss(i, y); }, x);
        const auto g = prob.client_gradient(i, x);
        for (std::size_t j = 0; j < 6; ++j) {
          ASSERT_LE(std::abs(g[j] - fd[j]), 1e-5 * std::max(1.0, std::abs(fd[j]))) << to_string(loss);
        }
      }
    }
  }
}

TEST(GlobalGradient, SingleClientEqualsFullLocal) {
  const auto prob = sample_problem(LossKind::SigmoidNonconvex, 4, 30, 1, 8);
  RngStream r(5, "gg");
  const auto x = random_vector(r, 4);
  EXPECT_EQ(full_global_gradient(prob, x), stochastic_gradient(prob, 0, x, BatchSize::full(), r));
}

TEST(GlobalGradient, VanishesAtQuadraticOptimum) {
  const auto prob = hetero_quadratic_problem(5, 10, 9);
  EXPECT_LE(inf_norm(full_global_gradient(prob, quadratic_optimum(prob))), 1e-12);
}

TEST(GlobalGradient, LogisticFiniteDifferences) {
  const auto prob = sample_problem(LossKind::Logistic, 8, 200, 4, 10, PartitionSpec::dirichlet(0.5));
  RngStream r(6, "gg-fd");
  for (int k = 0; k < 10; ++k) {
    const auto x = random_vector(r, 8);
    const auto fd = central_difference([&](const ParamVector& y) { return smooth_value(prob, y); }, x);
    const auto g = full_global_gradient(prob, x);
    for (std::size_t j = 0; j < 8; ++j) ASSERT_LE(std::abs(g[j] - fd[j]), 1e-5 * std::max(1.0, std::abs(fd[j])));
  }
}

TEST(Smoothness, QuadraticIsMaxCurvature) {
  const auto prob = FederatedProblem::hetero_quadratic(
      {{ParamVector{1, 2}, ParamVector{0, 0}}, {ParamVector{3, 1}, ParamVector{1, 1}}});
  EXPECT_EQ(estimate_smoothness(prob).L, 3.0);
}

TEST(Smoothness, SingleSampleIsSquaredNorm) {
  DataShard s;
  s.rows = 1;
  s.features = {3.0, 4.0};
  s.labels = {1.0};
  const auto prob = FederatedProblem::from_shards(LossKind::SquaredError, 2, {s});
  EXPECT_NEAR(estimate_smoothness(prob).L, 25.0, 1e-9);
  EXPECT_TRUE(estimate_smoothness(prob).converged);
}

double eigen_lambda_max(const DataShard& s, std::size_t dim) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t j = 0; j < dim; ++j) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = s.features[r * dim + j];
  }
  const Eigen::MatrixXd m = a.transpose() * a / static_cast<double>(s.rows);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().maxCoeff();
}

TEST(Smoothness, LogisticMatchesDenseEigensolve) {
  const auto prob = sample_problem(LossKind::Logistic, 10, 100, 1, 11);
  const double oracle = 0.25 * eigen_lambda_max(prob.shard(0), 10);
  EXPECT_NEAR(estimate_smoothness(prob).L, oracle, 0.01 * oracle);
}

TEST(Smoothness, SigmoidUsesCurvatureBoundAndMaxOverClients) {
  const auto prob = sample_problem(LossKind::SigmoidNonconvex, 6, 300, 3, 12, PartitionSpec::dirichlet(0.5));
  double oracle = 0.0;
  for (std::size_t i = 0; i < 3; ++i) oracle = std::max(oracle, eigen_lambda_max(prob.shard(i), 6));
  oracle *= 1.0 / (6.0 * std::sqrt(3.0));
  EXPECT_NEAR(estimate_smoothness(prob).L, oracle, 0.01 * oracle);
}

TEST(SmoothnessProperty, GradientIsLipschitz) {
  RngStream r(7, "lipschitz");
  for (auto loss : kSampleLosses) {
    const auto prob = sample_problem(loss, 5, 60, 3, 13, PartitionSpec::dirichlet(1.0));
    const double L = estimate_smoothness(prob).L;
    for (int k = 0; k < 1000; ++k) {
      const auto x = random_vector(r, 5, 2.0);
      const auto y = random_vector(r, 5, 2.0);
      const std::size_t i = r.index(3);
      const double lhs = norm(subtract(prob.client_gradient(i, x), prob.client_gradient(i, y)));
      ASSERT_LE(lhs, L * norm(subtract(x, y)) * (1 + 1e-9)) << to_string(loss);
    }
  }
}

TEST(VarianceProperty, ScalesAsOneOverBatch) {
  const auto prob = sample_problem(LossKind::Logistic, 5, 200, 1, 14);
  RngStream r(8, "variance");
  const auto x = random_vector(r, 5, 0.5);
  const auto full = prob.client_gradient(0, x);
  const int draws = 20000;
  double base = 0.0;
  for (std::size_t b : {1u, 4u, 16u}) {
    double acc = 0.0;
    for (int d = 0; d < draws; ++d) acc += sq_norm(subtract(stochastic_gradient(prob, 0, x, BatchSize::of(b), r), full));
    const double var = acc / draws;
    ASSERT_TRUE(std::isfinite(var));
    if (b == 1) {
      base = var;
      EXPECT_NEAR(var, gradient_variance(prob, 0, x), 0.05 * var);
    } else {
      EXPECT_NEAR(var * static_cast<double>(b) / base, 1.0, 0.2) << "B=" << b;
    }
  }
}

TEST(Objective, ZeroAtQuadraticCenter) {
  const auto prob = hetero_quadratic_problem(1, 4, 15);
  EXPECT_EQ(objective_value(prob, Regularizer::zero(), prob.quadratic(0).center), 0.0);
}

TEST(Objective, RegularizerIsAdditive) {
  const auto prob = sample_problem(LossKind::Logistic, 6, 50, 2, 16);
  RngStream r(9, "objective");
  const auto x = random_vector(r, 6);
  const auto reg = Regularizer::l1(0.3);
  EXPECT_NEAR(objective_value(prob, reg, x) - objective_value(prob, Regularizer::zero(), x), reg.evaluate(x), 1e-14);
}

TEST(Objective, MatchesResummation) {
  RngStream r(10, "objective");
  for (auto loss : {LossKind::SquaredError, LossKind::Logistic, LossKind::SigmoidNonconvex, LossKind::HeteroQuadratic}) {
    const auto prob = loss == LossKind::HeteroQuadratic ? hetero_quadratic_problem(3, 6, 17)
                                                        : sample_problem(loss, 6, 90, 3, 17, PartitionSpec::dirichlet(0.5));
    const auto x = random_vector(r, 6);
    const auto reg = Regularizer::l1(1e-3);
    const double oracle = resum_smooth(prob, x) + 1e-3 * l1_norm(x);
    EXPECT_NEAR(objective_value(prob, reg, x), oracle, 1e-12 * std::max(1.0, std::abs(oracle))) << to_string(loss);
  }
}

TEST(PlantedModel, ProximalGradientRecoversSupport) {
  SyntheticSpec spec;
  spec.loss = LossKind::Logistic;
  spec.dim = 20;
  spec.samples = 500;
  RngStream rng(18, "problem");
  const auto gen = generate_synthetic(spec, rng);
  const auto reg = Regularizer::l1(1e-3);
  const double step = 1.0 / estimate_smoothness(gen.problem).L;
  ParamVector z(20);
  int it = 0;
  for (; it < 20000; ++it) {
    if (norm(prox_gradient_mapping(gen.problem, reg, z, step)) <= 1e-8) break;
    z = reg.prox(step, axpy(z, -step, full_global_gradient(gen.problem, z)));
  }
  ASSERT_LT(it, 20000) << "PGD did not reach tolerance";
  for (std::size_t j = 0; j < 20; ++j) {
    if (gen.planted[j] != 0.0) {
      EXPECT_NE(z[j], 0.0) << "coordinate " << j;
    }
  }
}

TEST(DatasetCsv, RoundTrips) {
  const auto prob = sample_problem(LossKind::SquaredError, 3, 25, 3, 19, PartitionSpec::dirichlet(0.7));
  std::stringstream ss;
  dump_dataset_csv(prob, ss);
  const auto back = load_dataset_csv(ss, LossKind::SquaredError);
  ASSERT_EQ(back.num_clients(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.shard(i).features, prob.shard(i).features);
    EXPECT_EQ(back.shard(i).labels, prob.shard(i).labels);
  }
  EXPECT_EQ(back.smoothness().L, prob.smoothness().L);
}

TEST(DatasetCsv, RejectsRaggedRows) {
  std::stringstream ss("client,label,f0,f1\n0,1,2\n");
  EXPECT_THROW((void)load_dataset_csv(ss, LossKind::Logistic), DimensionError);
}

}  // namespace
}  // namespace fedcef
