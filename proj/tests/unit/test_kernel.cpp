#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "srbo/error.hpp"
#include "srbo/kernel.hpp"

using namespace srbo;

namespace {

std::shared_ptr<const Dataset> two_unit_vectors() {
  return std::make_shared<const Dataset>(2, 2, std::vector<double>{1, 0, 0, 1},
                                         std::vector<int>{1, -1});
}

std::shared_ptr<const Dataset> gaussian_cloud(std::size_t l, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.5);
  std::vector<double> x(l * p);
  for (double& v : x) v = g(rng);
  std::vector<int> y(l);
  for (std::size_t i = 0; i < l; ++i) y[i] = (rng() & 1) ? 1 : -1;
  return std::make_shared<const Dataset>(l, p, std::move(x), std::move(y));
}

}  // namespace

TEST(KernelEval, SpecExamples) {
  const std::vector<double> a{1, 0};
  const std::vector<double> b{0, 1};
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::linear(true), a, b), 1.0);
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::rbf(1.0, false), a, a), 1.0);
  const std::vector<double> z{0};
  const std::vector<double> two{2};
  EXPECT_NEAR(kernel_eval(KernelSpec::rbf(1.0, false), z, two), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(kernel_eval(KernelSpec::rbf(1.0, false), z, two), 0.1353, 1e-4);
}

TEST(KernelEval, RejectsDimensionMismatch) {
  const std::vector<double> a{1, 0};
  const std::vector<double> b{1};
  EXPECT_THROW(kernel_eval(KernelSpec::linear(), a, b), InputError);
}

TEST(KernelEval, AugmentedSelfValueIsAtLeastOne) {
  const auto d = gaussian_cloud(30, 3, 1);
  for (const auto& spec : {KernelSpec::linear(), KernelSpec::rbf(0.3), KernelSpec::rbf(4.0)}) {
    for (std::size_t i = 0; i < d->rows(); ++i) {
      EXPECT_GE(kernel_eval(spec, d->sample(i), d->sample(i)), 1.0);
    }
  }
}

TEST(KernelSpecTest, ValidatesSigma) {
  EXPECT_THROW(KernelSpec::rbf(0.0).validate(), InputError);
  EXPECT_THROW(KernelSpec::rbf(-1.0).validate(), InputError);
  EXPECT_NO_THROW(KernelSpec::rbf(0.5).validate());
  EXPECT_EQ(parse_kernel_kind("linear"), KernelKind::linear);
  EXPECT_EQ(parse_kernel_kind("rbf"), KernelKind::rbf);
  EXPECT_THROW(parse_kernel_kind("poly"), ConfigError);
}

TEST(GramRow, LabeledAndUnlabeledExamples) {
  const auto d = two_unit_vectors();
  const GramOracle q(d, KernelSpec::linear(true), GramMode::labeled);
  const auto r0 = q.gram_row(0);
  EXPECT_DOUBLE_EQ(r0[0], 2.0);
  EXPECT_DOUBLE_EQ(r0[1], -1.0);

  const GramOracle h(d, KernelSpec::linear(true), GramMode::unlabeled);
  const auto h0 = h.gram_row(0);
  EXPECT_DOUBLE_EQ(h0[0], 2.0);
  EXPECT_DOUBLE_EQ(h0[1], 1.0);

  EXPECT_THROW(q.gram_row(2), InputError);
}

TEST(GramRow, RepeatedCallsAreIdenticalUnderBothPolicies) {
  const auto d = gaussian_cloud(40, 3, 2);
  const GramOracle full(d, KernelSpec::rbf(1.0), GramMode::labeled, {CachePolicy::Kind::full, 0});
  const GramOracle lru(d, KernelSpec::rbf(1.0), GramMode::labeled, {CachePolicy::Kind::lru, 4});
  EXPECT_TRUE(full.is_full());
  EXPECT_FALSE(lru.is_full());
  for (std::size_t i = 0; i < 40; ++i) {
    const auto a = full.gram_row(i);
    const auto b = lru.gram_row(i);
    const auto c = lru.gram_row(i);
    for (std::size_t j = 0; j < 40; ++j) {
      EXPECT_EQ(b[j], c[j]);
      EXPECT_NEAR(a[j], b[j], 1e-15);
    }
  }
}

TEST(GramRow, LruRowsOutliveEviction) {
  const auto d = gaussian_cloud(20, 2, 3);
  const GramOracle q(d, KernelSpec::rbf(1.0), GramMode::labeled, {CachePolicy::Kind::lru, 2});
  const auto first = q.row(0);
  const std::vector<double> copy(first.values.begin(), first.values.end());
  for (std::size_t i = 1; i < 20; ++i) (void)q.row(i);
  for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(first[j], copy[j]);
}

TEST(GramRow, MatchesDenseOracle) {
  const auto d = gaussian_cloud(25, 4, 4);
  for (const auto& spec : {KernelSpec::linear(), KernelSpec::rbf(0.7, false)}) {
    for (auto mode : {GramMode::labeled, GramMode::unlabeled}) {
      const GramOracle q(d, spec, mode);
      const auto m = oracle::dense_gram(*d, spec, mode == GramMode::labeled);
      for (std::size_t i = 0; i < 25; ++i) {
        const auto r = q.gram_row(i);
        EXPECT_DOUBLE_EQ(q.diag(i), m[i * 25 + i]);
        for (std::size_t j = 0; j < 25; ++j) EXPECT_NEAR(r[j], m[i * 25 + j], 1e-12);
      }
    }
  }
}

TEST(GramProperties, Symmetry) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = gaussian_cloud(30, 3, 10 + seed);
    for (auto policy : {CachePolicy::Kind::full, CachePolicy::Kind::lru}) {
      const GramOracle q(d, KernelSpec::rbf(1.3), GramMode::labeled, {policy, 5});
      for (std::size_t i = 0; i < 30; ++i) {
        const auto ri = q.gram_row(i);
        for (std::size_t j = 0; j < 30; ++j) {
          EXPECT_LE(std::abs(ri[j] - q.gram_row(j)[i]), 1e-12);
        }
      }
    }
  }
}

TEST(GramProperties, PositiveSemidefiniteOnRandomDirections) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto d = gaussian_cloud(50, 3, 20 + seed);
    for (const auto& spec : {KernelSpec::linear(), KernelSpec::rbf(0.5)}) {
      const GramOracle q(d, spec, GramMode::labeled);
      for (int t = 0; t < 100; ++t) {
        std::vector<double> v(50);
        double norm = 0.0;
        for (double& x : v) {
          x = g(rng);
          norm += x * x;
        }
        for (double& x : v) x /= std::sqrt(norm);
        EXPECT_GE(quad_form(q, v, v), -1e-8);
      }
    }
  }
}

TEST(GramProperties, AugmentationAddsLabelOuterProduct) {
  const auto d = gaussian_cloud(15, 2, 5);
  for (auto mode : {GramMode::labeled, GramMode::unlabeled}) {
    const GramOracle on(d, KernelSpec::rbf(0.9, true), mode);
    const GramOracle off(d, KernelSpec::rbf(0.9, false), mode);
    for (std::size_t i = 0; i < 15; ++i) {
      const auto a = on.gram_row(i);
      const auto b = off.gram_row(i);
      for (std::size_t j = 0; j < 15; ++j) {
        const double expected =
            mode == GramMode::labeled ? static_cast<double>(d->label(i) * d->label(j)) : 1.0;
        EXPECT_NEAR(a[j] - b[j], expected, 1e-12);
      }
    }
  }
}

TEST(QuadForm, SpecExamples) {
  const auto d = two_unit_vectors();
  const auto all_pos = std::make_shared<const Dataset>(2, 2, std::vector<double>{1, 0, 0, 1},
                                                       std::vector<int>{1, 1});
  const GramOracle q(all_pos, KernelSpec::linear(false), GramMode::labeled);
  const std::vector<double> zero{0, 0};
  EXPECT_DOUBLE_EQ(quad_form(q, zero, zero), 0.0);
  const std::vector<double> a{1, 2};
  const std::vector<double> b{3, 4};
  EXPECT_DOUBLE_EQ(quad_form(q, a, b), 11.0);
  const std::vector<double> short_v{1};
  EXPECT_THROW(quad_form(q, short_v, b), InputError);
}

TEST(QuadForm, MatchesDenseTripleProduct) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto d = gaussian_cloud(5, 3, 6);
  const GramOracle q(d, KernelSpec::rbf(1.0), GramMode::labeled);
  const auto m = oracle::dense_gram(*d, KernelSpec::rbf(1.0), true);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(5), b(5);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    a[t % 5] = 0.0;
    EXPECT_NEAR(quad_form(q, a, b), oracle::quad(m, a, b), 1e-12);
    const auto mb = multiply(q, b);
    const auto ref = oracle::matvec(m, b);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(mb[i], ref[i], 1e-12);
  }
}

TEST(Submatrix, SelectsPrincipalBlock) {
  const auto d = gaussian_cloud(10, 2, 8);
  const GramOracle q(d, KernelSpec::linear(), GramMode::labeled);
  const SubmatrixView s(q, {7, 2, 5});
  ASSERT_EQ(s.size(), 3u);
  const std::vector<std::size_t> idx{7, 2, 5};
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_DOUBLE_EQ(s.diag(a), q.diag(idx[a]));
    const auto r = s.row(a);
    const auto full = q.gram_row(idx[a]);
    for (std::size_t b = 0; b < 3; ++b) EXPECT_DOUBLE_EQ(r[b], full[idx[b]]);
  }
  const auto dense = materialize(s);
  EXPECT_DOUBLE_EQ(dense(0, 1), q.gram_row(7)[2]);
}
