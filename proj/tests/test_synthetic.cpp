#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "ptbcc/error.hpp"
#include "ptbcc/synthetic.hpp"
#include "support.hpp"

namespace ptbcc {
namespace {

std::string serialize(const SyntheticData& data) {
  std::ostringstream out;
  write_answers_csv(out, data.dataset);
  write_truths_csv(out, data.dataset);
  out << to_json(data.truth, data.dataset).dump();
  return out.str();
}

TEST(GenerateSynthetic, SameSeedIsByteIdentical) {
  const auto cfg = testing::accurate_plus_random(50, 12, 4, 3);
  EXPECT_EQ(serialize(generate_synthetic(cfg, 99)), serialize(generate_synthetic(cfg, 99)));
  EXPECT_NE(serialize(generate_synthetic(cfg, 99)), serialize(generate_synthetic(cfg, 100)));
}

TEST(GenerateSynthetic, ShapesAndSimplexRows) {
  const auto cfg = testing::accurate_plus_random(40, 10, 3, 4);
  const auto data = generate_synthetic(cfg, 3);
  const auto& d = data.dataset;
  EXPECT_EQ(d.num_tasks(), 40u);
  EXPECT_EQ(d.num_annotations(), 160u);
  EXPECT_EQ(data.truth.true_x.size(), 160u);
  for (std::size_t i = 0; i < d.num_tasks(); ++i) {
    EXPECT_EQ(d.annotations_of_task(i).size(), 4u);
    EXPECT_EQ(d.truths()[i], data.truth.true_z[i]);
  }
  auto near_one = [](std::span<const double> row) {
    double s = 0.0;
    for (double x : row) s += x;
    return std::abs(s - 1.0) <= 1e-9;
  };
  EXPECT_TRUE(near_one(data.truth.true_tau));
  for (std::size_t j = 0; j < 10; ++j) EXPECT_TRUE(near_one(data.truth.true_pi.row(j)));
  for (std::size_t r = 0; r < data.truth.true_v.flat().rows(); ++r)
    EXPECT_TRUE(near_one(data.truth.true_v.flat().row(r)));
}

TEST(GenerateSynthetic, NearDeterministicPrototypesGiveAccurateLabels) {
  // a_sk = 1000 on the diagonal, 0.001 elsewhere: labels should almost
  // always equal the truth. Monte-Carlo over 2*10^4 annotations.
  auto cfg = SyntheticConfig::symmetric(4000, 20, 4, 5, {{1000.0, 0.001}, {1000.0, 0.001}});
  const auto data = generate_synthetic(cfg, 1);
  std::size_t hits = 0;
  for (const auto& y : data.dataset.annotations()) hits += y.label == data.truth.true_z[y.task];
  ASSERT_GE(data.dataset.num_annotations(), 10000u);
  EXPECT_GT(static_cast<double>(hits) / data.dataset.num_annotations(), 0.95);
}

TEST(GenerateSynthetic, TruthHistogramPassesChiSquare) {
  const std::size_t K = 5;
  const std::size_t T = 10000;
  auto cfg = SyntheticConfig::symmetric(T, 3, K, 1, {{2.0, 1.0}});
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto data = generate_synthetic(cfg, seed);
    std::vector<double> counts(K, 0.0);
    for (auto z : data.truth.true_z) counts[z] += 1.0;
    double chi2 = 0.0;
    std::size_t dof = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double expected = T * data.truth.true_tau[k];
      if (expected < 1e-9) {
        EXPECT_EQ(counts[k], 0.0);
        continue;
      }
      chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
      ++dof;
    }
    const boost::math::chi_squared dist(static_cast<double>(dof - 1));
    EXPECT_LT(chi2, boost::math::quantile(dist, 0.99)) << "seed " << seed;
  }
}

TEST(GenerateSynthetic, RejectsInvalidConfigs) {
  auto cfg = testing::accurate_plus_random(10, 5, 3, 2);
  cfg.u[1] = 0.0;
  EXPECT_THROW(generate_synthetic(cfg, 1), Error);
  cfg = testing::accurate_plus_random(10, 5, 3, 6);
  EXPECT_THROW(generate_synthetic(cfg, 1), Error);
  cfg = testing::accurate_plus_random(10, 5, 3, 2);
  cfg.a(1, 0, 0) = -1.0;
  try {
    generate_synthetic(cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Hyperparameter);
  }
}

}  // namespace
}  // namespace ptbcc
