#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "labeler.hpp"
#include "latentplan/error.hpp"
#include "latentplan/trainer.hpp"
#include "supcon_reference.hpp"

namespace lp::train {
namespace {

using nn::Matrix;

TEST(SupCon, MutualPairHasZeroLoss) {
  std::mt19937_64 rng(1);
  auto z = testing::random_unit_rows(2, 8, rng);
  auto rep = supcon_loss(z, std::vector<std::uint8_t>{0, 1, 1, 0}, 0.07);
  EXPECT_NEAR(rep.loss, 0.0, 1e-9);
  EXPECT_EQ(rep.anchors, 2);
}

TEST(SupCon, HandCase) {
  Matrix<double> z(3, 2);
  z << 1, 0, 1, 0, 0, 1;
  std::vector<std::uint8_t> mask = {0, 1, 0, 1, 0, 0, 0, 0, 0};
  auto rep = supcon_loss(z, mask, 1.0);
  EXPECT_NEAR(rep.loss, -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0)), 1e-12);
  EXPECT_NEAR(rep.loss, 0.31326, 1e-5);
  EXPECT_EQ(rep.anchors, 2);
}

TEST(SupCon, MatchesDoubleLoopAndFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(2, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    auto z = testing::random_unit_rows(n, 6, rng);
    auto mask = testing::random_mask(n, rng);
    Matrix<double> grad;
    auto rep = supcon_loss(z, mask, 0.07, &grad);
    ASSERT_NEAR(rep.loss, testing::reference_loss(z, mask, 0.07), 1e-6);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < z.cols(); ++j) {
        double fd = testing::reference_partial(z, mask, 0.07, i, j, h);
        ASSERT_NEAR(grad(i, j), fd, 1e-5 * std::max(1.0, std::abs(fd))) << "trial " << trial;
      }
  }
}

TEST(SupCon, TemperaturePreservesOrderingWithSinglePositives) {
  // Only row 0 is an anchor, with the single positive 1. Its loss is
  // log(1 + exp((s02 - s01) / tau)), monotone in the similarities for any tau.
  std::mt19937_64 rng(3);
  std::vector<std::uint8_t> mask = {0, 1, 0, 0, 0, 0, 0, 0, 0};
  std::vector<Matrix<double>> batches;
  for (int b = 0; b < 50; ++b) batches.push_back(testing::random_unit_rows(3, 4, rng));
  auto order_for = [&](double tau) {
    std::vector<std::pair<double, int>> v;
    for (int b = 0; b < 50; ++b) v.push_back({supcon_loss(batches[b], mask, tau).loss, b});
    std::sort(v.begin(), v.end());
    std::vector<int> idx;
    for (const auto& e : v) idx.push_back(e.second);
    return idx;
  };
  EXPECT_EQ(order_for(0.07), order_for(1.0));
  EXPECT_EQ(order_for(0.07), order_for(0.5));
  EXPECT_NE(supcon_loss(batches[0], mask, 0.07).loss, supcon_loss(batches[0], mask, 1.0).loss);
}

TEST(SupCon, RejectsBadInput) {
  Matrix<double> z = Matrix<double>::Identity(2, 2);
  std::vector<std::uint8_t> mask = {0, 1, 1, 0};
  EXPECT_THROW(supcon_loss(z, mask, 0.0), Error);
  z(0, 0) = NAN;
  try {
    supcon_loss(z, mask, 0.07);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumerical);
  }
}

TEST(Sgd, ScalarExamples) {
  std::vector<double> w = {0.0};
  std::vector<double> g = {1.0};
  SgdState<double> s;
  sgd_step<double>(w, g, s, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(w[0], -0.1);

  w = {0.0};
  s = {};
  sgd_step<double>(w, g, s, 1.0, 0.9);
  sgd_step<double>(w, g, s, 1.0, 0.9);
  EXPECT_DOUBLE_EQ(w[0], -2.9);
}

TEST(Sgd, ConvergesOnQuadratic) {
  // f(w) = 0.5 * sum c_i (w_i - t_i)^2
  std::vector<double> c = {1.0, 3.0, 0.5}, t = {2.0, -1.0, 0.25}, w = {0, 0, 0}, g(3);
  SgdState<double> s;
  for (int step = 0; step < 200; ++step) {
    for (int i = 0; i < 3; ++i) g[i] = c[i] * (w[i] - t[i]);
    sgd_step<double>(w, g, s, 0.1, 0.9);
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], t[i], 1e-3);
}

TEST(Sgd, RejectsNonFiniteGradient) {
  std::vector<float> w = {1.0f, 2.0f};
  std::vector<float> g = {0.5f, INFINITY};
  SgdState<float> s;
  EXPECT_THROW(sgd_step<float>(w, g, s, 0.1, 0.9), Error);
  EXPECT_EQ(w[0], 1.0f);
  EXPECT_TRUE(s.velocity.empty());
}

nn::EncoderConfig micro() { return {1, 32, 16, 2, 32, 0.1, lp::vocab_size(), kSeqLen}; }

const data::Dataset& small_dataset() {
  static data::Dataset ds = [] {
    synth::GenerateOptions opt;
    opt.positions = 3000;
    opt.seed = 11;
    return synth::generate(opt);
  }();
  return ds;
}

TEST(Train, SameSeedGivesIdenticalCheckpoints) {
  TrainConfig cfg;
  cfg.steps = 6;
  cfg.seed = 5;
  auto dir = std::filesystem::temp_directory_path() / "lp_train_det";
  std::filesystem::remove_all(dir);
  cfg.checkpoint_dir = (dir / "a").string();
  cfg.checkpoint_every = 3;
  cfg.loss_log = (dir / "a.tsv").string();
  std::filesystem::create_directories(dir);
  auto r1 = train(small_dataset(), micro(), cfg);
  cfg.checkpoint_dir = (dir / "b").string();
  cfg.loss_log = (dir / "b.tsv").string();
  auto r2 = train(small_dataset(), micro(), cfg);
  EXPECT_TRUE(std::equal(r1.weights.values().begin(), r1.weights.values().end(), r2.weights.values().begin()));

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "step_0000003.lpck"));
  EXPECT_EQ(slurp(dir / "a" / "step_0000006.lpck"), slurp(dir / "b" / "step_0000006.lpck"));
  EXPECT_EQ(slurp(dir / "a.tsv"), slurp(dir / "b.tsv"));

  cfg.seed = 6;
  cfg.checkpoint_dir.clear();
  cfg.loss_log.clear();
  auto r3 = train(small_dataset(), micro(), cfg);
  EXPECT_FALSE(std::equal(r1.weights.values().begin(), r1.weights.values().end(), r3.weights.values().begin()));
  std::filesystem::remove_all(dir);
}

TEST(Train, LossDecreasesOnSyntheticData) {
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.seed = 7;
  auto result = train(small_dataset(), micro(), cfg);
  ASSERT_EQ(result.log.size(), 300u);
  double first = 0, last = 0;
  for (int i = 0; i < 50; ++i) {
    first += result.log[i].report.loss;
    last += result.log[result.log.size() - 1 - i].report.loss;
  }
  EXPECT_LT(last, first);
}

TEST(Train, RejectsInvalidConfig) {
  TrainConfig cfg;
  cfg.tau = 0;
  EXPECT_THROW(train(small_dataset(), micro(), cfg), Error);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace lp::train
