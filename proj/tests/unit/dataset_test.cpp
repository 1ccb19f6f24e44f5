#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "latentplan/dataset.hpp"
#include "latentplan/error.hpp"

namespace lp::data {
namespace {

const char* kStart = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
const char* kBlackToMove = "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1";

Dataset ingest_text(const std::string& text, IngestOptions opt, IngestReport* rep = nullptr) {
  std::istringstream in(text);
  opt.shuffle = false;
  return ingest(in, opt, rep);
}

Dataset with_probabilities(const std::vector<double>& p) {
  Dataset ds(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) ds[i].p_white = p[i];
  return ds;
}

TEST(Ingest, ConvertsToWhitePerspective) {
  auto ds = ingest_text(std::string(kStart) + "\t0.52\n" + kBlackToMove + "\t0.7\n", {});
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_DOUBLE_EQ(ds[0].p_white, 0.52);
  EXPECT_NEAR(ds[1].p_white, 0.3, 1e-15);

  IngestOptions white;
  white.frame = ProbabilityFrame::kWhite;
  auto ds2 = ingest_text(std::string(kBlackToMove) + "\t0.7\n", white);
  EXPECT_DOUBLE_EQ(ds2[0].p_white, 0.7);
}

TEST(Ingest, SkipsAndCountsBadRows) {
  IngestReport rep;
  auto ds = ingest_text(std::string(kStart) + "\t0.5\nnot a fen\t0.5\n" + kBlackToMove + "\t0.25\n", {}, &rep);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(rep.rows, 3u);
  EXPECT_EQ(rep.skipped, 1u);
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("line 2"), std::string::npos);

  rep = {};
  ds = ingest_text(std::string(kStart) + "\t1.5\n" + kStart + "\t-0.1\n" + kStart + "\tnan\n" + kStart +
                       "\n" + kStart + "\t0.5x\n",
                   {}, &rep);
  EXPECT_TRUE(ds.empty());
  EXPECT_EQ(rep.skipped, 5u);
}

TEST(Ingest, ShuffleIsSeedReproducible) {
  std::string text;
  for (int i = 0; i < 50; ++i) text += std::string(kStart) + "\t" + std::to_string(i / 50.0) + "\n";
  IngestOptions opt;
  opt.seed = 9;
  std::istringstream a(text), b(text), c(text);
  auto da = ingest(a, opt), db = ingest(b, opt);
  opt.seed = 10;
  auto dc = ingest(c, opt);
  std::vector<double> pa, pb, pc;
  for (std::size_t i = 0; i < da.size(); ++i) {
    pa.push_back(da[i].p_white);
    pb.push_back(db[i].p_white);
    pc.push_back(dc[i].p_white);
  }
  EXPECT_EQ(pa, pb);
  EXPECT_NE(pa, pc);
}

TEST(Ingest, MissingFileIsAnIoError) {
  try {
    ingest("/nonexistent/positions.tsv", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(PositiveIndex, SmallExample) {
  PositiveIndex idx({0.10, 0.12, 0.30}, 0.05);
  EXPECT_EQ(idx.neighbours(0), std::vector<std::size_t>{1});
  EXPECT_EQ(idx.neighbours(1), std::vector<std::size_t>{0});
  EXPECT_TRUE(idx.neighbours(2).empty());

  PositiveIndex none({0.1, 0.1, 0.1}, 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(none.count(i), 0u);
}

TEST(PositiveIndex, MatchesPairwiseScan) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> grid(0, 400);
  std::vector<double> p(10000);
  // Coarse grid so ties and exact-delta gaps are common.
  for (double& v : p) v = grid(rng) / 400.0;
  for (double delta : {0.05, 0.0025, 0.01}) {
    PositiveIndex idx(p, delta);
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::vector<std::size_t> brute;
      for (std::size_t j = 0; j < p.size(); ++j)
        if (j != i && std::abs(p[i] - p[j]) < delta) brute.push_back(j);
      ASSERT_EQ(idx.neighbours(i), brute) << "i=" << i << " delta=" << delta;
    }
  }
}

TEST(SampleBatch, ShapeAndMaskFollowTheDeltaRule) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(3000);
  for (double& v : p) v = u(gen) * u(gen);
  auto ds = with_probabilities(p);
  auto idx = build_positive_index(ds, 0.05);
  std::mt19937_64 rng(5);
  for (int b = 0; b < 1000; ++b) {
    auto batch = sample_batch(ds, idx, rng);
    ASSERT_EQ(batch.size(), 128u);
    for (std::size_t i = 0; i < 128; ++i) {
      ASSERT_FALSE(batch.positive(i, i));
      for (std::size_t j = 0; j < 128; ++j)
        ASSERT_EQ(batch.positive(i, j), i != j && std::abs(batch.p_white[i] - batch.p_white[j]) < 0.05);
    }
    for (int g = 0; g < 21; ++g) {
      std::size_t a = g * 6;
      int own = 0;
      for (std::size_t j = a + 1; j < a + 6; ++j) own += batch.positive(a, j);
      ASSERT_EQ(own, 5);
      std::set<std::size_t> distinct(batch.indices.begin() + a, batch.indices.begin() + a + 6);
      ASSERT_EQ(distinct.size(), 6u);
    }
  }
}

TEST(SampleBatch, RedrawsAnchorsWithoutEnoughPositives) {
  // Only the cluster near 0.5 has five neighbours.
  std::vector<double> p = {0.0, 0.2, 0.9, 0.5, 0.51, 0.52, 0.53, 0.54, 0.55};
  auto ds = with_probabilities(p);
  auto idx = build_positive_index(ds, 0.06);
  std::mt19937_64 rng(6);
  for (int b = 0; b < 50; ++b) {
    auto batch = sample_batch(ds, idx, rng);
    for (int g = 0; g < 21; ++g) EXPECT_GE(batch.p_white[g * 6], 0.5);
  }
  auto sparse = with_probabilities({0.0, 0.5, 1.0});
  auto sparse_idx = build_positive_index(sparse, 0.05);
  EXPECT_THROW(sample_batch(sparse, sparse_idx, rng), Error);
}

}  // namespace
}  // namespace lp::data
