#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "latentplan/elo.hpp"
#include "latentplan/error.hpp"
#include "latentplan/match.hpp"
#include "stub_embedders.hpp"

namespace lp::eval {
namespace {

std::string fake(const std::string& args) { return std::string(LP_FAKE_UCI) + " " + args; }

TEST(Match, RandomVsRandomBookkeeping) {
  RandomMover a(1), b(2);
  MatchSpec spec;
  spec.games = 10;
  int calls = 0;
  auto rec = play_match(a, b, spec, [&](const GameRecord&) { ++calls; });
  EXPECT_EQ(calls, 10);
  ASSERT_EQ(rec.games.size(), 10u);
  EXPECT_EQ(rec.wins + rec.draws + rec.losses, 10);
  for (const auto& g : rec.games) {
    EXPECT_EQ(g.ours_white, g.index % 2 == 0);
    auto st = replay(g);
    EXPECT_TRUE(st.terminal());
    EXPECT_EQ(st, g.final_status);
    EXPECT_EQ(chess::to_string(st.kind), g.termination);
  }
}

TEST(Match, GreedyBeatsRandom) {
  MaterialGreedy greedy(3);
  RandomMover random(4);
  MatchSpec spec;
  spec.games = 20;
  auto rec = play_match(greedy, random, spec);
  EXPECT_GT(rec.score(), 0.6);
}

TEST(Match, SameSeedsSameGames) {
  auto run = [] {
    RandomMover a(7), b(8);
    MatchSpec spec;
    spec.games = 4;
    return play_match(a, b, spec);
  };
  auto x = run(), y = run();
  for (int i = 0; i < 4; ++i) EXPECT_EQ(x.games[i].moves, y.games[i].moves);
}

TEST(Match, EnginePlayerFindsMateAgainstRandom) {
  auto embedder = std::make_shared<lp::testing::ScalarEmbedder>(lp::testing::material_embedder());
  EnginePlayer engine(embedder, lp::testing::unit_x_axis(), plan::PlanConfig{});
  RandomMover random(5);
  MatchSpec spec;
  spec.games = 4;
  auto rec = play_match(engine, random, spec);
  EXPECT_GE(rec.score(), 0.75);
}

TEST(Match, PgnAndSummary) {
  RandomMover a(1), b(2);
  MatchSpec spec;
  spec.games = 2;
  auto rec = play_match(a, b, spec);
  std::ostringstream pgn, tsv;
  write_pgn(pgn, rec, spec);
  write_summary(tsv, rec);
  EXPECT_NE(pgn.str().find("[Round \"2\"]"), std::string::npos);
  EXPECT_NE(pgn.str().find("1. "), std::string::npos);
  EXPECT_NE(pgn.str().find("[Result \"" + rec.games[0].pgn_result() + "\"]"), std::string::npos);
  std::istringstream lines(pgn.str());
  for (std::string line; std::getline(lines, line);) EXPECT_LE(line.size(), 79u);
  std::istringstream rows(tsv.str());
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 3);
}

TEST(UciOpponent, PlaysThroughTheProtocol) {
  UciProcessPlayer opp(fake("first"));
  EXPECT_EQ(opp.name(), "fake-first");
  RandomMover ours(9);
  MatchSpec spec;
  spec.games = 2;
  auto rec = play_match(ours, opp, spec);
  for (const auto& g : rec.games) {
    EXPECT_EQ(g.termination.find("forfeit"), std::string::npos) << g.termination;
    EXPECT_NO_THROW(replay(g));
  }
}

TEST(UciOpponent, IllegalMoveForfeits) {
  UciProcessPlayer opp(fake("illegal"));
  RandomMover ours(9);
  MatchSpec spec;
  spec.games = 2;
  auto rec = play_match(ours, opp, spec);
  EXPECT_EQ(rec.wins, 2);
  EXPECT_EQ(rec.games[0].termination, "forfeit: illegal move a1a1 by opponent");
  EXPECT_EQ(rec.games[0].moves.size(), 1u);  // White moved, Black forfeited
}

TEST(UciOpponent, CrashForfeitsThatGameOnly) {
  UciProcessPlayer opp(fake("crash 3"));
  RandomMover ours(9);
  MatchSpec spec;
  spec.games = 3;
  auto rec = play_match(ours, opp, spec);
  EXPECT_NE(rec.games[0].termination.find("forfeit: failure"), std::string::npos) << rec.games[0].termination;
  EXPECT_EQ(rec.games[0].result, Result::kWin);
  // Relaunched for the next game, where it crashes on its third go again.
  EXPECT_NE(rec.games[1].termination.find("forfeit: failure"), std::string::npos);
  EXPECT_EQ(rec.games.size(), 3u);
}

TEST(UciOpponent, SilentEngineTimesOut) {
  UciProcessPlayer opp(fake("silent"), {}, 300);
  RandomMover ours(9);
  MatchSpec spec;
  spec.games = 1;
  spec.movetime_ms = 1;
  auto rec = play_match(ours, opp, spec);
  EXPECT_NE(rec.games[0].termination.find("timed out"), std::string::npos) << rec.games[0].termination;
}

TEST(UciOpponent, StartFailureIsSetupError) {
  try {
    UciProcessPlayer opp(fake("dead"), {}, 2000);
    FAIL() << "expected setup error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSetup);
  }
  EXPECT_THROW(UciProcessPlayer("/nonexistent/engine", {}, 2000), Error);
  EXPECT_THROW(UciProcessPlayer(fake("first"), {"NoEquals"}), Error);
}

TEST(Replay, RejectsIllegalRecord) {
  GameRecord g;
  g.moves = {chess::Move{12, 36}};  // e2e5
  try {
    replay(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllegalMove);
    EXPECT_NE(std::string(e.what()).find("ply 1"), std::string::npos);
  }
}

TEST(Elo, EvenScoreSitsOnTheAnchor) {
  std::vector<OpponentTally> t{{2000, 50, 0, 50}};
  auto e = estimate_elo(t);
  EXPECT_NEAR(e.rating, 2000, 5);
  EXPECT_EQ(e.draw_nu, 0);
  EXPECT_LT(e.lower, e.rating);
  EXPECT_GT(e.upper, e.rating);
}

TEST(Elo, ThreeQuarterScoreInvertsTheLogistic) {
  // 1 / (1 + 10^(-d/400)) = 0.75  =>  d = 400 log10(3)
  std::vector<OpponentTally> t{{1500, 750, 0, 250}};
  auto e = estimate_elo(t);
  EXPECT_NEAR(e.rating - 1500, 400 * std::log10(3.0), 5);
}

TEST(Elo, RecoversSyntheticGap) {
  // Games drawn from the Davidson model itself: true gap 200, nu = 0.6.
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    std::mt19937_64 rng(seed);
    const double g = std::pow(10.0, 200.0 / 800), nu = 0.6;
    const double z = g + 1 / g + nu;
    std::discrete_distribution<int> d({g / z, nu / z, 1 / g / z});
    OpponentTally t{1800, 0, 0, 0};
    for (int i = 0; i < 1000; ++i) {
      int k = d(rng);
      (k == 0 ? t.wins : k == 1 ? t.draws : t.losses)++;
    }
    std::vector<OpponentTally> ts{t};
    auto e = estimate_elo(ts);
    EXPECT_NEAR(e.rating - 1800, 200, 60) << "seed " << seed;
    EXPECT_NEAR(e.draw_nu, nu, 0.15);
    EXPECT_LT(e.lower, 2000);
    EXPECT_GT(e.upper, 1900);
  }
}

TEST(Elo, AnchorShiftAndOrderInvariance) {
  std::vector<OpponentTally> t{{1600, 30, 10, 20}, {1900, 12, 9, 40}, {1750, 5, 5, 5}};
  auto base = estimate_elo(t);
  auto shifted = t;
  for (auto& o : shifted) o.anchor += 100;
  EXPECT_NEAR(estimate_elo(shifted).rating, base.rating + 100, 1e-6);
  auto reversed = std::vector<OpponentTally>(t.rbegin(), t.rend());
  EXPECT_NEAR(estimate_elo(reversed).rating, base.rating, 1e-9);
}

TEST(Elo, IntervalShrinksWithMoreGames) {
  std::vector<OpponentTally> few{{2000, 6, 2, 4}}, many{{2000, 60, 20, 40}};
  auto a = estimate_elo(few), b = estimate_elo(many);
  EXPECT_LT(b.upper - b.lower, a.upper - a.lower);
}

TEST(Elo, UnboundedCases) {
  auto code = [](std::vector<OpponentTally> t) {
    try {
      estimate_elo(t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode{};
  };
  EXPECT_EQ(code({}), ErrorCode::kUnbounded);
  EXPECT_EQ(code({{2000, 0, 10, 0}}), ErrorCode::kUnbounded);
  // One-sided results stay finite thanks to the prior.
  std::vector<OpponentTally> sweep{{2000, 20, 0, 0}};
  auto e = estimate_elo(sweep);
  EXPECT_TRUE(std::isfinite(e.rating));
  EXPECT_GT(e.rating, 2200);
}

}  // namespace
}  // namespace lp::eval
