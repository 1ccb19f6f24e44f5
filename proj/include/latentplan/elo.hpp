#pragma once

#include <span>
#include <vector>

#include "latentplan/match.hpp"

namespace lp::eval {

// Games against one opponent of fixed rating.
struct OpponentTally {
  double anchor = 0;
  int wins = 0;
  int draws = 0;
  int losses = 0;
};

OpponentTally tally(const MatchRecord& record, double anchor);

struct EloEstimate {
  double rating = 0;
  double lower = 0;  // 95% interval
  double upper = 0;
  double draw_nu = 0;  // Davidson draw parameter
  double prior_mean = 0;
  std::vector<double> anchors;
};

inline constexpr double kEloPriorSigma = 350;

// Maximum a posteriori rating under the Davidson model
//   P(win)  = g / (g + 1/g + nu),  P(loss) = (1/g) / (...),  P(draw) = nu / (...)
// with g = 10^((r - anchor) / 800), opponents fixed at their anchors and a
// Gaussian prior of sd kEloPriorSigma on r centred on the game-weighted mean
// anchor. nu is fitted jointly (fixed at 0 without draws). The interval comes
// from the curvature of the log posterior at the mode. Throws
// lp::Error(kUnbounded) when there are no decisive games.
EloEstimate estimate_elo(std::span<const OpponentTally> tallies);

}  // namespace lp::eval
