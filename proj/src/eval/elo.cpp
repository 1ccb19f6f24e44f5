#include <cmath>
#include <numeric>

#include "latentplan/elo.hpp"
#include "latentplan/error.hpp"

namespace lp::eval {

OpponentTally tally(const MatchRecord& record, double anchor) {
  return {anchor, record.wins, record.draws, record.losses};
}

namespace {

constexpr double kScale = 0.0028782313662425573;  // ln(10) / 800

struct Posterior {
  std::span<const OpponentTally> t;
  double prior_mean;
  bool draws;

  // Log posterior, gradient and Hessian in (r, u = log nu).
  double eval(double r, double u, double g[2], double h[2][2]) const {
    double lp = -0.5 * (r - prior_mean) * (r - prior_mean) / (kEloPriorSigma * kEloPriorSigma);
    g[0] = -(r - prior_mean) / (kEloPriorSigma * kEloPriorSigma);
    g[1] = 0;
    h[0][0] = -1 / (kEloPriorSigma * kEloPriorSigma);
    h[0][1] = h[1][0] = h[1][1] = 0;
    const double nu = draws ? std::exp(u) : 0.0;
    for (const auto& o : t) {
      const double y = kScale * (r - o.anchor);  // log g
      const double a = std::exp(y), b = std::exp(-y), z = a + b + nu;
      const double gy = (a - b) / z;              // d log z / dy
      const double gu = nu / z;                   // d log z / du
      const double hyy = (a + b) / z - gy * gy;
      const double huu = gu - gu * gu;
      const double hyu = -gy * gu;
      const double n = o.wins + o.draws + o.losses;
      lp += o.wins * y - o.losses * y + (draws ? o.draws * u : 0.0) - n * std::log(z);
      g[0] += kScale * (o.wins - o.losses - n * gy);
      h[0][0] -= kScale * kScale * n * hyy;
      if (draws) {
        g[1] += o.draws - n * gu;
        h[1][1] -= n * huu;
        h[0][1] -= kScale * n * hyu;
      }
    }
    h[1][0] = h[0][1];
    if (!draws) h[1][1] = -1;  // keeps the 2x2 solve well posed
    return lp;
  }
};

}  // namespace

EloEstimate estimate_elo(std::span<const OpponentTally> tallies) {
  double games = 0, weighted = 0;
  int wins = 0, draws = 0, losses = 0;
  for (const auto& o : tallies) {
    if (o.wins < 0 || o.draws < 0 || o.losses < 0)
      throw Error(ErrorCode::kInvalidArgument, "elo: negative game count");
    const double n = o.wins + o.draws + o.losses;
    games += n;
    weighted += n * o.anchor;
    wins += o.wins;
    draws += o.draws;
    losses += o.losses;
  }
  if (wins + losses == 0)
    throw Error(ErrorCode::kUnbounded,
                games == 0 ? "elo: no games; play at least one decisive game"
                           : "elo: every game was drawn, so the draw parameter is unbounded; play more games "
                             "or choose opponents of different strength");

  Posterior post{tallies, weighted / games, draws > 0};
  double r = post.prior_mean, u = 0;
  double g[2], h[2][2];
  double f = post.eval(r, u, g, h);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(g[0]) < 1e-10 && std::abs(g[1]) < 1e-10) break;
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    double dr, du;
    if (h[0][0] < 0 && det > 0) {  // negative definite: Newton
      dr = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
      du = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
    } else {
      dr = g[0] * 1e4;
      du = g[1];
    }
    if (!post.draws) du = 0;
    double step = 1;
    double g2[2], h2[2][2], f2 = 0;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      f2 = post.eval(r + step * dr, u + step * du, g2, h2);
      if (f2 >= f - 1e-12) break;
    }
    r += step * dr;
    u += step * du;
    f = post.eval(r, u, g, h);
  }
  const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
  const double var_r = post.draws ? -h[1][1] / det : -1 / h[0][0];
  const double half = 1.959963984540054 * std::sqrt(var_r);

  EloEstimate e;
  e.rating = r;
  e.lower = r - half;
  e.upper = r + half;
  e.draw_nu = post.draws ? std::exp(u) : 0.0;
  e.prior_mean = post.prior_mean;
  for (const auto& o : tallies) e.anchors.push_back(o.anchor);
  return e;
}

}  // namespace lp::eval
