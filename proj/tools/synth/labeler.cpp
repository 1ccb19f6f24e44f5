#include "labeler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace lp::synth {

using chess::Color;
using chess::Move;
using chess::PieceType;
using chess::Position;

namespace {

constexpr int kValue[6] = {100, 320, 330, 500, 900, 0};

// Indexed from White's side, a1 = 0.
constexpr int kPawnTable[64] = {
    0,  0,  0,   0,   0,   0,   0,  0,  5,  10, 10, -20, -20, 10, 10, 5,
    5,  -5, -10, 0,   0,   -10, -5, 5,  0,  0,  0,  20,  20,  0,  0,  0,
    5,  5,  10,  25,  25,  10,  5,  5,  10, 10, 20, 30,  30,  20, 10, 10,
    50, 50, 50,  50,  50,  50,  50, 50, 0,  0,  0,  0,   0,   0,  0,  0};
constexpr int kKnightTable[64] = {
    -50, -40, -30, -30, -30, -30, -40, -50, -40, -20, 0,   5,   5,   0,   -20, -40,
    -30, 5,   10,  15,  15,  10,  5,   -30, -30, 0,   15,  20,  20,  15,  0,   -30,
    -30, 5,   15,  20,  20,  15,  5,   -30, -30, 0,   10,  15,  15,  10,  0,   -30,
    -40, -20, 0,   0,   0,   0,   -20, -40, -50, -40, -30, -30, -30, -30, -40, -50};
constexpr int kBishopTable[64] = {
    -20, -10, -10, -10, -10, -10, -10, -20, -10, 5,   0,   0,   0,   0,   5,   -10,
    -10, 10,  10,  10,  10,  10,  10,  -10, -10, 0,   10,  10,  10,  10,  0,   -10,
    -10, 5,   5,   10,  10,  5,   5,   -10, -10, 0,   5,   10,  10,  5,   0,   -10,
    -10, 0,   0,   0,   0,   0,   0,   -10, -20, -10, -10, -10, -10, -10, -10, -20};
constexpr int kKingTable[64] = {
    20,  30,  10,  0,   0,   10,  30,  20,  20,  20,  0,   0,   0,   0,   20,  20,
    -10, -20, -20, -20, -20, -20, -20, -10, -20, -30, -30, -40, -40, -30, -30, -20,
    -30, -40, -40, -50, -50, -40, -40, -30, -30, -40, -40, -50, -50, -40, -40, -30,
    -30, -40, -40, -50, -50, -40, -40, -30, -30, -40, -40, -50, -50, -40, -40, -30};

int centre_distance(int sq) {
  int f = chess::file_of(static_cast<chess::Square>(sq)), r = chess::rank_of(static_cast<chess::Square>(sq));
  return std::max(3 - std::min(f, 7 - f), 3 - std::min(r, 7 - r));
}

int king_distance(int a, int b) {
  return std::max(std::abs(chess::file_of(static_cast<chess::Square>(a)) - chess::file_of(static_cast<chess::Square>(b))),
                  std::abs(chess::rank_of(static_cast<chess::Square>(a)) - chess::rank_of(static_cast<chess::Square>(b))));
}

int white_score(const Position& pos) {
  int score = 0;
  int material[2] = {0, 0};
  for (int sq = 0; sq < 64; ++sq) {
    chess::Piece p = pos.piece_at(static_cast<chess::Square>(sq));
    if (p == chess::Piece::kNone) continue;
    const int t = static_cast<int>(chess::type_of(p));
    const bool white = chess::color_of(p) == Color::kWhite;
    const int idx = white ? sq : (sq ^ 56);
    int v = kValue[t];
    material[white ? 0 : 1] += v;
    switch (chess::type_of(p)) {
      case PieceType::kPawn: v += kPawnTable[idx]; break;
      case PieceType::kKnight: v += kKnightTable[idx]; break;
      case PieceType::kBishop: v += kBishopTable[idx]; break;
      default: break;
    }
    score += white ? v : -v;
  }
  const int wk = pos.king_square(Color::kWhite), bk = pos.king_square(Color::kBlack);
  const bool endgame = material[0] + material[1] <= 2600;
  if (!endgame) {
    score += kKingTable[wk] - kKingTable[bk ^ 56];
  } else {
    // Kings centralize; the stronger side drives the weaker king to the edge.
    score += 10 * (centre_distance(bk) - centre_distance(wk));
    const int diff = material[0] - material[1];
    if (std::abs(diff) >= 300) {
      const int loser = diff > 0 ? bk : wk;
      const int mop = 20 * centre_distance(loser) + 10 * (7 - king_distance(wk, bk));
      score += diff > 0 ? mop : -mop;
    }
  }
  return score;
}

int piece_value(const Position& pos, chess::Square s) {
  chess::Piece p = pos.piece_at(s);
  return p == chess::Piece::kNone ? 0 : kValue[static_cast<int>(chess::type_of(p))];
}

int quiesce(const Position& pos, int alpha, int beta, int depth) {
  const bool check = pos.in_check();
  auto moves = chess::legal_moves(pos);
  if (moves.empty()) return check ? -30000 : 0;
  int stand = static_eval(pos);
  if (!check) {
    if (stand >= beta) return stand;
    alpha = std::max(alpha, stand);
  }
  if (depth <= 0) return check ? stand : alpha;
  std::vector<std::pair<int, Move>> tactical;
  for (Move m : moves) {
    bool capture = chess::is_capture(pos, m);
    if (!check && !capture && m.promotion != PieceType::kQueen) continue;
    int victim = capture ? (pos.piece_at(m.to) == chess::Piece::kNone ? 100 : piece_value(pos, m.to)) : 0;
    tactical.push_back({10 * victim - piece_value(pos, m.from) / 10, m});
  }
  std::sort(tactical.begin(), tactical.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  int best = check ? -30000 : alpha;
  for (const auto& [order, m] : tactical) {
    int v = -quiesce(chess::apply_move_unchecked(pos, m), -beta, -std::max(alpha, best), depth - 1);
    best = std::max(best, v);
    if (best >= beta) break;
  }
  return best;
}

}  // namespace

int static_eval(const Position& pos) {
  int s = white_score(pos);
  return pos.side_to_move() == Color::kWhite ? s : -s;
}

int search_eval(const Position& pos) {
  auto moves = chess::legal_moves(pos);
  if (moves.empty()) return pos.in_check() ? -30000 : 0;
  int best = -30001;
  for (Move m : moves) {
    int v = -quiesce(chess::apply_move_unchecked(pos, m), -30001, -best, 6);
    best = std::max(best, v);
  }
  return best;
}

double mover_win_probability(const Position& pos, std::span<const Position> history) {
  auto st = chess::status(pos, history);
  if (st.kind == chess::GameStatusKind::kCheckmate) return 0.0;
  if (st.terminal()) return 0.5;
  for (Move m : chess::legal_moves(pos)) {
    Position child = chess::apply_move_unchecked(pos, m);
    if (child.in_check() && chess::legal_moves(child).empty()) return 1.0;
  }
  int cp = std::clamp(search_eval(pos), -3000, 3000);
  return 1.0 / (1.0 + std::exp(-0.00368 * cp));
}

data::Dataset generate(const GenerateOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  data::Dataset out;
  out.reserve(opt.positions);
  while (out.size() < opt.positions) {
    // Per-side temperature in centipawns; large = close to uniform random.
    double temp[2];
    for (double& t : temp) t = std::pow(10.0, 1.0 + 3.0 * unit(rng));
    std::vector<Position> game{Position::start()};
    chess::GameStatus st;
    while (static_cast<int>(game.size()) <= opt.max_plies) {
      const Position& pos = game.back();
      st = chess::status(pos, std::span<const Position>(game.data(), game.size() - 1));
      if (st.terminal()) break;
      auto moves = chess::legal_moves(pos);
      const double t = temp[static_cast<int>(pos.side_to_move())];
      std::vector<double> w(moves.size());
      double mx = -1e300;
      for (std::size_t i = 0; i < moves.size(); ++i) {
        Position child = chess::apply_move_unchecked(pos, moves[i]);
        double v = child.in_check() && chess::legal_moves(child).empty() ? 30000 : -static_eval(child);
        w[i] = v / t;
        mx = std::max(mx, w[i]);
      }
      for (double& x : w) x = std::exp(x - mx);
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      game.push_back(chess::apply_move_unchecked(pos, moves[pick(rng)]));
    }

    std::vector<std::size_t> chosen;
    const std::size_t n = game.size();
    for (std::size_t back = 1; back <= std::min<std::size_t>(2, n); ++back) chosen.push_back(n - back);
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    for (int s = 0; s < opt.samples_per_game; ++s) chosen.push_back(any(rng));
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    for (std::size_t i : chosen) {
      if (out.size() >= opt.positions) break;
      const Position& pos = game[i];
      data::AnnotatedPosition row;
      row.position = pos;
      row.tokens = tokenize(pos);
      double p = mover_win_probability(pos, std::span<const Position>(game.data(), i));
      row.p_white = pos.side_to_move() == Color::kWhite ? p : 1.0 - p;
      out.push_back(std::move(row));
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace lp::synth
