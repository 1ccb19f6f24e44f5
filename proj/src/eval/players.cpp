#include "latentplan/error.hpp"
#include "latentplan/match.hpp"

namespace lp::eval {

using chess::Move;
using chess::PieceType;
using chess::Position;

namespace {

int value(PieceType t) {
  switch (t) {
    case PieceType::kPawn: return 1;
    case PieceType::kKnight:
    case PieceType::kBishop: return 3;
    case PieceType::kRook: return 5;
    case PieceType::kQueen: return 9;
    default: return 0;
  }
}

}  // namespace

Move RandomMover::choose(const GameContext& ctx) {
  auto moves = chess::legal_moves(ctx.position);
  if (moves.empty()) throw Error(ErrorCode::kInvalidArgument, "random-mover: no legal moves");
  return moves[rng_() % moves.size()];
}

Move MaterialGreedy::choose(const GameContext& ctx) {
  const Position& pos = ctx.position;
  auto moves = chess::legal_moves(pos);
  if (moves.empty()) throw Error(ErrorCode::kInvalidArgument, "material-greedy: no legal moves");
  std::vector<Move> best;
  int best_score = -1;
  for (Move m : moves) {
    int score = 0;
    Position next = chess::apply_move_unchecked(pos, m);
    if (next.in_check() && chess::legal_moves(next).empty()) {
      score = 1000;
    } else {
      if (chess::is_capture(pos, m)) {
        auto victim = chess::type_of(pos.piece_at(m.to));
        score += victim == PieceType::kNone ? 1 : value(victim);  // en passant
      }
      if (m.promotion != PieceType::kNone) score += value(m.promotion) - 1;
    }
    if (score > best_score) {
      best_score = score;
      best.clear();
    }
    if (score == best_score) best.push_back(m);
  }
  return best[rng_() % best.size()];
}

EnginePlayer::EnginePlayer(std::shared_ptr<const plan::PositionEmbedder> embedder, plan::AdvantageAxis axis,
                           plan::PlanConfig config, std::string name)
    : embedder_(std::move(embedder)), axis_(std::move(axis)), config_(config), name_(std::move(name)) {
  if (!embedder_) throw Error(ErrorCode::kInvalidArgument, "engine player: embedder is required");
  config_.validate();
  if (embedder_->dim() != axis_.dim()) throw Error(ErrorCode::kShape, "engine player: axis dimension mismatch");
}

Move EnginePlayer::choose(const GameContext& ctx) {
  return plan::search(*embedder_, axis_, ctx.position, ctx.history, config_).best;
}

}  // namespace lp::eval
