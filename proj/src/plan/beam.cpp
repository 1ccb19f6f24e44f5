#include <algorithm>
#include <string>
#include <tuple>

#include "latentplan/error.hpp"
#include "latentplan/planner.hpp"

namespace lp::plan {

using chess::Color;
using chess::Move;
using chess::Position;

namespace {

enum class Outcome { kNone, kWin, kLoss, kDraw };

struct Node {
  Position pos;
  std::vector<Position> path;  // positions after each move of the line
  std::vector<Move> moves;
  std::string line;  // space-separated coordinate notation
  double utility = 0;
  Outcome outcome = Outcome::kNone;
  int group = 0;  // index of the parent in the previous beam
};

// Wins outrank equal-utility non-terminals and prefer fewer plies; losses
// prefer more plies.
std::tuple<double, int, int> rank(const Node& n) {
  const int depth = static_cast<int>(n.moves.size());
  switch (n.outcome) {
    case Outcome::kWin: return {n.utility, 2, -depth};
    case Outcome::kLoss: return {n.utility, 0, depth};
    default: return {n.utility, 1, 0};
  }
}

bool better(const Node& a, const Node& b) {
  auto ra = rank(a), rb = rank(b);
  if (ra != rb) return ra > rb;
  return a.line < b.line;
}

bool worse(const Node& a, const Node& b) {
  auto ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb;
  return a.line < b.line;
}

void fill_result(SearchResult& r, const Node& best, int depth) {
  r.best = best.moves.front();
  r.utility = best.utility;
  r.line = best.moves;
  r.completed_depth = depth;
}

}  // namespace

void PlanConfig::validate() const {
  if (beam_width < 1) throw Error(ErrorCode::kConfig, "plan config: beam width must be >= 1");
  if (depth < 1) throw Error(ErrorCode::kConfig, "plan config: depth must be >= 1");
}

SearchResult search(const PositionEmbedder& embedder, const AdvantageAxis& axis, const Position& root,
                    std::span<const Position> history, const PlanConfig& cfg,
                    const std::atomic<bool>* stop) {
  cfg.validate();
  if (embedder.dim() != axis.dim())
    throw Error(ErrorCode::kShape, "embedder dimension does not match axis");
  if (chess::legal_moves(root).empty())
    throw Error(ErrorCode::kInvalidArgument, "search: root position has no legal moves");

  // Repetition and fifty-move checks never look further back than 100 plies.
  if (history.size() > 101) history = history.subspan(history.size() - 101);
  const Color engine = root.side_to_move();
  const double sign = engine == Color::kWhite ? 1.0 : -1.0;
  const auto k = static_cast<std::size_t>(cfg.beam_width);

  std::vector<Node> beam(1);
  beam[0].pos = root;
  SearchResult result;
  std::vector<Position> line_history;
  std::vector<Position> to_embed;
  std::vector<std::size_t> embed_slot;

  for (int ply = 1; ply <= cfg.depth; ++ply) {
    if (ply > 1 && stop && stop->load()) break;
    std::vector<Node> cand;
    to_embed.clear();
    embed_slot.clear();
    for (std::size_t pi = 0; pi < beam.size(); ++pi) {
      const Node& parent = beam[pi];
      if (parent.outcome != Outcome::kNone) {
        cand.push_back(parent);
        cand.back().group = static_cast<int>(pi);
        continue;
      }
      for (Move m : chess::legal_moves(parent.pos)) {
        Node child;
        child.pos = chess::apply_move_unchecked(parent.pos, m);
        child.path = parent.path;
        child.path.push_back(child.pos);
        child.moves = parent.moves;
        child.moves.push_back(m);
        child.line = parent.line.empty() ? chess::to_uci(m) : parent.line + " " + chess::to_uci(m);
        child.group = static_cast<int>(pi);
        cand.push_back(std::move(child));
      }
    }
    // Terminal classification needs the line's own history, which includes
    // the parent position itself.
    for (auto& c : cand) {
      if (c.outcome != Outcome::kNone || c.moves.size() != static_cast<std::size_t>(ply)) continue;
      line_history.assign(history.begin(), history.end());
      line_history.push_back(root);
      line_history.insert(line_history.end(), c.path.begin(), c.path.end() - 1);
      auto st = chess::status(c.pos, line_history);
      if (st.kind == chess::GameStatusKind::kCheckmate) {
        c.outcome = st.winner == engine ? Outcome::kWin : Outcome::kLoss;
        c.utility = c.outcome == Outcome::kWin ? 1.0 : -1.0;
      } else if (st.terminal()) {
        c.outcome = Outcome::kDraw;
        c.utility = 0.0;
      } else {
        embed_slot.push_back(&c - cand.data());
        to_embed.push_back(c.pos);
      }
    }
    if (!to_embed.empty()) {
      nn::Matrix<float> z = embedder.embed(to_embed);
      for (std::size_t i = 0; i < embed_slot.size(); ++i)
        cand[embed_slot[i]].utility = sign * cosine(std::span<const float>(z.row(i).data(), z.cols()), axis);
      result.embedded += to_embed.size();
    }

    if (ply == 1) {
      const Node* mate = nullptr;
      for (const auto& c : cand)
        if (c.outcome == Outcome::kWin && (!mate || better(c, *mate))) mate = &c;
      if (mate) {
        fill_result(result, *mate, 1);
        return result;
      }
    }

    const bool engine_ply = ply % 2 == 1;
    std::vector<Node> next;
    if (cfg.literal() || engine_ply) {
      const std::size_t keep = std::min(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), better);
      cand.resize(keep);
      next = std::move(cand);
    } else {
      // Each line keeps only the opponent's strongest reply.
      std::vector<int> pick(beam.size(), -1);
      for (std::size_t i = 0; i < cand.size(); ++i) {
        int& p = pick[cand[i].group];
        if (p < 0 || worse(cand[i], cand[p])) p = static_cast<int>(i);
      }
      for (int p : pick)
        if (p >= 0) next.push_back(std::move(cand[p]));
    }
    beam = std::move(next);
    const Node* best = &beam.front();
    for (const auto& n : beam)
      if (better(n, *best)) best = &n;
    fill_result(result, *best, ply);
  }
  return result;
}

Move select_move(const PositionEmbedder& embedder, const AdvantageAxis& axis, const Position& root,
                 const PlanConfig& config, std::span<const Position> history) {
  return search(embedder, axis, root, history, config).best;
}

}  // namespace lp::plan
