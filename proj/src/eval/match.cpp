#include <algorithm>
#include <ostream>
#include <sstream>

#include "latentplan/error.hpp"
#include "latentplan/match.hpp"

namespace lp::eval {

using chess::Color;
using chess::Move;
using chess::Position;

std::string GameRecord::pgn_result() const {
  if (result == Result::kDraw) return "1/2-1/2";
  const bool white_won = (result == Result::kWin) == ours_white;
  return white_won ? "1-0" : "0-1";
}

void MatchSpec::validate() const {
  if (games < 1) throw Error(ErrorCode::kConfig, "match: games must be >= 1");
  if (movetime_ms < 1) throw Error(ErrorCode::kConfig, "match: movetime must be >= 1 ms");
}

double MatchRecord::score() const {
  const int n = wins + draws + losses;
  return n == 0 ? 0.0 : (wins + 0.5 * draws) / n;
}

namespace {

GameRecord play_game(Player& ours, Player& opponent, int index, const MatchSpec& spec) {
  GameRecord g;
  g.index = index;
  g.ours_white = index % 2 == 0;
  ours.new_game();
  opponent.new_game();

  const Position start = Position::start();
  Position pos = start;
  std::vector<Position> history;
  auto forfeit = [&](bool by_ours, const std::string& why) {
    g.result = by_ours ? Result::kLoss : Result::kWin;
    g.termination = "forfeit: " + why + " by " + (by_ours ? "engine" : "opponent");
  };
  for (;;) {
    auto st = chess::status(pos, history);
    if (st.terminal()) {
      g.final_status = st;
      g.termination = chess::to_string(st.kind);
      if (st.kind == chess::GameStatusKind::kCheckmate)
        g.result = (st.winner == Color::kWhite) == g.ours_white ? Result::kWin : Result::kLoss;
      else
        g.result = Result::kDraw;
      return g;
    }
    const bool ours_to_move = (pos.side_to_move() == Color::kWhite) == g.ours_white;
    Player& mover = ours_to_move ? ours : opponent;
    Move m;
    try {
      m = mover.choose(GameContext{start, g.moves, pos, history, spec.movetime_ms});
    } catch (const PlayerFailure& e) {
      forfeit(ours_to_move, std::string("failure (") + e.what() + ")");
      g.final_status = st;
      return g;
    }
    auto legal = chess::legal_moves(pos);
    if (std::find(legal.begin(), legal.end(), m) == legal.end()) {
      forfeit(ours_to_move, "illegal move " + chess::to_uci(m));
      g.final_status = st;
      return g;
    }
    history.push_back(pos);
    pos = chess::apply_move_unchecked(pos, m);
    g.moves.push_back(m);
  }
}

}  // namespace

MatchRecord play_match(Player& ours, Player& opponent, const MatchSpec& spec,
                       const std::function<void(const GameRecord&)>& on_game) {
  spec.validate();
  MatchRecord rec;
  rec.ours = ours.name();
  rec.opponent = opponent.name();
  for (int i = 0; i < spec.games; ++i) {
    GameRecord g = play_game(ours, opponent, i, spec);
    switch (g.result) {
      case Result::kWin: ++rec.wins; break;
      case Result::kDraw: ++rec.draws; break;
      case Result::kLoss: ++rec.losses; break;
    }
    if (on_game) on_game(g);
    rec.games.push_back(std::move(g));
  }
  return rec;
}

chess::GameStatus replay(const GameRecord& game) {
  Position pos = Position::start();
  std::vector<Position> history;
  for (std::size_t i = 0; i < game.moves.size(); ++i) {
    if (chess::status(pos, history).terminal())
      throw Error(ErrorCode::kIllegalMove, "game " + std::to_string(game.index + 1) + ": move after game end at ply " +
                                               std::to_string(i + 1));
    auto legal = chess::legal_moves(pos);
    if (std::find(legal.begin(), legal.end(), game.moves[i]) == legal.end())
      throw Error(ErrorCode::kIllegalMove, "game " + std::to_string(game.index + 1) + ": illegal move " +
                                               chess::to_uci(game.moves[i]) + " at ply " + std::to_string(i + 1));
    history.push_back(pos);
    pos = chess::apply_move_unchecked(pos, game.moves[i]);
  }
  return chess::status(pos, history);
}

void write_pgn(std::ostream& out, const MatchRecord& record, const MatchSpec& spec) {
  for (const auto& g : record.games) {
    const std::string& white = g.ours_white ? record.ours : record.opponent;
    const std::string& black = g.ours_white ? record.opponent : record.ours;
    out << "[Event \"" << spec.event << "\"]\n"
        << "[Site \"?\"]\n"
        << "[Date \"????.??.??\"]\n"
        << "[Round \"" << g.index + 1 << "\"]\n"
        << "[White \"" << white << "\"]\n"
        << "[Black \"" << black << "\"]\n"
        << "[Result \"" << g.pgn_result() << "\"]\n"
        << "[Termination \"" << g.termination << "\"]\n"
        << "[TimeControl \"" << spec.movetime_ms << "ms/move\"]\n"
        << "[PlyCount \"" << g.moves.size() << "\"]\n\n";
    std::vector<std::string> tokens;
    Position pos = Position::start();
    for (std::size_t i = 0; i < g.moves.size(); ++i) {
      if (i % 2 == 0) tokens.push_back(std::to_string(i / 2 + 1) + ".");
      tokens.push_back(chess::to_san(pos, g.moves[i]));
      pos = chess::apply_move_unchecked(pos, g.moves[i]);
    }
    if (g.termination.rfind("forfeit", 0) == 0) tokens.push_back("{" + g.termination + "}");
    tokens.push_back(g.pgn_result());
    std::size_t col = 0;
    for (const auto& t : tokens) {
      if (col > 0 && col + 1 + t.size() > 79) {
        out << '\n';
        col = 0;
      } else if (col > 0) {
        out << ' ';
        ++col;
      }
      out << t;
      col += t.size();
    }
    out << "\n\n";
  }
}

void write_summary(std::ostream& out, const MatchRecord& record) {
  out << "game\tours\tresult\tpgn_result\tplies\ttermination\n";
  for (const auto& g : record.games) {
    const char* r = g.result == Result::kWin ? "win" : g.result == Result::kDraw ? "draw" : "loss";
    out << g.index + 1 << '\t' << (g.ours_white ? "white" : "black") << '\t' << r << '\t' << g.pgn_result() << '\t'
        << g.moves.size() << '\t' << g.termination << '\n';
  }
}

}  // namespace lp::eval
