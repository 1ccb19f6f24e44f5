#pragma once

#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "latentplan/uci.hpp"

namespace lp::testing {

using chess::Position;

// One-layer model small enough for thousands of sessions.
inline nn::EncoderConfig micro() { return {1, 16, 8, 2, 16, 0.0, lp::vocab_size(), kSeqLen}; }

inline const nn::ModelWeights& micro_weights() {
  static const nn::ModelWeights w = nn::init_parameters<float>(micro(), 11);
  return w;
}

inline plan::AdvantageAxis micro_axis() {
  plan::EncoderEmbedder e(micro_weights());
  auto whites = {Position::from_fen("4k3/8/8/8/8/8/8/QQQQK3 w - - 0 1")};
  auto blacks = {Position::from_fen("qqqqk3/8/8/8/8/8/8/4K3 w - - 0 1")};
  return plan::compute_axis(e, std::vector<Position>(whites), std::vector<Position>(blacks));
}

inline std::string run_session(const std::string& script, uci::EngineOptions opt = {}) {
  auto embedder = std::make_shared<plan::EncoderEmbedder>(micro_weights());
  uci::Session session(embedder, micro_axis(), opt);
  std::istringstream in(script);
  std::ostringstream out;
  session.run(in, out);
  return out.str();
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

inline constexpr const char* kGoldenScript =
      "uci\n"
      "isready\n"
      "setoption name BeamWidth value 2\n"
      "ucinewgame\n"
      "position startpos moves e2e4\n"
      "go depth 2\n"
      "position fen r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3 moves f1b5\n"
      "go depth 1\n"
      "position startpos moves e2e4 e7e5 e1e3\n"
      "isready\n"
      "quit\n";

// Random command streams: valid and malformed position commands, option
// changes, go variants, stop/isready interleavings. Every go must produce
// exactly one bestmove, legal in the position the go was issued for.
struct FuzzStats {
  int sessions = 0;
  int gos = 0;
  int illegal = 0;
  int missing = 0;
  int crashes = 0;
  int order = 0;
  std::string first_failure;
};

inline void fuzz_session(std::mt19937_64& rng, const std::vector<Position>& pool, FuzzStats& stats) {
  std::ostringstream script;
  std::vector<Position> expected;  // position for each go, in order
  Position current = Position::start();
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  script << "uci\n";
  const int commands = 3 + pick(10);
  for (int c = 0; c < commands; ++c) {
    switch (pick(9)) {
      case 0: {  // startpos plus random legal moves
        Position p = Position::start();
        std::string moves;
        for (int m = pick(12); m > 0; --m) {
          auto legal = chess::legal_moves(p);
          if (legal.empty()) break;
          auto mv = legal[rng() % legal.size()];
          moves += " " + chess::to_uci(mv);
          p = chess::apply_move_unchecked(p, mv);
        }
        script << "position startpos" << (moves.empty() ? "" : " moves" + moves) << "\n";
        current = p;
        break;
      }
      case 1: {
        const Position& p = pool[rng() % pool.size()];
        script << "position fen " << p.fen() << "\n";
        current = p;
        break;
      }
      case 2: {  // illegal move keeps the previous position
        script << "position startpos moves e2e4 e2e4\n";
        break;
      }
      case 3:
        script << (pick(2) ? "position fen 8/8/8 w - - 0 1\n" : "position garbage\n");
        break;
      case 4:
        script << "setoption name " << (pick(2) ? "BeamWidth" : "Depth") << " value " << pick(5) << "\n";
        break;
      case 5:
      case 6: {
        static const char* variants[] = {"go depth 1", "go depth 2", "go", "go movetime 5",
                                         "go wtime 1000 btime 1000", "go depth 0", "go infinite"};
        std::string v = variants[pick(7)];
        script << v << "\n";
        expected.push_back(current);
        if (v == "go infinite") script << "stop\n";
        else if (pick(3) == 0) script << (pick(2) ? "stop\n" : "isready\n");
        break;
      }
      case 7:
        script << "ucinewgame\n";
        current = Position::start();
        break;
      default:
        script << (pick(2) ? "isready\n" : "debug on\n");
    }
  }
  script << "quit\n";

  uci::EngineOptions opt;
  opt.max_depth = 3;
  opt.fixed_seconds_per_ply = 0.001;
  std::string out;
  try {
    out = run_session(script.str(), opt);
  } catch (...) {
    ++stats.crashes;
    return;
  }
  ++stats.sessions;
  stats.gos += static_cast<int>(expected.size());
  auto lines = lines_of(out);
  std::size_t next = 0;
  bool seen_uciok = false;
  for (const auto& l : lines) {
    if (l == "uciok") seen_uciok = true;
    if (l == "readyok" && !seen_uciok) ++stats.order;
    if (l.rfind("bestmove ", 0) != 0) continue;
    if (next >= expected.size()) {
      ++stats.illegal;
      continue;
    }
    const Position& p = expected[next++];
    std::string mv = l.substr(9);
    bool ok = chess::legal_moves(p).empty() ? mv == "0000" : chess::parse_uci(p, mv).has_value();
    if (!ok) {
      ++stats.illegal;
      if (stats.first_failure.empty()) stats.first_failure = "illegal " + mv + " in " + p.fen();
    }
  }
  if (!seen_uciok) ++stats.order;
  stats.missing += static_cast<int>(expected.size() - next);
}

}  // namespace lp::testing
