#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "latentplan/planner.hpp"

namespace lp::eval {

// What a player sees when asked for a move.
struct GameContext {
  const chess::Position& start;
  std::span<const chess::Move> moves;        // played so far from start
  const chess::Position& position;           // current
  std::span<const chess::Position> history;  // earlier positions, oldest first
  int movetime_ms = 50;
};

// Raised by a player that could not produce a move (crash, timeout, garbled
// output). The match forfeits the game and carries on.
class PlayerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Player {
 public:
  virtual ~Player() = default;
  virtual std::string name() const = 0;
  virtual void new_game() {}
  // May return an illegal move; the match forfeits the game for it.
  virtual chess::Move choose(const GameContext& ctx) = 0;
};

// Uniform over legal moves.
class RandomMover final : public Player {
 public:
  explicit RandomMover(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random-mover"; }
  chess::Move choose(const GameContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

// Mates when it can, otherwise grabs the most valuable capture or promotion;
// ties break uniformly at random.
class MaterialGreedy final : public Player {
 public:
  explicit MaterialGreedy(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "material-greedy"; }
  chess::Move choose(const GameContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

// Beam search over the embedder/axis pair at a fixed configuration; the
// per-move time budget is ignored.
class EnginePlayer final : public Player {
 public:
  EnginePlayer(std::shared_ptr<const plan::PositionEmbedder> embedder, plan::AdvantageAxis axis,
               plan::PlanConfig config, std::string name = "latentplan");
  std::string name() const override { return name_; }
  chess::Move choose(const GameContext& ctx) override;

 private:
  std::shared_ptr<const plan::PositionEmbedder> embedder_;
  plan::AdvantageAxis axis_;
  plan::PlanConfig config_;
  std::string name_;
};

// Any UCI engine launched through /bin/sh -c. Throws lp::Error(kSetup) when
// the handshake fails. A bestmove may arrive up to response_timeout_ms after
// the movetime has elapsed. A player that crashed is relaunched by new_game().
class UciProcessPlayer final : public Player {
 public:
  // options are "Name=value" pairs sent as setoption after the handshake.
  UciProcessPlayer(std::string command, std::vector<std::string> options = {},
                   int response_timeout_ms = 10000);
  ~UciProcessPlayer() override;
  UciProcessPlayer(const UciProcessPlayer&) = delete;
  UciProcessPlayer& operator=(const UciProcessPlayer&) = delete;

  std::string name() const override { return name_; }
  void new_game() override;
  chess::Move choose(const GameContext& ctx) override;

 private:
  void launch();
  void shutdown();
  void send(const std::string& line);
  std::string read_line(int timeout_ms);
  std::string wait_for(const std::string& prefix, int timeout_ms);

  std::string command_;
  std::vector<std::string> options_;
  int response_timeout_ms_;
  std::string name_;
  int pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

enum class Result { kWin, kDraw, kLoss };  // from our side

struct GameRecord {
  int index = 0;  // 0-based
  bool ours_white = true;
  std::vector<chess::Move> moves;
  Result result = Result::kDraw;
  std::string termination;  // e.g. "checkmate", "forfeit: illegal move e2e5 by opponent"
  chess::GameStatus final_status;

  std::string pgn_result() const;  // "1-0", "0-1", "1/2-1/2"
};

struct MatchSpec {
  int games = 10;
  int movetime_ms = 50;
  std::string event = "latentplan match";

  void validate() const;
};

struct MatchRecord {
  std::string ours;
  std::string opponent;
  std::vector<GameRecord> games;
  int wins = 0;
  int draws = 0;
  int losses = 0;

  double score() const;  // (W + D/2) / games
};

// Plays spec.games games, ours taking White in games 0, 2, 4, ... Games end
// only by checkmate, stalemate, fifty moves, threefold repetition,
// insufficient material or forfeit. on_game runs after every game.
MatchRecord play_match(Player& ours, Player& opponent, const MatchSpec& spec,
                       const std::function<void(const GameRecord&)>& on_game = {});

void write_pgn(std::ostream& out, const MatchRecord& record, const MatchSpec& spec);
// index, ours_colour, result, pgn_result, plies, termination
void write_summary(std::ostream& out, const MatchRecord& record);

// Replays a record from the start position; throws lp::Error(kIllegalMove)
// naming the ply on failure. Returns the final status.
chess::GameStatus replay(const GameRecord& game);

}  // namespace lp::eval
