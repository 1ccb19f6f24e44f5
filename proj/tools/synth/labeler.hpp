#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "latentplan/chess.hpp"
#include "latentplan/dataset.hpp"

namespace lp::synth {

// Centipawns from the side to move: material, piece-square terms and a mop-up
// term that rewards cornering a lone king.
int static_eval(const chess::Position& pos);

// One full ply followed by capture-only quiescence.
int search_eval(const chess::Position& pos);

// Win probability for the side to move. Checkmated = 0, mate-in-one = 1,
// draws = 0.5, otherwise a logistic on search_eval.
double mover_win_probability(const chess::Position& pos, std::span<const chess::Position> history = {});

struct GenerateOptions {
  std::size_t positions = 10000;
  int samples_per_game = 8;
  int max_plies = 240;
  std::uint64_t seed = 1;
};

// Positions drawn from self-play games with randomized per-side policies
// (uniform random through near-greedy). Late-game positions, including mates
// and mates-in-one, are always sampled. p_white is White-relative.
data::Dataset generate(const GenerateOptions& options);

}  // namespace lp::synth
