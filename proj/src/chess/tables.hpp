#pragma once

#include <array>
#include <bit>

#include "latentplan/chess.hpp"

namespace lp::chess::detail {

struct Tables {
  std::array<Bitboard, 64> knight{};
  std::array<Bitboard, 64> king{};
  std::array<std::array<Bitboard, 64>, 2> pawn{};  // [color][square]
  std::array<std::array<Bitboard, 64>, 8> ray{};   // [direction][square]
  std::array<std::array<Bitboard, 64>, 64> between{};
  std::array<std::array<Bitboard, 64>, 64> line{};
  std::array<std::uint8_t, 64> castling_mask{};   // rights cleared on touch
};

const Tables& tables();

// Directions 0..3 are increasing square index (N, E, NE, NW), 4..7 decreasing.
inline constexpr int kRookDirs[4] = {0, 1, 4, 5};
inline constexpr int kBishopDirs[4] = {2, 3, 6, 7};

inline Square lsb(Bitboard b) { return static_cast<Square>(std::countr_zero(b)); }
inline Square msb(Bitboard b) {
  return static_cast<Square>(63 - std::countl_zero(b));
}
inline Square pop_lsb(Bitboard& b) {
  Square s = lsb(b);
  b &= b - 1;
  return s;
}

inline Bitboard ray_attacks(int dir, Square s, Bitboard occ) {
  const auto& t = tables();
  Bitboard r = t.ray[dir][s];
  Bitboard blockers = r & occ;
  if (blockers) {
    Square b = dir < 4 ? lsb(blockers) : msb(blockers);
    r ^= t.ray[dir][b];
  }
  return r;
}

inline Bitboard rook_attacks(Square s, Bitboard occ) {
  return ray_attacks(0, s, occ) | ray_attacks(1, s, occ) |
         ray_attacks(4, s, occ) | ray_attacks(5, s, occ);
}

inline Bitboard bishop_attacks(Square s, Bitboard occ) {
  return ray_attacks(2, s, occ) | ray_attacks(3, s, occ) |
         ray_attacks(6, s, occ) | ray_attacks(7, s, occ);
}

}  // namespace lp::chess::detail
