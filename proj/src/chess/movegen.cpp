#include <bit>
#include <cstdlib>

#include "latentplan/chess.hpp"
#include "latentplan/error.hpp"
#include "tables.hpp"

namespace lp::chess {

using detail::bishop_attacks;
using detail::lsb;
using detail::pop_lsb;
using detail::rook_attacks;
using detail::tables;

namespace detail {

namespace {

Tables build_tables() {
  Tables t;
  const int knight_df[8] = {1, 2, 2, 1, -1, -2, -2, -1};
  const int knight_dr[8] = {2, 1, -1, -2, -2, -1, 1, 2};
  // N, E, NE, NW, S, W, SW, SE
  const int ray_df[8] = {0, 1, 1, -1, 0, -1, -1, 1};
  const int ray_dr[8] = {1, 0, 1, 1, -1, 0, -1, -1};

  auto on_board = [](int f, int r) { return f >= 0 && f < 8 && r >= 0 && r < 8; };

  for (int s = 0; s < 64; ++s) {
    int f = s & 7, r = s >> 3;
    for (int i = 0; i < 8; ++i) {
      if (on_board(f + knight_df[i], r + knight_dr[i]))
        t.knight[s] |= bit(make_square(f + knight_df[i], r + knight_dr[i]));
    }
    for (int df = -1; df <= 1; ++df) {
      for (int dr = -1; dr <= 1; ++dr) {
        if ((df || dr) && on_board(f + df, r + dr))
          t.king[s] |= bit(make_square(f + df, r + dr));
      }
    }
    for (int df : {-1, 1}) {
      if (on_board(f + df, r + 1)) t.pawn[0][s] |= bit(make_square(f + df, r + 1));
      if (on_board(f + df, r - 1)) t.pawn[1][s] |= bit(make_square(f + df, r - 1));
    }
    for (int d = 0; d < 8; ++d) {
      int ff = f + ray_df[d], rr = r + ray_dr[d];
      while (on_board(ff, rr)) {
        t.ray[d][s] |= bit(make_square(ff, rr));
        ff += ray_df[d];
        rr += ray_dr[d];
      }
    }
  }

  for (int a = 0; a < 64; ++a) {
    for (int d = 0; d < 8; ++d) {
      Bitboard r = t.ray[d][a];
      while (r) {
        Square b = pop_lsb(r);
        // squares strictly between a and b along direction d
        t.between[a][b] = t.ray[d][a] & ~t.ray[d][b] & ~bit(b);
        int opposite = (d + 4) % 8;
        t.line[a][b] = t.ray[d][a] | t.ray[opposite][a] | bit(static_cast<Square>(a));
      }
    }
  }

  t.castling_mask.fill(0xF);
  t.castling_mask[make_square(4, 0)] = 0xF & ~(kWhiteKingside | kWhiteQueenside);
  t.castling_mask[make_square(7, 0)] = 0xF & ~kWhiteKingside;
  t.castling_mask[make_square(0, 0)] = 0xF & ~kWhiteQueenside;
  t.castling_mask[make_square(4, 7)] = 0xF & ~(kBlackKingside | kBlackQueenside);
  t.castling_mask[make_square(7, 7)] = 0xF & ~kBlackKingside;
  t.castling_mask[make_square(0, 7)] = 0xF & ~kBlackQueenside;
  return t;
}

}  // namespace

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

}  // namespace detail

namespace {

struct MoveList {
  std::array<Move, 256> moves;
  int size = 0;

  void add(Square from, Square to, PieceType promo = PieceType::kNone) {
    moves[size++] = Move{from, to, promo};
  }
};

Bitboard attackers_to(const Position& pos, Square s, Color by, Bitboard occ) {
  const auto& t = tables();
  Bitboard queens = pos.pieces(by, PieceType::kQueen);
  return (t.pawn[static_cast<int>(~by)][s] & pos.pieces(by, PieceType::kPawn)) |
         (t.knight[s] & pos.pieces(by, PieceType::kKnight)) |
         (t.king[s] & pos.pieces(by, PieceType::kKing)) |
         (rook_attacks(s, occ) & (pos.pieces(by, PieceType::kRook) | queens)) |
         (bishop_attacks(s, occ) & (pos.pieces(by, PieceType::kBishop) | queens));
}

}  // namespace

class MoveGenerator {
 public:
  static void generate(const Position& pos, MoveList& list);
  static bool en_passant_legal(const Position& pos, Square from);
};

bool Position::attacked(Square s, Color by) const {
  return attackers_to(*this, s, by, occupied()) != 0;
}

Square Position::king_square(Color c) const {
  Bitboard k = pieces(c, PieceType::kKing);
  return k ? lsb(k) : kNoSquare;
}

bool MoveGenerator::en_passant_legal(const Position& pos, Square from) {
  Color us = pos.side_;
  Square to = pos.ep_;
  Square victim = static_cast<Square>(us == Color::kWhite ? to - 8 : to + 8);
  Bitboard occ = (pos.occupied() ^ bit(from) ^ bit(victim)) | bit(to);
  Square ksq = pos.king_square(us);
  Color them = ~us;
  Bitboard queens = pos.pieces(them, PieceType::kQueen);
  if (rook_attacks(ksq, occ) & (pos.pieces(them, PieceType::kRook) | queens)) return false;
  if (bishop_attacks(ksq, occ) & (pos.pieces(them, PieceType::kBishop) | queens))
    return false;
  const auto& t = tables();
  Bitboard others = (t.knight[ksq] & pos.pieces(them, PieceType::kKnight)) |
                    (t.pawn[static_cast<int>(us)][ksq] &
                     pos.pieces(them, PieceType::kPawn) & ~bit(victim));
  return others == 0;
}

void MoveGenerator::generate(const Position& pos, MoveList& list) {
  const auto& t = tables();
  const Color us = pos.side_;
  const Color them = ~us;
  const Bitboard own = pos.pieces(us);
  const Bitboard enemy = pos.pieces(them);
  const Bitboard occ = own | enemy;
  const Square ksq = pos.king_square(us);

  const Bitboard checkers = attackers_to(pos, ksq, them, occ);

  Bitboard occ_without_king = occ ^ bit(ksq);
  Bitboard king_targets = t.king[ksq] & ~own;
  while (king_targets) {
    Square to = pop_lsb(king_targets);
    if (!attackers_to(pos, to, them, occ_without_king)) list.add(ksq, to);
  }
  if (std::popcount(checkers) > 1) return;

  Bitboard check_mask = ~Bitboard{0};
  if (checkers) check_mask = checkers | t.between[ksq][lsb(checkers)];

  Bitboard pinned = 0;
  {
    Bitboard queens = pos.pieces(them, PieceType::kQueen);
    Bitboard snipers =
        (rook_attacks(ksq, 0) & (pos.pieces(them, PieceType::kRook) | queens)) |
        (bishop_attacks(ksq, 0) & (pos.pieces(them, PieceType::kBishop) | queens));
    while (snipers) {
      Square s = pop_lsb(snipers);
      Bitboard b = t.between[ksq][s] & occ;
      if (b && !(b & (b - 1)) && (b & own)) pinned |= b;
    }
  }

  auto add_targets = [&](Square from, Bitboard targets) {
    targets &= ~own & check_mask;
    if (pinned & bit(from)) targets &= t.line[ksq][from];
    while (targets) list.add(from, pop_lsb(targets));
  };

  Bitboard knights = pos.pieces(us, PieceType::kKnight) & ~pinned;
  while (knights) {
    Square from = pop_lsb(knights);
    add_targets(from, t.knight[from]);
  }
  Bitboard queens = pos.pieces(us, PieceType::kQueen);
  Bitboard diag = pos.pieces(us, PieceType::kBishop) | queens;
  while (diag) {
    Square from = pop_lsb(diag);
    add_targets(from, bishop_attacks(from, occ));
  }
  Bitboard straight = pos.pieces(us, PieceType::kRook) | queens;
  while (straight) {
    Square from = pop_lsb(straight);
    add_targets(from, rook_attacks(from, occ));
  }

  const int forward = us == Color::kWhite ? 8 : -8;
  const int promo_rank = us == Color::kWhite ? 7 : 0;
  const int start_rank = us == Color::kWhite ? 1 : 6;
  auto add_pawn = [&](Square from, Square to) {
    if (rank_of(to) == promo_rank) {
      for (PieceType p : {PieceType::kQueen, PieceType::kRook, PieceType::kBishop,
                          PieceType::kKnight})
        list.add(from, to, p);
    } else {
      list.add(from, to);
    }
  };

  Bitboard pawns = pos.pieces(us, PieceType::kPawn);
  while (pawns) {
    Square from = pop_lsb(pawns);
    Bitboard allowed = check_mask;
    if (pinned & bit(from)) allowed &= t.line[ksq][from];

    Square one = static_cast<Square>(from + forward);
    if (!(occ & bit(one))) {
      if (allowed & bit(one)) add_pawn(from, one);
      if (rank_of(from) == start_rank) {
        Square two = static_cast<Square>(from + 2 * forward);
        if (!(occ & bit(two)) && (allowed & bit(two))) list.add(from, two);
      }
    }
    Bitboard caps = t.pawn[static_cast<int>(us)][from] & enemy & allowed;
    while (caps) add_pawn(from, pop_lsb(caps));

    if (pos.ep_ != kNoSquare && (t.pawn[static_cast<int>(us)][from] & bit(pos.ep_)) &&
        en_passant_legal(pos, from))
      list.add(from, pos.ep_);
  }

  if (!checkers) {
    const int back = us == Color::kWhite ? 0 : 7;
    const std::uint8_t ks = us == Color::kWhite ? kWhiteKingside : kBlackKingside;
    const std::uint8_t qs = us == Color::kWhite ? kWhiteQueenside : kBlackQueenside;
    auto safe = [&](int file) {
      return !attackers_to(pos, make_square(file, back), them, occ);
    };
    auto empty = [&](int file) { return !(occ & bit(make_square(file, back))); };
    if ((pos.castling_ & ks) && empty(5) && empty(6) && safe(5) && safe(6))
      list.add(ksq, make_square(6, back));
    if ((pos.castling_ & qs) && empty(1) && empty(2) && empty(3) && safe(3) && safe(2))
      list.add(ksq, make_square(2, back));
  }
}

std::vector<Move> legal_moves(const Position& pos) {
  MoveList list;
  MoveGenerator::generate(pos, list);
  return {list.moves.begin(), list.moves.begin() + list.size};
}

namespace {

std::uint64_t perft_bulk(const Position& pos, int depth) {
  MoveList list;
  MoveGenerator::generate(pos, list);
  if (depth == 1) return static_cast<std::uint64_t>(list.size);
  std::uint64_t nodes = 0;
  for (int i = 0; i < list.size; ++i)
    nodes += perft_bulk(apply_move_unchecked(pos, list.moves[i]), depth - 1);
  return nodes;
}

}  // namespace

std::uint64_t perft(const Position& pos, int depth) {
  if (depth <= 0) return 1;
  return perft_bulk(pos, depth);
}

std::uint64_t perft_by_apply(const Position& pos, int depth) {
  if (depth <= 0) return 1;
  std::uint64_t nodes = 0;
  for (Move m : legal_moves(pos)) nodes += perft_by_apply(apply_move(pos, m), depth - 1);
  return nodes;
}

}  // namespace lp::chess
