#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lp::chess {

using Bitboard = std::uint64_t;
using Square = std::uint8_t;  // a1 = 0, h1 = 7, a8 = 56

inline constexpr Square kNoSquare = 64;

enum class Color : std::uint8_t { kWhite = 0, kBlack = 1 };

constexpr Color operator~(Color c) {
  return c == Color::kWhite ? Color::kBlack : Color::kWhite;
}

enum class PieceType : std::uint8_t {
  kPawn = 0,
  kKnight,
  kBishop,
  kRook,
  kQueen,
  kKing,
  kNone,
};

// 0 is empty, 1..6 white P..K, 7..12 black p..k.
enum class Piece : std::uint8_t { kNone = 0 };

constexpr Piece make_piece(Color c, PieceType t) {
  return static_cast<Piece>(1 + static_cast<int>(t) + 6 * static_cast<int>(c));
}
constexpr PieceType type_of(Piece p) {
  return p == Piece::kNone
             ? PieceType::kNone
             : static_cast<PieceType>((static_cast<int>(p) - 1) % 6);
}
constexpr Color color_of(Piece p) {
  return static_cast<int>(p) > 6 ? Color::kBlack : Color::kWhite;
}

constexpr int file_of(Square s) { return s & 7; }
constexpr int rank_of(Square s) { return s >> 3; }
constexpr Square make_square(int file, int rank) {
  return static_cast<Square>(rank * 8 + file);
}
constexpr Bitboard bit(Square s) { return Bitboard{1} << s; }

char piece_to_char(Piece p);
std::string square_name(Square s);

enum CastlingRight : std::uint8_t {
  kWhiteKingside = 1,
  kWhiteQueenside = 2,
  kBlackKingside = 4,
  kBlackQueenside = 8,
};

struct Move {
  Square from = 0;
  Square to = 0;
  PieceType promotion = PieceType::kNone;

  bool operator==(const Move&) const = default;
};

// Coordinate notation, e.g. "e2e4", "e7e8q".
std::string to_uci(Move m);

// Identity of a position for repetition purposes: placement, side, castling
// rights, and the en-passant square only when an en-passant capture is legal.
struct PositionKey {
  std::array<Piece, 64> board{};
  Color side = Color::kWhite;
  std::uint8_t castling = 0;
  Square en_passant = kNoSquare;

  bool operator==(const PositionKey&) const = default;
};

class Position {
 public:
  // Standard initial position.
  static Position start();

  // Parses a six-field FEN. Throws lp::Error(kParse) naming the offending
  // field. Castling letters are reordered to KQkq and rights that the
  // placement cannot support are dropped.
  static Position from_fen(std::string_view fen);

  // Builds from FEN without the king-count/check/pawn-rank validation; used
  // by the tokenizer tests that deliberately relax invariants.
  static Position from_fen_unchecked(std::string_view fen);

  std::string fen() const;

  Piece piece_at(Square s) const { return board_[s]; }
  Color side_to_move() const { return side_; }
  std::uint8_t castling() const { return castling_; }
  std::optional<Square> en_passant() const {
    if (ep_ == kNoSquare) return std::nullopt;
    return ep_;
  }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }

  Bitboard pieces(Color c) const { return by_color_[static_cast<int>(c)]; }
  Bitboard pieces(PieceType t) const { return by_type_[static_cast<int>(t)]; }
  Bitboard pieces(Color c, PieceType t) const { return pieces(c) & pieces(t); }
  Bitboard occupied() const { return by_color_[0] | by_color_[1]; }
  Square king_square(Color c) const;

  // True when `by` attacks square s under the current occupancy.
  bool attacked(Square s, Color by) const;
  bool in_check() const { return attacked(king_square(side_), ~side_); }

  PositionKey key() const;

  bool operator==(const Position& other) const;

 private:
  friend Position apply_move_unchecked(const Position&, Move);
  friend Position mirror(const Position&);
  friend class MoveGenerator;

  void put(Square s, Piece p);
  void clear(Square s);

  std::array<Piece, 64> board_{};
  std::array<Bitboard, 2> by_color_{};
  std::array<Bitboard, 6> by_type_{};
  Color side_ = Color::kWhite;
  std::uint8_t castling_ = 0;
  Square ep_ = kNoSquare;
  int halfmove_ = 0;
  int fullmove_ = 1;
};

// Fully legal moves in generation order (not sorted).
std::vector<Move> legal_moves(const Position& pos);

// Applies a legal move. Throws lp::Error(kIllegalMove) otherwise; the input
// position is never modified.
Position apply_move(const Position& pos, Move m);

// Same as apply_move without the legality check. m must be legal.
Position apply_move_unchecked(const Position& pos, Move m);

// Finds the legal move matching coordinate notation; nullopt when the text is
// malformed or the move is not legal.
std::optional<Move> parse_uci(const Position& pos, std::string_view text);

// Standard algebraic notation, with check/mate suffix.
std::string to_san(const Position& pos, Move m);

bool is_capture(const Position& pos, Move m);

// Colour-flipped position: ranks reversed, colours swapped.
Position mirror(const Position& pos);
Move mirror(Move m);

enum class GameStatusKind {
  kOngoing,
  kCheckmate,
  kStalemate,
  kDrawByFiftyMove,
  kDrawByRepetition,
  kDrawByInsufficientMaterial,
};

struct GameStatus {
  GameStatusKind kind = GameStatusKind::kOngoing;
  Color winner = Color::kWhite;  // meaningful for kCheckmate only

  bool terminal() const { return kind != GameStatusKind::kOngoing; }
  bool operator==(const GameStatus&) const = default;
};

std::string to_string(GameStatusKind kind);

// history holds the earlier positions of the game, oldest first, excluding
// pos itself.
GameStatus status(const Position& pos, std::span<const Position> history);

bool insufficient_material(const Position& pos);

// Leaf count with bulk counting at the last ply.
std::uint64_t perft(const Position& pos, int depth);

// Leaf count by explicit apply_move at every ply; slow, used as cross-check.
std::uint64_t perft_by_apply(const Position& pos, int depth);

}  // namespace lp::chess
