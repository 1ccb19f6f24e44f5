#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "latentplan/chess.hpp"
#include "latentplan/error.hpp"
#include "tables.hpp"

namespace lp::chess {

namespace {

constexpr std::string_view kPieceChars = ".PNBRQKpnbrqk";

[[noreturn]] void fen_error(std::string_view field, const std::string& msg) {
  throw Error(ErrorCode::kParse,
              "fen: field '" + std::string(field) + "': " + msg);
}

std::vector<std::string_view> split_fields(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

int parse_clock(std::string_view field, std::string_view text, int lo, int hi) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fen_error(field, "not an integer: '" + std::string(text) + "'");
  if (value < lo || value > hi)
    fen_error(field, "out of range [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]: " + std::string(text));
  return value;
}

}  // namespace

char piece_to_char(Piece p) { return kPieceChars[static_cast<int>(p)]; }

std::string square_name(Square s) {
  return {static_cast<char>('a' + file_of(s)), static_cast<char>('1' + rank_of(s))};
}

std::string to_uci(Move m) {
  std::string s = square_name(m.from) + square_name(m.to);
  if (m.promotion != PieceType::kNone)
    s += static_cast<char>(std::tolower(piece_to_char(make_piece(Color::kWhite, m.promotion))));
  return s;
}

void Position::put(Square s, Piece p) {
  board_[s] = p;
  by_color_[static_cast<int>(color_of(p))] |= bit(s);
  by_type_[static_cast<int>(type_of(p))] |= bit(s);
}

void Position::clear(Square s) {
  Piece p = board_[s];
  if (p == Piece::kNone) return;
  by_color_[static_cast<int>(color_of(p))] &= ~bit(s);
  by_type_[static_cast<int>(type_of(p))] &= ~bit(s);
  board_[s] = Piece::kNone;
}

Position Position::start() {
  static const Position p =
      from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
  return p;
}

Position Position::from_fen_unchecked(std::string_view text) {
  Position pos;
  auto fields = split_fields(text);
  if (fields.size() != 6)
    fen_error("field count", "expected 6 fields, got " + std::to_string(fields.size()));

  int rank = 7, file = 0, rows = 1;
  for (char c : fields[0]) {
    if (c == '/') {
      if (file != 8)
        fen_error("placement", "rank " + std::to_string(rank + 1) + " does not have 8 files");
      --rank;
      file = 0;
      ++rows;
      if (rank < 0) fen_error("placement", "more than 8 ranks");
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) fen_error("placement", "rank overflows 8 files");
    } else {
      auto idx = kPieceChars.find(c);
      if (idx == std::string_view::npos || idx == 0)
        fen_error("placement", std::string("unknown piece '") + c + "'");
      if (file >= 8) fen_error("placement", "rank overflows 8 files");
      pos.put(make_square(file, rank), static_cast<Piece>(idx));
      ++file;
    }
  }
  if (rows != 8 || file != 8) fen_error("placement", "expected 8 ranks of 8 files");

  if (fields[1] == "w")
    pos.side_ = Color::kWhite;
  else if (fields[1] == "b")
    pos.side_ = Color::kBlack;
  else
    fen_error("side to move", "expected 'w' or 'b'");

  if (fields[2] != "-") {
    for (char c : fields[2]) {
      std::uint8_t r = c == 'K'   ? kWhiteKingside
                       : c == 'Q' ? kWhiteQueenside
                       : c == 'k' ? kBlackKingside
                       : c == 'q' ? kBlackQueenside
                                  : 0;
      if (!r || (pos.castling_ & r))
        fen_error("castling", "invalid castling field '" + std::string(fields[2]) + "'");
      pos.castling_ |= r;
    }
  }

  if (fields[3] != "-") {
    auto f = fields[3];
    if (f.size() != 2 || f[0] < 'a' || f[0] > 'h' || (f[1] != '3' && f[1] != '6'))
      fen_error("en passant", "invalid target '" + std::string(f) + "'");
    pos.ep_ = make_square(f[0] - 'a', f[1] - '1');
  }

  pos.halfmove_ = parse_clock("halfmove clock", fields[4], 0, 999);
  pos.fullmove_ = parse_clock("fullmove number", fields[5], 1, 999);
  return pos;
}

Position Position::from_fen(std::string_view fen) {
  Position pos = from_fen_unchecked(fen);

  for (Color c : {Color::kWhite, Color::kBlack}) {
    int kings = std::popcount(pos.pieces(c, PieceType::kKing));
    if (kings != 1)
      fen_error("placement", std::string(c == Color::kWhite ? "white" : "black") +
                                 " must have exactly one king, found " +
                                 std::to_string(kings));
  }
  constexpr Bitboard kBackRanks = 0xFF000000000000FFull;
  if (pos.pieces(PieceType::kPawn) & kBackRanks)
    fen_error("placement", "pawn on first or eighth rank");

  // Canonicalize castling: drop rights the placement cannot support.
  auto has = [&](int file, int rank, Piece p) {
    return pos.board_[make_square(file, rank)] == p;
  };
  const Piece wk = make_piece(Color::kWhite, PieceType::kKing);
  const Piece wr = make_piece(Color::kWhite, PieceType::kRook);
  const Piece bk = make_piece(Color::kBlack, PieceType::kKing);
  const Piece br = make_piece(Color::kBlack, PieceType::kRook);
  if (!has(4, 0, wk) || !has(7, 0, wr)) pos.castling_ &= ~kWhiteKingside;
  if (!has(4, 0, wk) || !has(0, 0, wr)) pos.castling_ &= ~kWhiteQueenside;
  if (!has(4, 7, bk) || !has(7, 7, br)) pos.castling_ &= ~kBlackKingside;
  if (!has(4, 7, bk) || !has(0, 7, br)) pos.castling_ &= ~kBlackQueenside;

  if (pos.ep_ != kNoSquare) {
    // Target must sit behind a pawn that just moved two squares.
    const bool white_to_move = pos.side_ == Color::kWhite;
    if (rank_of(pos.ep_) != (white_to_move ? 5 : 2))
      fen_error("en passant", "target rank inconsistent with side to move");
    Square pawn_sq = static_cast<Square>(white_to_move ? pos.ep_ - 8 : pos.ep_ + 8);
    Square origin = static_cast<Square>(white_to_move ? pos.ep_ + 8 : pos.ep_ - 8);
    Piece expected = make_piece(~pos.side_, PieceType::kPawn);
    if (pos.board_[pawn_sq] != expected || pos.board_[pos.ep_] != Piece::kNone ||
        pos.board_[origin] != Piece::kNone)
      fen_error("en passant", "no double pawn push behind target " + square_name(pos.ep_));
  }

  if (pos.attacked(pos.king_square(~pos.side_), pos.side_))
    fen_error("placement", "side not to move is in check");
  return pos;
}

std::string Position::fen() const {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      Piece p = board_[make_square(file, rank)];
      if (p == Piece::kNone) {
        ++empty;
        continue;
      }
      if (empty) out += static_cast<char>('0' + empty);
      empty = 0;
      out += piece_to_char(p);
    }
    if (empty) out += static_cast<char>('0' + empty);
    if (rank) out += '/';
  }
  out += side_ == Color::kWhite ? " w " : " b ";
  if (!castling_) out += '-';
  if (castling_ & kWhiteKingside) out += 'K';
  if (castling_ & kWhiteQueenside) out += 'Q';
  if (castling_ & kBlackKingside) out += 'k';
  if (castling_ & kBlackQueenside) out += 'q';
  out += ' ';
  out += ep_ == kNoSquare ? "-" : square_name(ep_);
  out += ' ' + std::to_string(halfmove_) + ' ' + std::to_string(fullmove_);
  return out;
}

bool Position::operator==(const Position& o) const {
  return board_ == o.board_ && side_ == o.side_ && castling_ == o.castling_ &&
         ep_ == o.ep_ && halfmove_ == o.halfmove_ && fullmove_ == o.fullmove_;
}

PositionKey Position::key() const {
  PositionKey k;
  k.board = board_;
  k.side = side_;
  k.castling = castling_;
  if (ep_ != kNoSquare) {
    for (Move m : legal_moves(*this)) {
      if (m.to == ep_ && type_of(board_[m.from]) == PieceType::kPawn) {
        k.en_passant = ep_;
        break;
      }
    }
  }
  return k;
}

Position apply_move_unchecked(const Position& pos, Move m) {
  const auto& t = detail::tables();
  Position next = pos;
  const Color us = pos.side_;
  const Piece moving = pos.board_[m.from];
  const PieceType type = type_of(moving);
  const bool capture = pos.board_[m.to] != Piece::kNone;

  next.ep_ = kNoSquare;
  next.clear(m.from);
  next.clear(m.to);

  if (type == PieceType::kPawn) {
    if (m.to == pos.ep_) {
      next.clear(static_cast<Square>(us == Color::kWhite ? m.to - 8 : m.to + 8));
    } else if (std::abs(int(m.to) - int(m.from)) == 16) {
      next.ep_ = static_cast<Square>((m.from + m.to) / 2);
    }
    next.put(m.to, m.promotion == PieceType::kNone ? moving : make_piece(us, m.promotion));
  } else {
    next.put(m.to, moving);
    if (type == PieceType::kKing && std::abs(int(m.to) - int(m.from)) == 2) {
      const int back = rank_of(m.from);
      const bool kingside = file_of(m.to) == 6;
      Square rook_from = make_square(kingside ? 7 : 0, back);
      Square rook_to = make_square(kingside ? 5 : 3, back);
      Piece rook = next.board_[rook_from];
      next.clear(rook_from);
      next.put(rook_to, rook);
    }
  }

  next.castling_ &= t.castling_mask[m.from] & t.castling_mask[m.to];
  next.halfmove_ = (type == PieceType::kPawn || capture) ? 0 : pos.halfmove_ + 1;
  if (us == Color::kBlack) ++next.fullmove_;
  next.side_ = ~us;
  return next;
}

Position apply_move(const Position& pos, Move m) {
  auto moves = legal_moves(pos);
  if (std::find(moves.begin(), moves.end(), m) == moves.end())
    throw Error(ErrorCode::kIllegalMove,
                "illegal move " + to_uci(m) + " in " + pos.fen());
  return apply_move_unchecked(pos, m);
}

std::optional<Move> parse_uci(const Position& pos, std::string_view text) {
  if (text.size() != 4 && text.size() != 5) return std::nullopt;
  auto sq = [](char f, char r) -> std::optional<Square> {
    if (f < 'a' || f > 'h' || r < '1' || r > '8') return std::nullopt;
    return make_square(f - 'a', r - '1');
  };
  auto from = sq(text[0], text[1]);
  auto to = sq(text[2], text[3]);
  if (!from || !to) return std::nullopt;
  PieceType promo = PieceType::kNone;
  if (text.size() == 5) {
    switch (text[4]) {
      case 'q': promo = PieceType::kQueen; break;
      case 'r': promo = PieceType::kRook; break;
      case 'b': promo = PieceType::kBishop; break;
      case 'n': promo = PieceType::kKnight; break;
      default: return std::nullopt;
    }
  }
  Move m{*from, *to, promo};
  for (Move legal : legal_moves(pos))
    if (legal == m) return m;
  return std::nullopt;
}

bool is_capture(const Position& pos, Move m) {
  if (pos.piece_at(m.to) != Piece::kNone) return true;
  return type_of(pos.piece_at(m.from)) == PieceType::kPawn && pos.en_passant() &&
         m.to == *pos.en_passant();
}

std::string to_san(const Position& pos, Move m) {
  const Piece moving = pos.piece_at(m.from);
  const PieceType type = type_of(moving);
  std::string san;
  if (type == PieceType::kKing && std::abs(int(m.to) - int(m.from)) == 2) {
    san = file_of(m.to) == 6 ? "O-O" : "O-O-O";
  } else if (type == PieceType::kPawn) {
    if (is_capture(pos, m)) {
      san += static_cast<char>('a' + file_of(m.from));
      san += 'x';
    }
    san += square_name(m.to);
    if (m.promotion != PieceType::kNone) {
      san += '=';
      san += piece_to_char(make_piece(Color::kWhite, m.promotion));
    }
  } else {
    san += piece_to_char(make_piece(Color::kWhite, type));
    bool ambiguous = false, same_file = false, same_rank = false;
    for (Move other : legal_moves(pos)) {
      if (other.to != m.to || other.from == m.from ||
          type_of(pos.piece_at(other.from)) != type)
        continue;
      ambiguous = true;
      same_file |= file_of(other.from) == file_of(m.from);
      same_rank |= rank_of(other.from) == rank_of(m.from);
    }
    if (ambiguous) {
      if (!same_file)
        san += static_cast<char>('a' + file_of(m.from));
      else if (!same_rank)
        san += static_cast<char>('1' + rank_of(m.from));
      else
        san += square_name(m.from);
    }
    if (is_capture(pos, m)) san += 'x';
    san += square_name(m.to);
  }
  Position next = apply_move_unchecked(pos, m);
  if (next.in_check()) san += legal_moves(next).empty() ? '#' : '+';
  return san;
}

Position mirror(const Position& pos) {
  Position out;
  for (int s = 0; s < 64; ++s) {
    Piece p = pos.board_[s];
    if (p != Piece::kNone)
      out.put(static_cast<Square>(s ^ 56), make_piece(~color_of(p), type_of(p)));
  }
  out.side_ = ~pos.side_;
  out.castling_ = static_cast<std::uint8_t>(((pos.castling_ & 3) << 2) |
                                            ((pos.castling_ >> 2) & 3));
  out.ep_ = pos.ep_ == kNoSquare ? kNoSquare : static_cast<Square>(pos.ep_ ^ 56);
  out.halfmove_ = pos.halfmove_;
  out.fullmove_ = pos.fullmove_;
  return out;
}

Move mirror(Move m) {
  return Move{static_cast<Square>(m.from ^ 56), static_cast<Square>(m.to ^ 56),
              m.promotion};
}

std::string to_string(GameStatusKind kind) {
  switch (kind) {
    case GameStatusKind::kOngoing: return "ongoing";
    case GameStatusKind::kCheckmate: return "checkmate";
    case GameStatusKind::kStalemate: return "stalemate";
    case GameStatusKind::kDrawByFiftyMove: return "fifty-move";
    case GameStatusKind::kDrawByRepetition: return "repetition";
    case GameStatusKind::kDrawByInsufficientMaterial: return "insufficient-material";
  }
  return "unknown";
}

bool insufficient_material(const Position& pos) {
  if (pos.pieces(PieceType::kPawn) | pos.pieces(PieceType::kRook) |
      pos.pieces(PieceType::kQueen))
    return false;
  Bitboard knights = pos.pieces(PieceType::kKnight);
  Bitboard bishops = pos.pieces(PieceType::kBishop);
  if (std::popcount(knights | bishops) <= 1) return true;
  if (knights) return false;
  constexpr Bitboard kDarkSquares = 0xAA55AA55AA55AA55ull;
  return (bishops & kDarkSquares) == 0 || (bishops & ~kDarkSquares) == 0;
}

GameStatus status(const Position& pos, std::span<const Position> history) {
  if (legal_moves(pos).empty()) {
    if (pos.in_check()) return {GameStatusKind::kCheckmate, ~pos.side_to_move()};
    return {GameStatusKind::kStalemate};
  }
  if (insufficient_material(pos)) return {GameStatusKind::kDrawByInsufficientMaterial};
  if (pos.halfmove_clock() >= 100) return {GameStatusKind::kDrawByFiftyMove};

  // Only positions since the last irreversible move can repeat.
  const PositionKey key = pos.key();
  int seen = 1;
  const std::size_t window = std::min<std::size_t>(history.size(),
                                                   static_cast<std::size_t>(pos.halfmove_clock()));
  for (std::size_t i = history.size() - window; i < history.size(); ++i) {
    const Position& h = history[i];
    if (h.side_to_move() != pos.side_to_move()) continue;
    if (h.key() == key && ++seen >= 3) return {GameStatusKind::kDrawByRepetition};
  }
  return {};
}

}  // namespace lp::chess
