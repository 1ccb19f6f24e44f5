#include "latentplan/tokenizer.hpp"

#include <array>
#include <fstream>

#include "latentplan/error.hpp"

namespace lp {

namespace {

std::vector<std::string> build_vocabulary() {
  std::vector<std::string> v = {"<pad>", "."};
  for (char c : std::string_view("PNBRQKpnbrqkw-acdefgh0123456789")) v.emplace_back(1, c);
  return v;
}

// Single-character symbol -> id; 0xFF for characters outside the vocabulary.
const std::array<std::uint8_t, 256>& char_ids() {
  static const std::array<std::uint8_t, 256> table = [] {
    std::array<std::uint8_t, 256> t;
    t.fill(0xFF);
    const auto& v = vocabulary();
    for (std::size_t i = 1; i < v.size(); ++i)
      t[static_cast<unsigned char>(v[i][0])] = static_cast<std::uint8_t>(i);
    return t;
  }();
  return table;
}

std::uint8_t id_of(char c) { return char_ids()[static_cast<unsigned char>(c)]; }

[[noreturn]] void decode_error(const std::string& msg) {
  throw Error(ErrorCode::kParse, "token sequence: " + msg);
}

void put_clock(TokenSeq& seq, int offset, int value) {
  if (value < 0 || value > 999)
    throw Error(ErrorCode::kInvalidArgument, "clock value out of tokenizable range");
  std::string digits = std::to_string(value);
  for (int i = 0; i < 3; ++i)
    seq[offset + i] =
        i < static_cast<int>(digits.size()) ? id_of(digits[i]) : kPadToken;
}

}  // namespace

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = build_vocabulary();
  return v;
}

int vocab_size() { return static_cast<int>(vocabulary().size()); }

std::uint8_t token_id(std::string_view symbol) {
  const auto& v = vocabulary();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == symbol) return static_cast<std::uint8_t>(i);
  throw Error(ErrorCode::kInvalidArgument, "unknown token symbol '" + std::string(symbol) + "'");
}

TokenSeq tokenize(const chess::Position& pos) {
  using namespace chess;
  TokenSeq seq{};
  int i = 0;
  for (int rank = 7; rank >= 0; --rank)
    for (int file = 0; file < 8; ++file)
      seq[i++] = id_of(piece_to_char(pos.piece_at(make_square(file, rank))));

  seq[kSideOffset] = id_of(pos.side_to_move() == Color::kWhite ? 'w' : 'b');

  const char kCastle[4] = {'K', 'Q', 'k', 'q'};
  int c = kCastlingOffset;
  for (int bitpos = 0; bitpos < 4; ++bitpos)
    if (pos.castling() & (1 << bitpos)) seq[c++] = id_of(kCastle[bitpos]);
  while (c < kCastlingOffset + 4) seq[c++] = id_of('-');

  if (auto ep = pos.en_passant()) {
    std::string name = square_name(*ep);
    seq[kEnPassantOffset] = id_of(name[0]);
    seq[kEnPassantOffset + 1] = id_of(name[1]);
  } else {
    seq[kEnPassantOffset] = id_of('-');
    seq[kEnPassantOffset + 1] = kPadToken;
  }

  put_clock(seq, kHalfmoveOffset, pos.halfmove_clock());
  put_clock(seq, kFullmoveOffset, pos.fullmove_number());
  return seq;
}

chess::Position detokenize(std::span<const std::uint8_t> seq) {
  if (seq.size() != kSeqLen)
    decode_error("expected " + std::to_string(kSeqLen) + " tokens, got " +
                 std::to_string(seq.size()));
  const auto& vocab = vocabulary();
  auto sym = [&](int i) -> const std::string& {
    if (seq[i] >= vocab.size()) decode_error("token id out of range at " + std::to_string(i));
    return vocab[seq[i]];
  };

  std::string fen;
  for (int rank = 0; rank < 8; ++rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const std::string& s = sym(rank * 8 + file);
      if (s == ".") {
        ++empty;
        continue;
      }
      if (s.size() != 1 || std::string_view("PNBRQKpnbrqk").find(s[0]) == std::string_view::npos)
        decode_error("bad board token '" + s + "' at " + std::to_string(rank * 8 + file));
      if (empty) fen += static_cast<char>('0' + empty);
      empty = 0;
      fen += s;
    }
    if (empty) fen += static_cast<char>('0' + empty);
    if (rank < 7) fen += '/';
  }

  const std::string& side = sym(kSideOffset);
  if (side != "w" && side != "b") decode_error("bad side token '" + side + "'");
  fen += ' ' + side + ' ';

  std::string castling;
  bool padding = false;
  for (int i = kCastlingOffset; i < kCastlingOffset + 4; ++i) {
    const std::string& s = sym(i);
    if (s == "-") {
      padding = true;
    } else if (!padding && (s == "K" || s == "Q" || s == "k" || s == "q")) {
      castling += s;
    } else {
      decode_error("bad castling token '" + s + "'");
    }
  }
  fen += castling.empty() ? "-" : castling;

  const std::string& ep0 = sym(kEnPassantOffset);
  const std::string& ep1 = sym(kEnPassantOffset + 1);
  if (ep0 == "-") {
    if (seq[kEnPassantOffset + 1] != kPadToken) decode_error("en passant padding expected");
    fen += " -";
  } else {
    fen += ' ' + ep0 + ep1;
  }

  for (int offset : {kHalfmoveOffset, kFullmoveOffset}) {
    std::string digits;
    for (int i = offset; i < offset + 3; ++i) {
      if (seq[i] == kPadToken) {
        for (int j = i + 1; j < offset + 3; ++j)
          if (seq[j] != kPadToken) decode_error("digit after padding in clock field");
        break;
      }
      const std::string& s = sym(i);
      if (s.size() != 1 || s[0] < '0' || s[0] > '9') decode_error("bad clock token '" + s + "'");
      digits += s;
    }
    if (digits.empty() || (digits.size() > 1 && digits[0] == '0'))
      decode_error("non-canonical clock field");
    fen += ' ' + digits;
  }

  try {
    return chess::Position::from_fen(fen);
  } catch (const Error& e) {
    decode_error(std::string("invalid position: ") + e.what());
  }
}

std::string vocabulary_text() {
  std::string out;
  for (const auto& s : vocabulary()) out += s + '\n';
  return out;
}

void write_vocabulary(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << vocabulary_text();
}

}  // namespace lp
