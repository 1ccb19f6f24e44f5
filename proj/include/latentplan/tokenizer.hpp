#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latentplan/chess.hpp"

namespace lp {

inline constexpr int kSeqLen = 77;

// Layout: 64 board squares (a8..h8, a7..h1), side, 4 castling, 2 en passant,
// 3 halfmove digits, 3 fullmove digits.
inline constexpr int kSideOffset = 64;
inline constexpr int kCastlingOffset = 65;
inline constexpr int kEnPassantOffset = 69;
inline constexpr int kHalfmoveOffset = 71;
inline constexpr int kFullmoveOffset = 74;

using TokenSeq = std::array<std::uint8_t, kSeqLen>;

// Fixed character-level vocabulary; id = index.
const std::vector<std::string>& vocabulary();
int vocab_size();
std::uint8_t token_id(std::string_view symbol);
inline constexpr std::uint8_t kPadToken = 0;

// Full run-length expansion of the FEN fields. Works on positions built with
// Position::from_fen_unchecked too. Clock values must be <= 999.
TokenSeq tokenize(const chess::Position& pos);

// Inverse of tokenize. Throws lp::Error(kParse) on a malformed sequence or one
// that does not describe a valid position.
chess::Position detokenize(std::span<const std::uint8_t> seq);

// One symbol per line, line number = id.
void write_vocabulary(const std::string& path);
std::string vocabulary_text();

}  // namespace lp
