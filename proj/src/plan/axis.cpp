#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "latentplan/error.hpp"
#include "latentplan/planner.hpp"
#include "latentplan/tokenizer.hpp"

namespace lp::plan {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'A', 'X'};
constexpr std::uint32_t kAxisVersion = 1;

void append(std::vector<char>& buf, const void* p, std::size_t n) {
  const char* c = static_cast<const char*>(p);
  buf.insert(buf.end(), c, c + n);
}

}  // namespace

nn::Matrix<float> EncoderEmbedder::embed(std::span<const chess::Position> positions) const {
  std::vector<TokenSeq> tokens;
  tokens.reserve(positions.size());
  for (const auto& p : positions) tokens.push_back(tokenize(p));
  return nn::forward_batch<float>(weights_, tokens, nn::Mode::kEval, 0);
}

double AdvantageAxis::norm() const {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

AdvantageAxis axis_from_means(std::vector<double> mu_white, std::vector<double> mu_black,
                              std::uint64_t white_count, std::uint64_t black_count) {
  if (mu_white.size() != mu_black.size() || mu_white.empty())
    throw Error(ErrorCode::kShape, "axis: mean vectors must have the same nonzero length");
  AdvantageAxis axis;
  axis.a.resize(mu_white.size());
  for (std::size_t i = 0; i < mu_white.size(); ++i) axis.a[i] = mu_white[i] - mu_black[i];
  axis.mu_white = std::move(mu_white);
  axis.mu_black = std::move(mu_black);
  axis.white_count = white_count;
  axis.black_count = black_count;
  if (!(axis.norm() >= 1e-8))
    throw Error(ErrorCode::kDegenerate, "axis: mu_white and mu_black coincide (|a| < 1e-8)");
  return axis;
}

AdvantageAxis compute_axis(const PositionEmbedder& embedder, std::span<const chess::Position> whites,
                           std::span<const chess::Position> blacks) {
  if (whites.empty() || blacks.empty())
    throw Error(ErrorCode::kInvalidArgument, "axis: need at least one decisive position per side");
  auto mean = [&](std::span<const chess::Position> set) {
    std::vector<double> mu(embedder.dim(), 0.0);
    constexpr std::size_t kBatch = 256;
    for (std::size_t b0 = 0; b0 < set.size(); b0 += kBatch) {
      auto chunk = set.subspan(b0, std::min(kBatch, set.size() - b0));
      nn::Matrix<float> z = embedder.embed(chunk);
      for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (int c = 0; c < embedder.dim(); ++c) mu[c] += z(r, c);
    }
    for (double& v : mu) v /= static_cast<double>(set.size());
    return mu;
  };
  return axis_from_means(mean(whites), mean(blacks), whites.size(), blacks.size());
}

void save_axis(const std::string& path, const AdvantageAxis& axis) {
  std::vector<char> buf;
  append(buf, kMagic, 4);
  append(buf, &kAxisVersion, 4);
  std::uint32_t d = static_cast<std::uint32_t>(axis.dim());
  append(buf, &d, 4);
  append(buf, &axis.white_count, 8);
  append(buf, &axis.black_count, 8);
  for (const auto* v : {&axis.mu_white, &axis.mu_black, &axis.a}) {
    if (v->size() != d) throw Error(ErrorCode::kShape, "axis: inconsistent vector lengths");
    append(buf, v->data(), v->size() * sizeof(double));
  }
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
  append(buf, &crc, 4);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write axis file " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing axis file " + path);
}

AdvantageAxis load_axis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read axis file " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& why) -> AdvantageAxis {
    throw Error(ErrorCode::kIo, "axis file " + path + ": " + why);
  };
  constexpr std::size_t kHeader = 4 + 4 + 4 + 8 + 8;
  if (buf.size() < kHeader + 4) return fail("truncated");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) return fail("not an axis file");
  std::uint32_t version, d, stored;
  std::memcpy(&version, buf.data() + 4, 4);
  if (version != kAxisVersion) return fail("unsupported version " + std::to_string(version));
  std::memcpy(&d, buf.data() + 8, 4);
  if (buf.size() != kHeader + 3 * std::size_t{d} * 8 + 4) return fail("size does not match dimension");
  std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
  auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size() - 4)));
  if (crc != stored) return fail("checksum mismatch");
  AdvantageAxis axis;
  std::memcpy(&axis.white_count, buf.data() + 12, 8);
  std::memcpy(&axis.black_count, buf.data() + 20, 8);
  const char* p = buf.data() + kHeader;
  for (auto* v : {&axis.mu_white, &axis.mu_black, &axis.a}) {
    v->resize(d);
    std::memcpy(v->data(), p, std::size_t{d} * 8);
    p += std::size_t{d} * 8;
  }
  for (std::uint32_t i = 0; i < d; ++i)
    if (axis.a[i] != axis.mu_white[i] - axis.mu_black[i]) return fail("a != mu_white - mu_black");
  if (!(axis.norm() >= 1e-8)) return fail("degenerate axis");
  return axis;
}

double cosine(std::span<const float> z, const AdvantageAxis& axis) {
  if (static_cast<int>(z.size()) != axis.dim())
    throw Error(ErrorCode::kShape, "embedding dimension does not match axis");
  double dot = 0, zz = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    dot += z[i] * axis.a[i];
    zz += double(z[i]) * z[i];
  }
  if (zz == 0) return 0.0;
  return dot / (std::sqrt(zz) * axis.norm());
}

double score_position(const PositionEmbedder& embedder, const AdvantageAxis& axis,
                      const chess::Position& pos) {
  nn::Matrix<float> z = embedder.embed(std::span<const chess::Position>(&pos, 1));
  return cosine(std::span<const float>(z.data(), z.cols()), axis);
}

std::vector<ScoredMove> score_children(const PositionEmbedder& embedder, const AdvantageAxis& axis,
                                       const chess::Position& pos) {
  auto moves = chess::legal_moves(pos);
  std::vector<chess::Position> children;
  children.reserve(moves.size());
  for (auto m : moves) children.push_back(chess::apply_move_unchecked(pos, m));
  std::vector<ScoredMove> out;
  if (moves.empty()) return out;
  nn::Matrix<float> z = embedder.embed(children);
  for (std::size_t i = 0; i < moves.size(); ++i)
    out.push_back({moves[i], cosine(std::span<const float>(z.row(i).data(), z.cols()), axis)});
  return out;
}

}  // namespace lp::plan
