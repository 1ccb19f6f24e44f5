#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latentplan/chess.hpp"
#include "latentplan/encoder.hpp"

namespace lp::plan {

// Anything that maps positions to D-dimensional vectors.
class PositionEmbedder {
 public:
  virtual ~PositionEmbedder() = default;
  virtual int dim() const = 0;
  // One row per position, computed as a single batch.
  virtual nn::Matrix<float> embed(std::span<const chess::Position> positions) const = 0;
};

// Eval-mode transformer embeddings.
class EncoderEmbedder final : public PositionEmbedder {
 public:
  explicit EncoderEmbedder(const nn::ModelWeights& weights) : weights_(weights) {}
  int dim() const override { return weights_.config().embed_dim; }
  nn::Matrix<float> embed(std::span<const chess::Position> positions) const override;

 private:
  const nn::ModelWeights& weights_;
};

struct AdvantageAxis {
  std::vector<double> mu_white;
  std::vector<double> mu_black;
  std::vector<double> a;  // mu_white - mu_black
  std::uint64_t white_count = 0;
  std::uint64_t black_count = 0;

  int dim() const { return static_cast<int>(a.size()); }
  double norm() const;
};

// Means of the embeddings of each set. Throws lp::Error(kInvalidArgument) for
// an empty set and lp::Error(kDegenerate) when |a| < 1e-8.
AdvantageAxis compute_axis(const PositionEmbedder& embedder, std::span<const chess::Position> whites,
                           std::span<const chess::Position> blacks);
AdvantageAxis axis_from_means(std::vector<double> mu_white, std::vector<double> mu_black,
                              std::uint64_t white_count = 1, std::uint64_t black_count = 1);

// Binary container: magic, version, D, counts, mu_white, mu_black, a (float64),
// CRC-32 trailer.
void save_axis(const std::string& path, const AdvantageAxis& axis);
AdvantageAxis load_axis(const std::string& path);

double cosine(std::span<const float> z, const AdvantageAxis& axis);
double score_position(const PositionEmbedder& embedder, const AdvantageAxis& axis,
                      const chess::Position& pos);

struct ScoredMove {
  chess::Move move;
  double score = 0;
};

// Raw cos(z, a) of every child, embedded as one batch, in legal-move order.
std::vector<ScoredMove> score_children(const PositionEmbedder& embedder, const AdvantageAxis& axis,
                                       const chess::Position& pos);

struct PlanConfig {
  int beam_width = 3;  // k
  int depth = 2;       // S, plies
  bool adversarial_mode = true;
  bool paper_literal_mode = false;

  // Literal mode keeps the engine's top k at every ply; it is also used
  // whenever adversarial_mode is off.
  bool literal() const { return paper_literal_mode || !adversarial_mode; }
  void validate() const;
};

struct SearchResult {
  chess::Move best;
  double utility = 0;        // engine perspective, in [-1, 1]
  int completed_depth = 0;   // deepest finished level
  std::vector<chess::Move> line;
  std::size_t embedded = 0;  // positions sent to the embedder
};

// Level-by-level beam search toward +a (White) or -a (Black). Terminal
// children score +1 (engine mates), -1 (engine is mated) or 0 (draw, using
// `history` plus the searched line for repetitions) and are carried forward
// unchanged. A mate at the first ply is returned immediately. Ties break by
// the coordinate-notation line, lexicographically. If `stop` becomes true the
// best line of the deepest completed level is returned (level 1 always
// completes). Throws lp::Error(kInvalidArgument) when the root has no legal
// moves.
SearchResult search(const PositionEmbedder& embedder, const AdvantageAxis& axis,
                    const chess::Position& root, std::span<const chess::Position> history,
                    const PlanConfig& config, const std::atomic<bool>* stop = nullptr);

chess::Move select_move(const PositionEmbedder& embedder, const AdvantageAxis& axis,
                        const chess::Position& root, const PlanConfig& config,
                        std::span<const chess::Position> history = {});

}  // namespace lp::plan
