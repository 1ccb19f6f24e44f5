#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "latentplan/chess.hpp"
#include "latentplan/tokenizer.hpp"

namespace lp::data {

struct AnnotatedPosition {
  chess::Position position;
  TokenSeq tokens{};
  double p_white = 0.5;  // White-perspective win probability
};

// How the probability column of an input file is oriented.
enum class ProbabilityFrame { kMover, kWhite };

struct IngestOptions {
  ProbabilityFrame frame = ProbabilityFrame::kMover;
  bool shuffle = true;
  std::uint64_t seed = 0;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;  // first few skip reasons, with line numbers
};

using Dataset = std::vector<AnnotatedPosition>;

// Rows are "FEN<TAB>probability". Blank lines and lines starting with '#'
// are ignored; unparsable rows and probabilities outside [0, 1] are skipped
// and counted. Throws lp::Error(kIo) if the file cannot be read.
Dataset ingest(const std::string& path, const IngestOptions& options, IngestReport* report = nullptr);
Dataset ingest(std::istream& in, const IngestOptions& options, IngestReport* report = nullptr);

// Writes rows in the same format, White-relative.
void write_dataset(const std::string& path, const Dataset& ds);

// Deterministic split: first (1 - fraction) rows are returned in `train`.
void split(const Dataset& ds, double holdout_fraction, Dataset& train, Dataset& holdout);

// The pairing rule used everywhere: |p_i - p_j| < delta.
inline bool is_positive_pair(double pi, double pj, double delta) {
  return (pi > pj ? pi - pj : pj - pi) < delta;
}

// Exact delta-neighbour sets, built by sorting on p_white. Neighbours of i are
// a contiguous run of the sorted order with i itself removed.
class PositiveIndex {
 public:
  PositiveIndex() = default;
  PositiveIndex(const std::vector<double>& p_white, double delta);

  double delta() const { return delta_; }
  std::size_t size() const { return rank_.size(); }
  std::size_t count(std::size_t i) const { return hi_[i] - lo_[i] - 1; }
  // k-th neighbour of i, k < count(i).
  std::size_t neighbour(std::size_t i, std::size_t k) const;
  std::vector<std::size_t> neighbours(std::size_t i) const;

  // Indices with at least `min_positives` neighbours.
  const std::vector<std::size_t>& anchors() const { return anchors_; }
  std::size_t min_positives() const { return min_positives_; }
  void set_min_positives(std::size_t n);

 private:
  double delta_ = 0;
  std::vector<std::size_t> order_;  // dataset indices sorted by p
  std::vector<std::size_t> rank_;   // position of each index in order_
  std::vector<std::size_t> lo_, hi_;
  std::vector<std::size_t> anchors_;
  std::size_t min_positives_ = 5;
};

PositiveIndex build_positive_index(const Dataset& ds, double delta);

struct BatchShape {
  int groups = 21;
  int positives_per_anchor = 5;
  int fill = 2;

  int size() const { return groups * (1 + positives_per_anchor) + fill; }
};

struct TrainBatch {
  std::vector<std::size_t> indices;
  std::vector<double> p_white;
  std::vector<std::uint8_t> mask;  // size x size, row-major; 1 = positive pair

  std::size_t size() const { return indices.size(); }
  bool positive(std::size_t i, std::size_t j) const { return mask[i * indices.size() + j] != 0; }
};

// Mask over the whole batch by the delta rule; diagonal is always 0.
std::vector<std::uint8_t> positive_mask(const std::vector<double>& p_white, double delta);

// Groups of one anchor plus distinct sampled positives, then uniformly drawn
// fill rows. Anchors lacking enough positives are redrawn. Throws
// lp::Error(kDegenerate) if the index has no eligible anchor.
TrainBatch sample_batch(const Dataset& ds, const PositiveIndex& index, std::mt19937_64& rng,
                        const BatchShape& shape = {});

}  // namespace lp::data
