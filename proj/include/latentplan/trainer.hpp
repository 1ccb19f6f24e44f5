#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latentplan/dataset.hpp"
#include "latentplan/encoder.hpp"

namespace lp::train {

struct TrainConfig {
  double delta = 0.05;
  double tau = 0.07;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int steps = 20000;
  int checkpoint_every = 0;  // 0 = final checkpoint only
  std::uint64_t seed = 0;
  data::BatchShape batch;
  std::string checkpoint_dir;  // empty = no checkpoint files
  std::string loss_log;        // empty = no log file

  void validate() const;
};

struct LossReport {
  double loss = 0;
  int anchors = 0;  // anchors with at least one positive
  double mean_positive_similarity = 0;
  double mean_negative_similarity = 0;
};

// Mean over anchors with a non-empty positive set of
//   -1/|P(i)| sum_{p in P(i)} log softmax_{a != i}(z_i . z_a / tau)[p].
// mask is n x n row-major (1 = positive). When grad is non-null it receives
// dLoss/dz (n x d), treating the similarity as a plain dot product.
LossReport supcon_loss(const nn::Matrix<double>& z, std::span<const std::uint8_t> mask, double tau,
                       nn::Matrix<double>* grad = nullptr);

template <typename S>
struct SgdState {
  std::vector<S> velocity;
};

// v <- m v + g; w <- w - lr v. Rejects non-finite gradients with
// lp::Error(kNumerical) before touching any state.
template <typename S>
void sgd_step(std::span<S> weights, std::span<const S> grads, SgdState<S>& state, double lr,
              double momentum);

struct StepRecord {
  int step = 0;
  LossReport report;
};

struct TrainResult {
  nn::ModelWeights weights;
  std::vector<StepRecord> log;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Single-threaded and bitwise reproducible for a given seed. Numerical
// failures are rethrown with the step index attached.
TrainResult train(const data::Dataset& dataset, const nn::EncoderConfig& encoder,
                  const TrainConfig& config, const StepCallback& on_step = {});

// Mean cosine of delta-positive and of non-positive pairs over random pairs
// drawn from ds (eval mode).
struct PairScan {
  double positive_mean = 0;
  double negative_mean = 0;
  std::size_t positive_pairs = 0;
  std::size_t negative_pairs = 0;
};
PairScan scan_pairs(const nn::ModelWeights& weights, const data::Dataset& ds, double delta,
                    std::size_t pairs, std::uint64_t seed);

// Eval-mode embeddings of every row, batched.
nn::Matrix<float> embed_dataset(const nn::ModelWeights& weights, const data::Dataset& ds);

}  // namespace lp::train
