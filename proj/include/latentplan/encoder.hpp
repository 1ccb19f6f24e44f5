#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latentplan/tokenizer.hpp"

namespace lp::nn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using ColVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using MatrixMap = Eigen::Map<Matrix<S>>;
template <typename S>
using ConstMatrixMap = Eigen::Map<const Matrix<S>>;

struct EncoderConfig {
  int num_layers = 2;
  int hidden_dim = 128;
  int embed_dim = 128;
  int num_heads = 4;
  int mlp_size = 128;
  double dropout_rate = 0.1;
  int vocab_size = 33;
  int seq_len = kSeqLen;

  static EncoderConfig tiny();
  static EncoderConfig small();
  static EncoderConfig base();

  // Throws lp::Error(kConfig) when a field is out of range.
  void validate() const;

  // key=value lines, stable key order.
  std::string to_text() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static EncoderConfig from_text(std::string_view text);

  bool operator==(const EncoderConfig&) const = default;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Names, shapes and offsets of every trainable tensor inside one flat array.
class ParameterLayout {
 public:
  explicit ParameterLayout(const EncoderConfig& config);

  struct Layer {
    int ln1_gamma, ln1_beta;
    int qkv_weight, qkv_bias;
    int out_weight, out_bias;
    int ln2_gamma, ln2_beta;
    int fc1_weight, fc1_bias;
    int fc2_weight, fc2_bias;
  };

  int token_embedding = 0;
  int cls = 0;
  int position = 0;
  std::vector<Layer> layers;
  int final_gamma = 0;
  int final_beta = 0;
  int projection = 0;
  int projection_bias = 0;

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  // Storage length including alignment padding between tensors.
  std::size_t size() const { return size_; }
  std::size_t parameter_count() const { return count_; }

  static constexpr std::size_t kTensorAlign = 16;  // elements

 private:
  int add(std::string name, int rows, int cols);

  std::vector<TensorInfo> tensors_;
  std::size_t size_ = 0;
  std::size_t count_ = 0;
};

std::size_t parameter_count(const EncoderConfig& config);

// Flat parameter (or gradient) storage with named matrix views. Padding slots
// between tensors stay zero.
template <typename S>
class Parameters {
 public:
  explicit Parameters(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  const ParameterLayout& layout() const { return *layout_; }
  std::size_t size() const { return values_.size(); }

  std::span<S> values() { return values_; }
  std::span<const S> values() const { return values_; }

  MatrixMap<S> tensor(int id) {
    const auto& t = layout_->tensors()[id];
    return MatrixMap<S>(values_.data() + t.offset, t.rows, t.cols);
  }
  ConstMatrixMap<S> tensor(int id) const {
    const auto& t = layout_->tensors()[id];
    return ConstMatrixMap<S>(values_.data() + t.offset, t.rows, t.cols);
  }

  template <typename T>
  Parameters<T> cast() const {
    Parameters<T> out(config_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values()[i] = static_cast<T>(values_[i]);
    return out;
  }

  bool all_finite() const;
  void set_zero() { std::fill(values_.begin(), values_.end(), S(0)); }

 private:
  EncoderConfig config_;
  std::shared_ptr<const ParameterLayout> layout_;
  std::vector<S, Eigen::aligned_allocator<S>> values_;
};

using ModelWeights = Parameters<float>;

// Truncated normal (std 0.02) for embeddings, CLS, positions and the output
// projection; Xavier-uniform attention; fan-in uniform MLP; zero biases; unit
// layer-norm gains.
template <typename S>
Parameters<S> init_parameters(const EncoderConfig& config, std::uint64_t seed);

enum class Mode { kTrain, kEval };

// Activations recorded by a forward pass for use by backward().
template <typename S>
struct ForwardTape {
  struct Layer {
    Matrix<S> xhat1, u, qkv, probs, cat, attn_mask;
    ColVector<S> rstd1;
    Matrix<S> xhat2, v, h1, g, mlp_mask;
    ColVector<S> rstd2;
  };
  int batch = 0;
  std::vector<TokenSeq> tokens;
  Matrix<S> input_mask;
  std::vector<Layer> layers;
  Matrix<S> final_xhat, final_out;
  ColVector<S> final_rstd;
  ColVector<S> norms;
  Matrix<S> z;
};

// Rows of the result are unit-norm embeddings, one per sequence. Dropout is
// active only in kTrain mode and is driven by `seed`. Throws
// lp::Error(kNumerical) naming the layer when activations become non-finite.
template <typename S>
Matrix<S> forward_batch(const Parameters<S>& weights, std::span<const TokenSeq> seqs,
                        Mode mode, std::uint64_t seed, ForwardTape<S>* tape = nullptr);

template <typename S>
RowVector<S> forward(const Parameters<S>& weights, const TokenSeq& seq, Mode mode,
                     std::uint64_t seed);

// Gradients of sum(dz .* z) with respect to every parameter. dz must be
// batch x embed_dim; throws lp::Error(kShape) otherwise.
template <typename S>
Parameters<S> backward(const Parameters<S>& weights, const ForwardTape<S>& tape,
                       const Matrix<S>& dz);

// Self-describing binary container: magic, format version, config text,
// vocabulary text, named float32 tensors, CRC-32 trailer.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::string& path, const ModelWeights& weights);
ModelWeights load_checkpoint(const std::string& path);

}  // namespace lp::nn
