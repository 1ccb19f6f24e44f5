#include "latentplan/encoder.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <unsupported/Eigen/SpecialFunctions>

#include "latentplan/error.hpp"

namespace lp::nn {

EncoderConfig EncoderConfig::tiny() { return {2, 128, 128, 4, 128, 0.1, lp::vocab_size(), kSeqLen}; }
EncoderConfig EncoderConfig::small() {
  return {6, 512, 512, 16, 512, 0.1, lp::vocab_size(), kSeqLen};
}
EncoderConfig EncoderConfig::base() {
  return {6, 1024, 1024, 16, 1024, 0.1, lp::vocab_size(), kSeqLen};
}

void EncoderConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, "encoder config: " + msg); };
  if (num_layers < 1 || hidden_dim < 1 || embed_dim < 1 || num_heads < 1 || mlp_size < 1 ||
      vocab_size < 1 || seq_len < 1)
    fail("all dimensions must be >= 1");
  if (hidden_dim % num_heads != 0) fail("hidden_dim must be divisible by num_heads");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (seq_len != kSeqLen) fail("seq_len must be " + std::to_string(kSeqLen));
}

std::string EncoderConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "num_layers=" << num_layers << '\n'
      << "hidden_dim=" << hidden_dim << '\n'
      << "embed_dim=" << embed_dim << '\n'
      << "num_heads=" << num_heads << '\n'
      << "mlp_size=" << mlp_size << '\n'
      << "dropout_rate=" << dropout_rate << '\n'
      << "vocab_size=" << vocab_size << '\n'
      << "seq_len=" << seq_len << '\n';
  return out.str();
}

EncoderConfig EncoderConfig::from_text(std::string_view text) {
  EncoderConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::kConfig, "encoder config: expected key=value, got '" + line + "'");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "num_layers") cfg.num_layers = std::stoi(value);
      else if (key == "hidden_dim") cfg.hidden_dim = std::stoi(value);
      else if (key == "embed_dim") cfg.embed_dim = std::stoi(value);
      else if (key == "num_heads") cfg.num_heads = std::stoi(value);
      else if (key == "mlp_size") cfg.mlp_size = std::stoi(value);
      else if (key == "dropout_rate") cfg.dropout_rate = std::stod(value);
      else if (key == "vocab_size") cfg.vocab_size = std::stoi(value);
      else if (key == "seq_len") cfg.seq_len = std::stoi(value);
      else throw Error(ErrorCode::kConfig, "encoder config: unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kConfig, "encoder config: bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ParameterLayout::ParameterLayout(const EncoderConfig& c) {
  c.validate();
  const int h = c.hidden_dim;
  token_embedding = add("token_embedding", c.vocab_size, h);
  cls = add("cls", 1, h);
  position = add("position", c.seq_len + 1, h);
  for (int l = 0; l < c.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    Layer layer;
    layer.ln1_gamma = add(p + "ln1.gamma", 1, h);
    layer.ln1_beta = add(p + "ln1.beta", 1, h);
    layer.qkv_weight = add(p + "attn.qkv.weight", h, 3 * h);
    layer.qkv_bias = add(p + "attn.qkv.bias", 1, 3 * h);
    layer.out_weight = add(p + "attn.out.weight", h, h);
    layer.out_bias = add(p + "attn.out.bias", 1, h);
    layer.ln2_gamma = add(p + "ln2.gamma", 1, h);
    layer.ln2_beta = add(p + "ln2.beta", 1, h);
    layer.fc1_weight = add(p + "mlp.fc1.weight", h, c.mlp_size);
    layer.fc1_bias = add(p + "mlp.fc1.bias", 1, c.mlp_size);
    layer.fc2_weight = add(p + "mlp.fc2.weight", c.mlp_size, h);
    layer.fc2_bias = add(p + "mlp.fc2.bias", 1, h);
    layers.push_back(layer);
  }
  final_gamma = add("final_ln.gamma", 1, h);
  final_beta = add("final_ln.beta", 1, h);
  projection = add("projection.weight", h, c.embed_dim);
  projection_bias = add("projection.bias", 1, c.embed_dim);
}

int ParameterLayout::add(std::string name, int rows, int cols) {
  // Every tensor starts on a 64-byte boundary so vectorized reductions over it
  // take the same path on every run.
  size_ = (size_ + kTensorAlign - 1) / kTensorAlign * kTensorAlign;
  tensors_.push_back({std::move(name), rows, cols, size_});
  size_ += static_cast<std::size_t>(rows) * cols;
  count_ += static_cast<std::size_t>(rows) * cols;
  return static_cast<int>(tensors_.size()) - 1;
}

std::size_t parameter_count(const EncoderConfig& config) {
  return ParameterLayout(config).parameter_count();
}

template <typename S>
Parameters<S>::Parameters(const EncoderConfig& config)
    : config_(config),
      layout_(std::make_shared<const ParameterLayout>(config)),
      values_(layout_->size(), S(0)) {}

template <typename S>
bool Parameters<S>::all_finite() const {
  for (S v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename S>
Parameters<S> init_parameters(const EncoderConfig& config, std::uint64_t seed) {
  Parameters<S> p(config);
  const auto& lay = p.layout();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto trunc_normal = [&](int id, double std) {
    auto m = p.tensor(id);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double x;
      do x = normal(rng);
      while (std::abs(x) > 2.0);
      m.data()[i] = static_cast<S>(x * std);
    }
  };
  auto uniform = [&](int id, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    auto m = p.tensor(id);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(u(rng));
  };
  auto xavier = [&](int id) {
    const auto& t = lay.tensors()[id];
    uniform(id, std::sqrt(6.0 / (t.rows + t.cols)));
  };

  trunc_normal(lay.token_embedding, 0.02);
  trunc_normal(lay.cls, 0.02);
  trunc_normal(lay.position, 0.02);
  for (const auto& l : lay.layers) {
    p.tensor(l.ln1_gamma).setOnes();
    p.tensor(l.ln2_gamma).setOnes();
    xavier(l.qkv_weight);
    xavier(l.out_weight);
    uniform(l.fc1_weight, 1.0 / std::sqrt(double(config.hidden_dim)));
    uniform(l.fc2_weight, 1.0 / std::sqrt(double(config.mlp_size)));
  }
  p.tensor(lay.final_gamma).setOnes();
  trunc_normal(lay.projection, 0.02);
  return p;
}

namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename S>
void layer_norm(const Matrix<S>& x, const ConstMatrixMap<S>& gamma, const ConstMatrixMap<S>& beta,
                Matrix<S>& xhat, ColVector<S>& rstd, Matrix<S>& y) {
  const S inv_h = S(1) / S(x.cols());
  ColVector<S> mean = x.rowwise().sum() * inv_h;
  xhat = x.colwise() - mean;
  rstd = ((xhat.array().square().rowwise().sum() * inv_h) + S(kLayerNormEps)).rsqrt().matrix();
  xhat.array().colwise() *= rstd.array();
  y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
}

// Returns dx; accumulates dgamma/dbeta.
template <typename S>
Matrix<S> layer_norm_backward(const Matrix<S>& dy, const Matrix<S>& xhat, const ColVector<S>& rstd,
                              const ConstMatrixMap<S>& gamma, MatrixMap<S> dgamma,
                              MatrixMap<S> dbeta) {
  dgamma.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  const S inv_h = S(1) / S(dy.cols());
  Matrix<S> dxhat = dy.array().rowwise() * gamma.row(0).array();
  ColVector<S> mean_d = dxhat.rowwise().sum() * inv_h;
  ColVector<S> mean_dx = (dxhat.array() * xhat.array()).rowwise().sum().matrix() * inv_h;
  Matrix<S> dx = dxhat.colwise() - mean_d;
  dx -= (xhat.array().colwise() * mean_dx.array()).matrix();
  dx.array().colwise() *= rstd.array();
  return dx;
}

template <typename S>
Matrix<S> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  Matrix<S> mask(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const S keep = S(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = u(rng) < rate ? S(0) : keep;
  return mask;
}

template <typename S>
void check_finite(const Matrix<S>& m, const std::string& where) {
  if (!m.allFinite()) throw Error(ErrorCode::kNumerical, "non-finite activations in " + where);
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

template <typename S>
Matrix<S> forward_batch(const Parameters<S>& w, std::span<const TokenSeq> seqs, Mode mode,
                        std::uint64_t seed, ForwardTape<S>* tape) {
  const EncoderConfig& c = w.config();
  const auto& lay = w.layout();
  const int batch = static_cast<int>(seqs.size());
  const int t_len = c.seq_len + 1;
  const int h = c.hidden_dim;
  const int heads = c.num_heads;
  const int dh = h / heads;
  const Eigen::Index rows = static_cast<Eigen::Index>(batch) * t_len;
  const bool train = mode == Mode::kTrain && c.dropout_rate > 0.0;
  const S scale = S(1) / std::sqrt(S(dh));
  std::mt19937_64 rng(seed);

  if (batch == 0) return Matrix<S>(0, c.embed_dim);

  // Inference runs in cache-sized chunks; results are independent per row.
  constexpr int kChunk = 16;
  if (!tape && !train && batch > kChunk) {
    Matrix<S> out(batch, c.embed_dim);
    for (int b0 = 0; b0 < batch; b0 += kChunk) {
      int n = std::min(kChunk, batch - b0);
      out.middleRows(b0, n) = forward_batch<S>(w, seqs.subspan(b0, n), mode, seed, nullptr);
    }
    return out;
  }

  Matrix<S> x(rows, h);
  {
    auto tok = w.tensor(lay.token_embedding);
    auto pos = w.tensor(lay.position);
    auto cls = w.tensor(lay.cls);
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index base = static_cast<Eigen::Index>(b) * t_len;
      x.row(base) = cls.row(0) + pos.row(0);
      for (int t = 0; t < c.seq_len; ++t) {
        int id = seqs[b][t];
        if (id >= c.vocab_size)
          throw Error(ErrorCode::kShape, "token id " + std::to_string(id) + " outside vocabulary");
        x.row(base + t + 1) = tok.row(id) + pos.row(t + 1);
      }
    }
  }
  if (tape) {
    tape->batch = batch;
    tape->tokens.assign(seqs.begin(), seqs.end());
    tape->layers.assign(c.num_layers, {});
    tape->input_mask.resize(0, 0);
  }
  if (train) {
    Matrix<S> mask = dropout_mask<S>(rows, h, c.dropout_rate, rng);
    x.array() *= mask.array();
    if (tape) tape->input_mask = std::move(mask);
  }

  typename ForwardTape<S>::Layer scratch;
  // Without a tape only the CLS rows of the last block are needed downstream.
  const int full_layers = (tape || train) ? c.num_layers : c.num_layers - 1;
  for (int l = 0; l < full_layers; ++l) {
    const auto& p = lay.layers[l];
    auto& st = tape ? tape->layers[l] : scratch;

    layer_norm<S>(x, w.tensor(p.ln1_gamma), w.tensor(p.ln1_beta), st.xhat1, st.rstd1, st.u);
    st.qkv.noalias() = st.u * w.tensor(p.qkv_weight);
    st.qkv.rowwise() += w.tensor(p.qkv_bias).row(0);

    st.probs.resize(static_cast<Eigen::Index>(batch) * heads * t_len, t_len);
    st.cat.resize(rows, h);
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * t_len;
      for (int hd = 0; hd < heads; ++hd) {
        auto q = st.qkv.block(r0, hd * dh, t_len, dh);
        auto k = st.qkv.block(r0, h + hd * dh, t_len, dh);
        auto v = st.qkv.block(r0, 2 * h + hd * dh, t_len, dh);
        auto prob = st.probs.block((static_cast<Eigen::Index>(b) * heads + hd) * t_len, 0, t_len, t_len);
        prob.noalias() = q * k.transpose();
        prob *= scale;
        ColVector<S> mx = prob.rowwise().maxCoeff();
        prob.colwise() -= mx;
        prob = prob.array().exp().matrix();
        ColVector<S> sum = prob.rowwise().sum();
        prob.array().colwise() /= sum.array();
        st.cat.block(r0, hd * dh, t_len, dh).noalias() = prob * v;
      }
    }

    Matrix<S> a = st.cat * w.tensor(p.out_weight);
    a.rowwise() += w.tensor(p.out_bias).row(0);
    if (train) {
      st.attn_mask = dropout_mask<S>(rows, h, c.dropout_rate, rng);
      a.array() *= st.attn_mask.array();
    }
    x += a;

    layer_norm<S>(x, w.tensor(p.ln2_gamma), w.tensor(p.ln2_beta), st.xhat2, st.rstd2, st.v);
    st.h1.noalias() = st.v * w.tensor(p.fc1_weight);
    st.h1.rowwise() += w.tensor(p.fc1_bias).row(0);
    st.g = (S(0.5) * st.h1.array() * (S(1) + (st.h1.array() * S(kInvSqrt2)).erf())).matrix();
    Matrix<S> m = st.g * w.tensor(p.fc2_weight);
    m.rowwise() += w.tensor(p.fc2_bias).row(0);
    if (train) {
      st.mlp_mask = dropout_mask<S>(rows, h, c.dropout_rate, rng);
      m.array() *= st.mlp_mask.array();
    }
    x += m;
    check_finite(x, "layer " + std::to_string(l));
  }

  Matrix<S> cls_out(batch, h);
  for (int b = 0; b < batch; ++b) cls_out.row(b) = x.row(static_cast<Eigen::Index>(b) * t_len);

  if (full_layers < c.num_layers) {
    const int l = c.num_layers - 1;
    const auto& p = lay.layers[l];
    auto& st = scratch;
    layer_norm<S>(x, w.tensor(p.ln1_gamma), w.tensor(p.ln1_beta), st.xhat1, st.rstd1, st.u);
    Matrix<S> kv = st.u * w.tensor(p.qkv_weight).rightCols(2 * h);
    kv.rowwise() += w.tensor(p.qkv_bias).row(0).tail(2 * h);
    Matrix<S> u_cls(batch, h);
    for (int b = 0; b < batch; ++b) u_cls.row(b) = st.u.row(static_cast<Eigen::Index>(b) * t_len);
    Matrix<S> q = u_cls * w.tensor(p.qkv_weight).leftCols(h);
    q.rowwise() += w.tensor(p.qkv_bias).row(0).head(h);
    Matrix<S> cat(batch, h);
    RowVector<S> prob(t_len);
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * t_len;
      for (int hd = 0; hd < heads; ++hd) {
        auto k = kv.block(r0, hd * dh, t_len, dh);
        auto v = kv.block(r0, h + hd * dh, t_len, dh);
        prob.noalias() = q.row(b).segment(hd * dh, dh) * k.transpose();
        prob *= scale;
        prob.array() -= prob.maxCoeff();
        prob = prob.array().exp().matrix();
        prob /= prob.sum();
        cat.row(b).segment(hd * dh, dh).noalias() = prob * v;
      }
    }
    Matrix<S> a = cat * w.tensor(p.out_weight);
    a.rowwise() += w.tensor(p.out_bias).row(0);
    cls_out += a;
    Matrix<S> xh2, v2;
    ColVector<S> r2;
    layer_norm<S>(cls_out, w.tensor(p.ln2_gamma), w.tensor(p.ln2_beta), xh2, r2, v2);
    Matrix<S> h1 = v2 * w.tensor(p.fc1_weight);
    h1.rowwise() += w.tensor(p.fc1_bias).row(0);
    Matrix<S> g = (S(0.5) * h1.array() * (S(1) + (h1.array() * S(kInvSqrt2)).erf())).matrix();
    Matrix<S> m = g * w.tensor(p.fc2_weight);
    m.rowwise() += w.tensor(p.fc2_bias).row(0);
    cls_out += m;
    check_finite(kv, "layer " + std::to_string(l));
    check_finite(cls_out, "layer " + std::to_string(l));
  }

  Matrix<S> xhat, normed;
  ColVector<S> rstd;
  layer_norm<S>(cls_out, w.tensor(lay.final_gamma), w.tensor(lay.final_beta), xhat, rstd, normed);
  Matrix<S> e = normed * w.tensor(lay.projection);
  e.rowwise() += w.tensor(lay.projection_bias).row(0);
  check_finite(e, "projection (layer " + std::to_string(c.num_layers) + ")");
  ColVector<S> norms = e.rowwise().norm();
  if ((norms.array() <= S(0)).any())
    throw Error(ErrorCode::kNumerical, "zero-norm projection output");
  Matrix<S> z = e.array().colwise() / norms.array();

  if (tape) {
    tape->final_xhat = std::move(xhat);
    tape->final_rstd = std::move(rstd);
    tape->final_out = std::move(normed);
    tape->norms = std::move(norms);
    tape->z = z;
  }
  return z;
}

template <typename S>
RowVector<S> forward(const Parameters<S>& w, const TokenSeq& seq, Mode mode, std::uint64_t seed) {
  return forward_batch<S>(w, std::span<const TokenSeq>(&seq, 1), mode, seed).row(0);
}

template <typename S>
Parameters<S> backward(const Parameters<S>& w, const ForwardTape<S>& tape, const Matrix<S>& dz) {
  const EncoderConfig& c = w.config();
  const auto& lay = w.layout();
  const int batch = tape.batch;
  if (dz.rows() != batch || dz.cols() != c.embed_dim || tape.z.rows() != batch ||
      static_cast<int>(tape.layers.size()) != c.num_layers)
    throw Error(ErrorCode::kShape, "backward: gradient shape does not match recorded forward");

  const int t_len = c.seq_len + 1;
  const int h = c.hidden_dim;
  const int heads = c.num_heads;
  const int dh = h / heads;
  const Eigen::Index rows = static_cast<Eigen::Index>(batch) * t_len;
  const S scale = S(1) / std::sqrt(S(dh));

  Parameters<S> g(c);

  // z = e / |e|  =>  de = (dz - z (z . dz)) / |e|
  ColVector<S> dot = (dz.array() * tape.z.array()).rowwise().sum().matrix();
  Matrix<S> de = dz - (tape.z.array().colwise() * dot.array()).matrix();
  de.array().colwise() /= tape.norms.array();

  g.tensor(lay.projection).noalias() += tape.final_out.transpose() * de;
  g.tensor(lay.projection_bias).row(0) += de.colwise().sum();
  Matrix<S> dnormed = de * w.tensor(lay.projection).transpose();
  Matrix<S> dcls = layer_norm_backward<S>(dnormed, tape.final_xhat, tape.final_rstd,
                                          w.tensor(lay.final_gamma), g.tensor(lay.final_gamma),
                                          g.tensor(lay.final_beta));

  Matrix<S> dx = Matrix<S>::Zero(rows, h);
  for (int b = 0; b < batch; ++b) dx.row(static_cast<Eigen::Index>(b) * t_len) = dcls.row(b);

  for (int l = c.num_layers - 1; l >= 0; --l) {
    const auto& p = lay.layers[l];
    const auto& st = tape.layers[l];

    // MLP branch: x_out = x1 + drop(fc2(gelu(fc1(ln2(x1)))))
    Matrix<S> dm = dx;
    if (st.mlp_mask.size()) dm.array() *= st.mlp_mask.array();
    g.tensor(p.fc2_weight).noalias() += st.g.transpose() * dm;
    g.tensor(p.fc2_bias).row(0) += dm.colwise().sum();
    Matrix<S> dh1 = dm * w.tensor(p.fc2_weight).transpose();
    {
      auto hv = st.h1.array();
      auto cdf = S(0.5) * (S(1) + (hv * S(kInvSqrt2)).erf());
      auto pdf = (hv.square() * S(-0.5)).exp() * S(kInvSqrt2Pi);
      dh1.array() *= cdf + hv * pdf;
    }
    g.tensor(p.fc1_weight).noalias() += st.v.transpose() * dh1;
    g.tensor(p.fc1_bias).row(0) += dh1.colwise().sum();
    Matrix<S> dv = dh1 * w.tensor(p.fc1_weight).transpose();
    dx += layer_norm_backward<S>(dv, st.xhat2, st.rstd2, w.tensor(p.ln2_gamma),
                                 g.tensor(p.ln2_gamma), g.tensor(p.ln2_beta));

    // Attention branch: x1 = x + drop(out(attn(ln1(x))))
    Matrix<S> da = dx;
    if (st.attn_mask.size()) da.array() *= st.attn_mask.array();
    g.tensor(p.out_weight).noalias() += st.cat.transpose() * da;
    g.tensor(p.out_bias).row(0) += da.colwise().sum();
    Matrix<S> dcat = da * w.tensor(p.out_weight).transpose();

    Matrix<S> dqkv(rows, 3 * h);
    Matrix<S> dprob(t_len, t_len);
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * t_len;
      for (int hd = 0; hd < heads; ++hd) {
        auto q = st.qkv.block(r0, hd * dh, t_len, dh);
        auto k = st.qkv.block(r0, h + hd * dh, t_len, dh);
        auto v = st.qkv.block(r0, 2 * h + hd * dh, t_len, dh);
        auto prob = st.probs.block((static_cast<Eigen::Index>(b) * heads + hd) * t_len, 0, t_len, t_len);
        auto dout = dcat.block(r0, hd * dh, t_len, dh);

        dqkv.block(r0, 2 * h + hd * dh, t_len, dh).noalias() = prob.transpose() * dout;
        dprob.noalias() = dout * v.transpose();
        ColVector<S> rowdot = (dprob.array() * prob.array()).rowwise().sum().matrix();
        dprob.colwise() -= rowdot;
        dprob.array() *= prob.array();
        dprob *= scale;
        dqkv.block(r0, hd * dh, t_len, dh).noalias() = dprob * k;
        dqkv.block(r0, h + hd * dh, t_len, dh).noalias() = dprob.transpose() * q;
      }
    }
    g.tensor(p.qkv_weight).noalias() += st.u.transpose() * dqkv;
    g.tensor(p.qkv_bias).row(0) += dqkv.colwise().sum();
    Matrix<S> du = dqkv * w.tensor(p.qkv_weight).transpose();
    dx += layer_norm_backward<S>(du, st.xhat1, st.rstd1, w.tensor(p.ln1_gamma),
                                 g.tensor(p.ln1_gamma), g.tensor(p.ln1_beta));
  }

  if (tape.input_mask.size()) dx.array() *= tape.input_mask.array();
  auto dtok = g.tensor(lay.token_embedding);
  auto dpos = g.tensor(lay.position);
  auto dcls_param = g.tensor(lay.cls);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * t_len;
    dcls_param.row(0) += dx.row(base);
    dpos += dx.block(base, 0, t_len, h);
    for (int t = 0; t < c.seq_len; ++t) dtok.row(tape.tokens[b][t]) += dx.row(base + t + 1);
  }
  return g;
}

template class Parameters<float>;
template class Parameters<double>;
template Parameters<float> init_parameters<float>(const EncoderConfig&, std::uint64_t);
template Parameters<double> init_parameters<double>(const EncoderConfig&, std::uint64_t);
template Matrix<float> forward_batch<float>(const Parameters<float>&, std::span<const TokenSeq>,
                                            Mode, std::uint64_t, ForwardTape<float>*);
template Matrix<double> forward_batch<double>(const Parameters<double>&, std::span<const TokenSeq>,
                                              Mode, std::uint64_t, ForwardTape<double>*);
template RowVector<float> forward<float>(const Parameters<float>&, const TokenSeq&, Mode,
                                         std::uint64_t);
template RowVector<double> forward<double>(const Parameters<double>&, const TokenSeq&, Mode,
                                           std::uint64_t);
template Parameters<float> backward<float>(const Parameters<float>&, const ForwardTape<float>&,
                                           const Matrix<float>&);
template Parameters<double> backward<double>(const Parameters<double>&,
                                             const ForwardTape<double>&, const Matrix<double>&);

}  // namespace lp::nn
