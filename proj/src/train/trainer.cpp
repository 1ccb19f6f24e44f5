#include "latentplan/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "latentplan/error.hpp"

namespace lp::train {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, "train config: " + msg); };
  if (!(tau > 0)) fail("tau must be > 0");
  if (!(delta >= 0)) fail("delta must be >= 0");
  if (!(momentum >= 0 && momentum < 1)) fail("momentum must be in [0, 1)");
  if (!(learning_rate > 0)) fail("learning_rate must be > 0");
  if (steps < 1) fail("steps must be >= 1");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  if (batch.size() < 2) fail("batch must hold at least two positions");
}

LossReport supcon_loss(const nn::Matrix<double>& z, std::span<const std::uint8_t> mask, double tau,
                       nn::Matrix<double>* grad) {
  if (!(tau > 0)) throw Error(ErrorCode::kConfig, "supcon: tau must be > 0");
  const Eigen::Index n = z.rows();
  if (mask.size() != static_cast<std::size_t>(n * n))
    throw Error(ErrorCode::kShape, "supcon: mask must be n x n");
  if (!z.allFinite()) throw Error(ErrorCode::kNumerical, "supcon: non-finite embedding");

  nn::Matrix<double> sim = z * z.transpose();
  nn::Matrix<double> dsim;
  if (grad) dsim = nn::Matrix<double>::Zero(n, n);

  LossReport rep;
  double total = 0, pos_sum = 0, neg_sum = 0;
  std::size_t pos_n = 0, neg_n = 0;
  std::vector<double> logits(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint8_t* row = mask.data() + i * n;
    int np = 0;
    double mx = -INFINITY;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      logits[a] = sim(i, a) / tau;
      mx = std::max(mx, logits[a]);
      if (row[a]) {
        ++np;
        pos_sum += sim(i, a);
        ++pos_n;
      } else {
        neg_sum += sim(i, a);
        ++neg_n;
      }
    }
    if (np == 0) continue;
    double denom = 0;
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != i) denom += std::exp(logits[a] - mx);
    const double lse = mx + std::log(denom);
    double li = 0;
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != i && row[a]) li += lse - logits[a];
    total += li / np;
    ++rep.anchors;
    if (grad) {
      for (Eigen::Index a = 0; a < n; ++a) {
        if (a == i) continue;
        double soft = std::exp(logits[a] - lse);
        dsim(i, a) = (soft - (row[a] ? 1.0 / np : 0.0)) / tau;
      }
    }
  }
  rep.loss = rep.anchors ? total / rep.anchors : 0.0;
  rep.mean_positive_similarity = pos_n ? pos_sum / pos_n : 0.0;
  rep.mean_negative_similarity = neg_n ? neg_sum / neg_n : 0.0;
  if (grad) {
    if (rep.anchors) dsim /= rep.anchors;
    // s_ia = z_i . z_a contributes to both endpoints.
    *grad = dsim * z + dsim.transpose() * z;
  }
  if (!std::isfinite(rep.loss)) throw Error(ErrorCode::kNumerical, "supcon: non-finite loss");
  return rep;
}

template <typename S>
void sgd_step(std::span<S> w, std::span<const S> g, SgdState<S>& state, double lr, double momentum) {
  if (w.size() != g.size())
    throw Error(ErrorCode::kShape, "sgd: gradient size does not match weights");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!std::isfinite(g[i]))
      throw Error(ErrorCode::kNumerical, "sgd: non-finite gradient at parameter " + std::to_string(i));
  if (state.velocity.empty()) state.velocity.assign(w.size(), S(0));
  if (state.velocity.size() != w.size()) throw Error(ErrorCode::kShape, "sgd: state size mismatch");
  const S m = static_cast<S>(momentum), eta = static_cast<S>(lr);
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.velocity[i] = m * state.velocity[i] + g[i];
    w[i] -= eta * state.velocity[i];
  }
}

template void sgd_step<float>(std::span<float>, std::span<const float>, SgdState<float>&, double, double);
template void sgd_step<double>(std::span<double>, std::span<const double>, SgdState<double>&, double,
                               double);

TrainResult train(const data::Dataset& ds, const nn::EncoderConfig& encoder, const TrainConfig& cfg,
                  const StepCallback& on_step) {
  cfg.validate();
  encoder.validate();
  if (ds.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty dataset");

  auto index = data::build_positive_index(ds, cfg.delta);
  index.set_min_positives(std::max(1, cfg.batch.positives_per_anchor));

  TrainResult result{nn::init_parameters<float>(encoder, cfg.seed), {}};
  nn::ModelWeights& w = result.weights;
  SgdState<float> sgd;
  std::mt19937_64 rng(cfg.seed ^ 0x5eedba7c4ULL);

  std::ofstream log;
  if (!cfg.loss_log.empty()) {
    log.open(cfg.loss_log);
    if (!log) throw Error(ErrorCode::kIo, "cannot write loss log " + cfg.loss_log);
    log << "step\tloss\tanchors\tpositive_sim\tnegative_sim\n";
    log.precision(8);
  }
  if (!cfg.checkpoint_dir.empty()) std::filesystem::create_directories(cfg.checkpoint_dir);
  auto checkpoint = [&](int step) {
    if (cfg.checkpoint_dir.empty()) return;
    char name[64];
    std::snprintf(name, sizeof name, "step_%07d.lpck", step);
    nn::save_checkpoint((std::filesystem::path(cfg.checkpoint_dir) / name).string(), w);
  };

  std::vector<TokenSeq> tokens;
  nn::ForwardTape<float> tape;
  nn::Matrix<double> dz;
  for (int step = 1; step <= cfg.steps; ++step) {
    try {
      auto batch = data::sample_batch(ds, index, rng, cfg.batch);
      tokens.clear();
      for (std::size_t i : batch.indices) tokens.push_back(ds[i].tokens);
      std::uint64_t dropout_seed = rng();
      nn::Matrix<float> z = nn::forward_batch<float>(w, tokens, nn::Mode::kTrain, dropout_seed, &tape);
      LossReport rep = supcon_loss(z.cast<double>(), batch.mask, cfg.tau, &dz);
      nn::Parameters<float> g = nn::backward<float>(w, tape, dz.cast<float>());
      sgd_step<float>(w.values(), g.values(), sgd, cfg.learning_rate, cfg.momentum);

      StepRecord record{step, rep};
      result.log.push_back(record);
      if (log)
        log << step << '\t' << rep.loss << '\t' << rep.anchors << '\t' << rep.mean_positive_similarity
            << '\t' << rep.mean_negative_similarity << '\n';
      if (on_step) on_step(record);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(step) + ": " + e.what());
    }
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && step != cfg.steps)
      checkpoint(step);
  }
  checkpoint(cfg.steps);
  return result;
}

nn::Matrix<float> embed_dataset(const nn::ModelWeights& w, const data::Dataset& ds) {
  nn::Matrix<float> out(static_cast<Eigen::Index>(ds.size()), w.config().embed_dim);
  constexpr std::size_t kBatch = 256;
  std::vector<TokenSeq> tokens;
  for (std::size_t b0 = 0; b0 < ds.size(); b0 += kBatch) {
    tokens.clear();
    for (std::size_t i = b0; i < std::min(ds.size(), b0 + kBatch); ++i) tokens.push_back(ds[i].tokens);
    out.middleRows(static_cast<Eigen::Index>(b0), static_cast<Eigen::Index>(tokens.size())) =
        nn::forward_batch<float>(w, tokens, nn::Mode::kEval, 0);
  }
  return out;
}

PairScan scan_pairs(const nn::ModelWeights& w, const data::Dataset& ds, double delta, std::size_t pairs,
                    std::uint64_t seed) {
  if (ds.size() < 2) throw Error(ErrorCode::kInvalidArgument, "scan_pairs: need two rows");
  nn::Matrix<float> z = embed_dataset(w, ds);
  auto index = data::build_positive_index(ds, delta);
  index.set_min_positives(1);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> row(0, ds.size() - 1);
  PairScan scan;
  double pos = 0, neg = 0;
  // Positive pairs are drawn through the index so they are not vanishingly
  // rare; negatives are uniform non-positive pairs.
  for (std::size_t t = 0; t < pairs && !index.anchors().empty(); ++t) {
    std::size_t i = index.anchors()[row(rng) % index.anchors().size()];
    std::size_t j = index.neighbour(i, row(rng) % index.count(i));
    pos += z.row(i).dot(z.row(j));
    ++scan.positive_pairs;
  }
  for (std::size_t t = 0, tries = 0; t < pairs && tries < 100 * pairs; ++tries) {
    std::size_t i = row(rng), j = row(rng);
    if (i == j || data::is_positive_pair(ds[i].p_white, ds[j].p_white, delta)) continue;
    neg += z.row(i).dot(z.row(j));
    ++scan.negative_pairs;
    ++t;
  }
  scan.positive_mean = scan.positive_pairs ? pos / scan.positive_pairs : 0.0;
  scan.negative_mean = scan.negative_pairs ? neg / scan.negative_pairs : 0.0;
  return scan;
}

}  // namespace lp::train
