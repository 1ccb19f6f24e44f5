#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "labeler.hpp"
#include "latentplan/dataset.hpp"
#include "latentplan/encoder.hpp"
#include "latentplan/trainer.hpp"

namespace lp::acceptance {

namespace fs = std::filesystem;

// Desk-scale recipe: Tiny encoder, 100k annotated positions, 20k steps.
struct Recipe {
  std::size_t train_positions = 100000;
  std::size_t holdout_positions = 10000;
  std::uint64_t data_seed = 20240601;
  nn::EncoderConfig encoder = nn::EncoderConfig::tiny();
  train::TrainConfig train;

  Recipe() {
    train.steps = 20000;
    train.seed = 1;
    train.checkpoint_every = 5000;
  }

  std::string key() const {
    std::ostringstream out;
    out << "train_positions=" << train_positions << "\nholdout_positions=" << holdout_positions
        << "\ndata_seed=" << data_seed << "\n"
        << encoder.to_text() << "delta=" << train.delta << "\ntau=" << train.tau
        << "\nlr=" << train.learning_rate << "\nmomentum=" << train.momentum << "\nsteps=" << train.steps
        << "\nseed=" << train.seed << "\nbatch=" << train.batch.size() << "\n";
    return out.str();
  }
};

struct Trained {
  data::Dataset train;
  data::Dataset holdout;
  nn::ModelWeights weights{nn::EncoderConfig::tiny()};
  std::vector<double> loss;  // per step
  bool from_cache = false;
  double train_seconds = 0;  // < 0 when unknown
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::vector<double> read_loss_log(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<double> loss;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    int step;
    double l;
    row >> step >> l;
    loss.push_back(l);
  }
  return loss;
}

// Generates (or reuses) the data files and the trained checkpoint under dir.
inline Trained prepare(const Recipe& r, const fs::path& dir, bool verbose) {
  fs::create_directories(dir);
  Trained t;
  const fs::path train_file = dir / "train.tsv", holdout_file = dir / "holdout.tsv";
  const fs::path key_file = dir / "recipe.txt", ckpt = dir / "tiny_final.lpck", log = dir / "loss.tsv";
  const bool cached = fs::exists(key_file) && slurp(key_file) == r.key() && fs::exists(ckpt) &&
                      fs::exists(log) && fs::exists(train_file) && fs::exists(holdout_file);

  if (!cached) {
    synth::GenerateOptions opt;
    opt.positions = r.train_positions + r.holdout_positions;
    opt.seed = r.data_seed;
    auto all = synth::generate(opt);
    data::Dataset tr(all.begin(), all.begin() + r.train_positions), ho(all.begin() + r.train_positions, all.end());
    // Stored mover-relative, like the upstream corpus.
    auto to_mover = [](data::Dataset ds) {
      for (auto& row : ds)
        if (row.position.side_to_move() == chess::Color::kBlack) row.p_white = 1.0 - row.p_white;
      return ds;
    };
    data::write_dataset(train_file.string(), to_mover(tr));
    data::write_dataset(holdout_file.string(), to_mover(ho));
  }
  data::IngestOptions io;
  io.shuffle = false;
  t.train = data::ingest(train_file.string(), io);
  t.holdout = data::ingest(holdout_file.string(), io);

  if (cached) {
    t.weights = nn::load_checkpoint(ckpt.string());
    t.loss = read_loss_log(log);
    t.from_cache = true;
    t.train_seconds = -1;
    if (fs::exists(dir / "train_seconds.txt")) std::ifstream(dir / "train_seconds.txt") >> t.train_seconds;
    return t;
  }
  train::TrainConfig cfg = r.train;
  cfg.checkpoint_dir = (dir / "checkpoints").string();
  cfg.loss_log = log.string();
  auto start = std::chrono::steady_clock::now();
  auto result = train::train(t.train, r.encoder, cfg, [&](const train::StepRecord& s) {
    if (verbose && s.step % 500 == 0) {
      double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("  train step %d/%d loss %.4f (%.0fs)\n", s.step, cfg.steps, s.report.loss, el);
      std::fflush(stdout);
    }
  });
  t.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.weights = std::move(result.weights);
  for (const auto& s : result.log) t.loss.push_back(s.report.loss);
  nn::save_checkpoint(ckpt.string(), t.weights);
  std::ofstream(dir / "train_seconds.txt") << t.train_seconds << "\n";
  std::ofstream(key_file) << r.key();
  return t;
}

}  // namespace lp::acceptance
