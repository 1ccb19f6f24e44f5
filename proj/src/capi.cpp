#include "latentplan.h"

#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "latentplan/dataset.hpp"
#include "latentplan/elo.hpp"
#include "latentplan/error.hpp"
#include "latentplan/match.hpp"
#include "latentplan/runtime.hpp"
#include "latentplan/trainer.hpp"
#include "latentplan/uci.hpp"
#include "latentplan/viz.hpp"

using namespace lp;

struct lp_dataset {
  data::Dataset rows;
};
struct lp_model {
  std::shared_ptr<const nn::ModelWeights> weights;
};
struct lp_axis {
  plan::AdvantageAxis axis;
};
struct lp_projection {
  viz::Projection p;
};

namespace {

// Keeps the weights alive for as long as any engine uses them.
class OwningEmbedder final : public plan::PositionEmbedder {
 public:
  explicit OwningEmbedder(std::shared_ptr<const nn::ModelWeights> w) : weights_(std::move(w)), inner_(*weights_) {}
  int dim() const override { return inner_.dim(); }
  nn::Matrix<float> embed(std::span<const chess::Position> positions) const override {
    return inner_.embed(positions);
  }

 private:
  std::shared_ptr<const nn::ModelWeights> weights_;
  plan::EncoderEmbedder inner_;
};

thread_local std::string g_last_error;

template <typename F>
lp_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return LP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<lp_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return LP_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

nn::EncoderConfig preset(const char* name) {
  require(name != nullptr, "preset is null");
  std::string s = name;
  if (s == "tiny") return nn::EncoderConfig::tiny();
  if (s == "small") return nn::EncoderConfig::small();
  if (s == "base") return nn::EncoderConfig::base();
  throw Error(ErrorCode::kConfig, "unknown model preset '" + s + "' (expected tiny, small or base)");
}

std::vector<chess::Position> parse_fens(const char* const* fens, std::size_t n) {
  require(fens != nullptr || n == 0, "fens is null");
  std::vector<chess::Position> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(fens[i] != nullptr, "fen is null");
    try {
      out.push_back(chess::Position::from_fen(fens[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "fen " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<chess::Move> parse_moves(const char* text) {
  std::vector<chess::Move> out;
  if (!text) return out;
  std::istringstream in(text);
  chess::Position pos = chess::Position::start();
  std::string w;
  while (in >> w) {
    auto m = chess::parse_uci(pos, w);
    if (!m)
      throw Error(ErrorCode::kIllegalMove,
                  "illegal or malformed move '" + w + "' at ply " + std::to_string(out.size() + 1));
    out.push_back(*m);
    pos = chess::apply_move_unchecked(pos, *m);
  }
  return out;
}

plan::PlanConfig to_plan(const lp_plan_options& o) {
  plan::PlanConfig c;
  c.beam_width = o.beam_width;
  c.depth = o.depth;
  c.adversarial_mode = o.adversarial != 0;
  c.paper_literal_mode = o.paper_literal != 0;
  c.validate();
  return c;
}

}  // namespace

struct lp_engine {
  std::shared_ptr<const plan::PositionEmbedder> embedder;
  plan::AdvantageAxis axis;
  plan::PlanConfig plan;
  int max_depth = 6;
};

extern "C" {

const char* lp_last_error(void) { return g_last_error.c_str(); }

const char* lp_status_name(lp_status s) {
  switch (s) {
    case LP_OK: return "ok";
    case LP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LP_ERR_PARSE: return "parse error";
    case LP_ERR_ILLEGAL_MOVE: return "illegal move";
    case LP_ERR_NUMERICAL: return "numerical error";
    case LP_ERR_IO: return "i/o error";
    case LP_ERR_DEGENERATE: return "degenerate input";
    case LP_ERR_CONFIG: return "configuration error";
    case LP_ERR_SHAPE: return "shape mismatch";
    case LP_ERR_UNBOUNDED: return "unbounded estimate";
    case LP_ERR_SETUP: return "setup error";
    case LP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lp_version(void) { return "0.1.0"; }

void lp_tune_allocator(void) { tune_allocator(); }

lp_status lp_dataset_ingest(const char* path, int white_relative, int shuffle, uint64_t seed, lp_dataset** out,
                            lp_ingest_report* report) {
  return guard([&] {
    require(path && out, "path and out are required");
    data::IngestOptions opt;
    opt.frame = white_relative ? data::ProbabilityFrame::kWhite : data::ProbabilityFrame::kMover;
    opt.shuffle = shuffle != 0;
    opt.seed = seed;
    data::IngestReport rep;
    auto ds = std::make_unique<lp_dataset>();
    ds->rows = data::ingest(std::string(path), opt, &rep);
    if (report) *report = {rep.rows, rep.accepted, rep.skipped};
    *out = ds.release();
  });
}

lp_status lp_dataset_write(const lp_dataset* ds, const char* path) {
  return guard([&] {
    require(ds && path, "dataset and path are required");
    data::write_dataset(path, ds->rows);
  });
}

size_t lp_dataset_size(const lp_dataset* ds) { return ds ? ds->rows.size() : 0; }

lp_status lp_dataset_split(const lp_dataset* ds, double holdout_fraction, lp_dataset** train, lp_dataset** holdout) {
  return guard([&] {
    require(ds && train && holdout, "dataset and outputs are required");
    auto a = std::make_unique<lp_dataset>(), b = std::make_unique<lp_dataset>();
    data::split(ds->rows, holdout_fraction, a->rows, b->rows);
    *train = a.release();
    *holdout = b.release();
  });
}

void lp_dataset_free(lp_dataset* ds) { delete ds; }

lp_status lp_model_init(const char* name, uint64_t seed, lp_model** out) {
  return guard([&] {
    require(out != nullptr, "out is required");
    auto m = std::make_unique<lp_model>();
    m->weights = std::make_shared<nn::ModelWeights>(nn::init_parameters<float>(preset(name), seed));
    *out = m.release();
  });
}

lp_status lp_model_load(const char* path, lp_model** out) {
  return guard([&] {
    require(path && out, "path and out are required");
    auto m = std::make_unique<lp_model>();
    m->weights = std::make_shared<nn::ModelWeights>(nn::load_checkpoint(path));
    *out = m.release();
  });
}

lp_status lp_model_save(const lp_model* model, const char* path) {
  return guard([&] {
    require(model && path, "model and path are required");
    nn::save_checkpoint(path, *model->weights);
  });
}

int lp_model_dim(const lp_model* model) { return model ? model->weights->config().embed_dim : 0; }

size_t lp_model_parameter_count(const lp_model* model) {
  return model ? model->weights->layout().parameter_count() : 0;
}

lp_status lp_model_embed_fens(const lp_model* model, const char* const* fens, size_t n, float* out) {
  return guard([&] {
    require(model && (out || n == 0), "model and out are required");
    auto positions = parse_fens(fens, n);
    plan::EncoderEmbedder e(*model->weights);
    for (std::size_t start = 0; start < n; start += 256) {
      std::size_t count = std::min<std::size_t>(256, n - start);
      auto z = e.embed(std::span<const chess::Position>(positions.data() + start, count));
      std::memcpy(out + start * z.cols(), z.data(), sizeof(float) * z.size());
    }
  });
}

void lp_model_free(lp_model* model) { delete model; }

void lp_train_options_default(lp_train_options* o) {
  if (!o) return;
  train::TrainConfig c;
  *o = {c.delta, c.tau, c.learning_rate, c.momentum, c.steps, c.checkpoint_every, c.seed, nullptr, nullptr};
}

lp_status lp_train(const lp_dataset* ds, const char* name, const lp_train_options* o, lp_step_fn on_step,
                   void* user, lp_model** out) {
  return guard([&] {
    require(ds && o && out, "dataset, options and out are required");
    train::TrainConfig c;
    c.delta = o->delta;
    c.tau = o->tau;
    c.learning_rate = o->learning_rate;
    c.momentum = o->momentum;
    c.steps = o->steps;
    c.checkpoint_every = o->checkpoint_every;
    c.seed = o->seed;
    if (o->checkpoint_dir) c.checkpoint_dir = o->checkpoint_dir;
    if (o->loss_log) c.loss_log = o->loss_log;
    train::StepCallback cb;
    if (on_step) cb = [&](const train::StepRecord& r) { on_step(r.step, r.report.loss, user); };
    auto result = train::train(ds->rows, preset(name), c, cb);
    auto m = std::make_unique<lp_model>();
    m->weights = std::make_shared<nn::ModelWeights>(std::move(result.weights));
    *out = m.release();
  });
}

lp_status lp_pair_scan(const lp_model* model, const lp_dataset* ds, double delta, size_t pairs, uint64_t seed,
                       double* positive_mean, double* negative_mean) {
  return guard([&] {
    require(model && ds && positive_mean && negative_mean, "model, dataset and outputs are required");
    auto s = train::scan_pairs(*model->weights, ds->rows, delta, pairs, seed);
    *positive_mean = s.positive_mean;
    *negative_mean = s.negative_mean;
  });
}

lp_status lp_axis_from_dataset(const lp_model* model, const lp_dataset* ds, lp_axis** out) {
  return guard([&] {
    require(model && ds && out, "model, dataset and out are required");
    std::vector<chess::Position> whites, blacks;
    for (const auto& r : ds->rows) {
      if (r.p_white == 1.0) whites.push_back(r.position);
      else if (r.p_white == 0.0) blacks.push_back(r.position);
    }
    plan::EncoderEmbedder e(*model->weights);
    auto a = std::make_unique<lp_axis>();
    a->axis = plan::compute_axis(e, whites, blacks);
    *out = a.release();
  });
}

lp_status lp_axis_load(const char* path, lp_axis** out) {
  return guard([&] {
    require(path && out, "path and out are required");
    auto a = std::make_unique<lp_axis>();
    a->axis = plan::load_axis(path);
    *out = a.release();
  });
}

lp_status lp_axis_save(const lp_axis* axis, const char* path) {
  return guard([&] {
    require(axis && path, "axis and path are required");
    plan::save_axis(path, axis->axis);
  });
}

double lp_axis_norm(const lp_axis* axis) { return axis ? axis->axis.norm() : 0.0; }
int lp_axis_dim(const lp_axis* axis) { return axis ? axis->axis.dim() : 0; }

void lp_axis_counts(const lp_axis* axis, uint64_t* white, uint64_t* black) {
  if (!axis) return;
  if (white) *white = axis->axis.white_count;
  if (black) *black = axis->axis.black_count;
}

lp_status lp_axis_score_fens(const lp_model* model, const lp_axis* axis, const char* const* fens, size_t n,
                             double* out) {
  return guard([&] {
    require(model && axis && (out || n == 0), "model, axis and out are required");
    if (model->weights->config().embed_dim != axis->axis.dim())
      throw Error(ErrorCode::kShape, "model and axis dimensions differ");
    auto positions = parse_fens(fens, n);
    plan::EncoderEmbedder e(*model->weights);
    for (std::size_t i = 0; i < n; ++i) out[i] = plan::score_position(e, axis->axis, positions[i]);
  });
}

void lp_axis_free(lp_axis* axis) { delete axis; }

void lp_plan_options_default(lp_plan_options* o) {
  if (!o) return;
  plan::PlanConfig c;
  *o = {c.beam_width, c.depth, c.adversarial_mode ? 1 : 0, c.paper_literal_mode ? 1 : 0, uci::EngineOptions{}.max_depth};
}

lp_status lp_engine_create(const lp_model* model, const lp_axis* axis, const lp_plan_options* o, lp_engine** out) {
  return guard([&] {
    require(model && axis && o && out, "model, axis, options and out are required");
    if (model->weights->config().embed_dim != axis->axis.dim())
      throw Error(ErrorCode::kShape, "model and axis dimensions differ");
    auto e = std::make_unique<lp_engine>();
    e->embedder = std::make_shared<OwningEmbedder>(model->weights);
    e->axis = axis->axis;
    e->plan = to_plan(*o);
    e->max_depth = o->max_depth;
    if (e->max_depth < e->plan.depth) throw Error(ErrorCode::kConfig, "max_depth is below depth");
    *out = e.release();
  });
}

lp_status lp_engine_load(const char* config_path, lp_engine** out) {
  return guard([&] {
    require(config_path && out, "config path and out are required");
    auto cfg = uci::load_engine_config(config_path);
    auto weights = std::make_shared<nn::ModelWeights>(nn::load_checkpoint(cfg.checkpoint));
    auto e = std::make_unique<lp_engine>();
    e->axis = plan::load_axis(cfg.axis);
    if (weights->config().embed_dim != e->axis.dim())
      throw Error(ErrorCode::kShape, "checkpoint and axis dimensions differ");
    e->embedder = std::make_shared<OwningEmbedder>(weights);
    e->plan = cfg.plan;
    e->max_depth = cfg.max_depth;
    *out = e.release();
  });
}

lp_status lp_engine_select(const lp_engine* engine, const char* fen, const char* const* history_fens,
                           size_t history_len, char* uci_move, size_t uci_move_size, double* utility) {
  return guard([&] {
    require(engine && fen && uci_move, "engine, fen and output buffer are required");
    require(uci_move_size >= 6, "move buffer must hold at least 6 bytes");
    auto root = chess::Position::from_fen(fen);
    auto history = parse_fens(history_fens, history_len);
    auto r = plan::search(*engine->embedder, engine->axis, root, history, engine->plan);
    std::string m = chess::to_uci(r.best);
    std::snprintf(uci_move, uci_move_size, "%s", m.c_str());
    if (utility) *utility = r.utility;
  });
}

lp_status lp_engine_serve_stdio(const lp_engine* engine) {
  return guard([&] {
    require(engine != nullptr, "engine is required");
    uci::EngineOptions opt;
    opt.plan = engine->plan;
    opt.max_depth = engine->max_depth;
    uci::Session session(engine->embedder, engine->axis, opt);
    session.run(std::cin, std::cout);
  });
}

void lp_engine_free(lp_engine* engine) { delete engine; }

void lp_match_options_default(lp_match_options* o) {
  if (!o) return;
  eval::MatchSpec spec;
  *o = {"random-mover", nullptr, 0, spec.games, spec.movetime_ms, 1, nullptr, nullptr};
}

lp_status lp_match_run(const lp_engine* engine, const lp_match_options* o, lp_game_fn on_game, void* user,
                       lp_match_result* out) {
  return guard([&] {
    require(engine && o && o->opponent, "engine, options and opponent are required");
    eval::MatchSpec spec;
    spec.games = o->games;
    spec.movetime_ms = o->movetime_ms;
    spec.validate();
    std::unique_ptr<eval::Player> opponent;
    const std::string name = o->opponent;
    if (name == "random-mover") {
      opponent = std::make_unique<eval::RandomMover>(o->seed);
    } else if (name == "material-greedy") {
      opponent = std::make_unique<eval::MaterialGreedy>(o->seed);
    } else if (name.rfind("uci:", 0) == 0) {
      std::vector<std::string> opts;
      for (std::size_t i = 0; i < o->engine_option_count; ++i) opts.emplace_back(o->engine_options[i]);
      opponent = std::make_unique<eval::UciProcessPlayer>(name.substr(4), opts);
    } else {
      throw Error(ErrorCode::kConfig,
                  "unknown opponent '" + name + "' (expected random-mover, material-greedy or uci:<command>)");
    }
    eval::EnginePlayer ours(engine->embedder, engine->axis, engine->plan);
    lp_match_result tally{0, 0, 0, 0};
    auto rec = eval::play_match(ours, *opponent, spec, [&](const eval::GameRecord& g) {
      (g.result == eval::Result::kWin ? tally.wins : g.result == eval::Result::kDraw ? tally.draws : tally.losses)++;
      tally.score = (tally.wins + 0.5 * tally.draws) / (tally.wins + tally.draws + tally.losses);
      if (on_game) on_game(g.index + 1, &tally, user);
    });
    if (o->pgn_path) {
      std::ofstream f(o->pgn_path);
      if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + o->pgn_path);
      eval::write_pgn(f, rec, spec);
    }
    if (o->summary_path) {
      std::ofstream f(o->summary_path);
      if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + o->summary_path);
      eval::write_summary(f, rec);
    }
    if (out) *out = {rec.wins, rec.draws, rec.losses, rec.score()};
  });
}

lp_status lp_elo_estimate(const double* anchors, const int* wins, const int* draws, const int* losses, size_t n,
                          lp_elo_result* out) {
  return guard([&] {
    require(out && (n == 0 || (anchors && wins && draws && losses)), "arrays and out are required");
    std::vector<eval::OpponentTally> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({anchors[i], wins[i], draws[i], losses[i]});
    auto e = eval::estimate_elo(t);
    *out = {e.rating, e.lower, e.upper, e.draw_nu};
  });
}

lp_status lp_projection_fit(const lp_model* model, const lp_dataset* ds, size_t max_points, lp_projection** out) {
  return guard([&] {
    require(model && ds && out, "model, dataset and out are required");
    data::Dataset rows(ds->rows.begin(), ds->rows.begin() + std::min(max_points, ds->rows.size()));
    auto p = std::make_unique<lp_projection>();
    p->p = viz::fit_projection(train::embed_dataset(*model->weights, rows));
    *out = p.release();
  });
}

void lp_projection_explained(const lp_projection* p, double* first, double* second) {
  if (!p) return;
  if (first) *first = p->p.explained[0];
  if (second) *second = p->p.explained[1];
}

lp_status lp_viz_scatter(const lp_model* model, const lp_axis* axis, const lp_projection* p, const lp_dataset* ds,
                         size_t max_points, const char* svg_path, const char* tsv_path) {
  return guard([&] {
    require(model && axis && p && ds, "model, axis, projection and dataset are required");
    data::Dataset rows(ds->rows.begin(), ds->rows.begin() + std::min(max_points, ds->rows.size()));
    auto z = train::embed_dataset(*model->weights, rows);
    std::vector<viz::ScatterPoint> pts;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      auto xy = p->p.project(std::span<const float>(z.row(i).data(), static_cast<std::size_t>(z.cols())));
      pts.push_back({xy[0], xy[1], rows[i].p_white});
    }
    if (svg_path) {
      std::ofstream f(svg_path);
      if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + svg_path);
      viz::write_scatter_svg(f, pts, p->p, axis->axis);
    }
    if (tsv_path) {
      std::ofstream f(tsv_path);
      if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + tsv_path);
      viz::write_scatter_tsv(f, pts);
    }
  });
}

lp_status lp_viz_trajectory(const lp_model* model, const lp_axis* axis, const lp_projection* p, const char* moves,
                            const char* svg_path, const char* tsv_path) {
  return guard([&] {
    require(model && axis && p, "model, axis and projection are required");
    auto line = parse_moves(moves);
    plan::EncoderEmbedder e(*model->weights);
    auto t = viz::trajectory(e, axis->axis, p->p, line);
    if (svg_path) {
      std::ofstream f(svg_path);
      if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + svg_path);
      viz::write_trajectory_svg(f, t, p->p, axis->axis);
    }
    if (tsv_path) {
      std::ofstream f(tsv_path);
      if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + tsv_path);
      viz::write_trajectory_tsv(f, t);
    }
  });
}

void lp_projection_free(lp_projection* p) { delete p; }

}  // extern "C"
