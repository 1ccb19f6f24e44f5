// Command-line front end. Uses only the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "latentplan.h"

namespace {

struct Failure {
  int code;
};

void check(lp_status s, const std::string& what) {
  if (s == LP_OK) return;
  std::cerr << "error: " << what << ": " << lp_last_error() << " (" << lp_status_name(s) << ")\n";
  throw Failure{static_cast<int>(s) < 100 ? 2 : 3};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  operator T*() const { return p; }
};

using Dataset = Handle<lp_dataset, lp_dataset_free>;
using Model = Handle<lp_model, lp_model_free>;
using Axis = Handle<lp_axis, lp_axis_free>;
using Engine = Handle<lp_engine, lp_engine_free>;
using Projection = Handle<lp_projection, lp_projection_free>;

struct EngineArgs {
  std::string config, model, axis;
  lp_plan_options plan{};

  void add(CLI::App* app) {
    lp_plan_options_default(&plan);
    auto* cfg = app->add_option("--config", config, "engine config file (checkpoint, axis, beam_width, depth)");
    app->add_option("--model", model, "checkpoint")->excludes(cfg);
    app->add_option("--axis", axis, "axis file")->excludes(cfg);
    app->add_option("--beam", plan.beam_width, "beam width k")->check(CLI::PositiveNumber);
    app->add_option("--depth", plan.depth, "search depth S in plies")->check(CLI::PositiveNumber);
    app->add_option("--max-depth", plan.max_depth, "deepest S a UCI go may request")->check(CLI::PositiveNumber);
    app->add_flag("!--no-adversarial", plan.adversarial, "keep the engine's top k at opponent plies too");
    app->add_flag("--paper-literal", plan.paper_literal, "top-k by our score at every ply");
  }

  void open(Engine& e) const {
    if (!config.empty()) {
      check(lp_engine_load(config.c_str(), e.out()), "loading " + config);
      return;
    }
    if (model.empty() || axis.empty()) {
      std::cerr << "error: give --config, or both --model and --axis\n";
      throw Failure{2};
    }
    Model m;
    Axis a;
    check(lp_model_load(model.c_str(), m.out()), "loading " + model);
    check(lp_axis_load(axis.c_str(), a.out()), "loading " + axis);
    lp_plan_options p = plan;
    if (p.max_depth < p.depth) p.max_depth = p.depth;
    check(lp_engine_create(m, a, &p, e.out()), "creating engine");
  }
};

// Tallies the result column of a match summary written by "match".
void read_summary(const std::string& path, int& w, int& d, int& l) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    throw Failure{2};
  }
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string game, colour, result;
    std::getline(row, game, '\t');
    std::getline(row, colour, '\t');
    std::getline(row, result, '\t');
    if (result == "win") ++w;
    else if (result == "draw") ++d;
    else if (result == "loss") ++l;
  }
}

}  // namespace

int main(int argc, char** argv) {
  lp_tune_allocator();
  CLI::App app{"Contrastive chess encoder: data, training, search, matches and plots"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lp_version());

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and normalise a FEN<TAB>probability file");
  std::string in_path, out_path, holdout_path;
  bool white_relative = false, no_shuffle = false;
  double holdout = 0;
  std::uint64_t seed = 1;
  ingest->add_option("input", in_path, "input TSV")->required();
  ingest->add_option("-o,--output", out_path, "White-relative output TSV")->required();
  ingest->add_flag("--white-relative", white_relative, "probabilities are White's, not the side to move's");
  ingest->add_flag("--no-shuffle", no_shuffle, "keep file order");
  ingest->add_option("--seed", seed, "shuffle seed");
  ingest->add_option("--holdout", holdout, "fraction written to --holdout-output")->check(CLI::Range(0.0, 1.0));
  ingest->add_option("--holdout-output", holdout_path, "held-out rows");

  // train
  auto* train = app.add_subcommand("train", "contrastive training");
  std::string data_path, preset = "tiny", model_out;
  lp_train_options topt;
  lp_train_options_default(&topt);
  std::string ckpt_dir, loss_log;
  int log_every = 100;
  train->add_option("--data", data_path, "White-relative training TSV (see ingest)")->required();
  train->add_option("--preset", preset, "tiny, small or base")->check(CLI::IsMember({"tiny", "small", "base"}));
  train->add_option("-o,--output", model_out, "final checkpoint")->required();
  train->add_option("--steps", topt.steps, "optimizer steps")->check(CLI::PositiveNumber);
  train->add_option("--delta", topt.delta, "positive-pair threshold on |p_i - p_j|");
  train->add_option("--tau", topt.tau, "temperature");
  train->add_option("--lr", topt.learning_rate, "learning rate");
  train->add_option("--momentum", topt.momentum, "SGD momentum");
  train->add_option("--seed", topt.seed, "training seed");
  train->add_option("--checkpoint-dir", ckpt_dir, "directory for periodic checkpoints");
  train->add_option("--checkpoint-every", topt.checkpoint_every, "steps between checkpoints");
  train->add_option("--loss-log", loss_log, "per-step loss TSV");
  train->add_option("--log-every", log_every, "progress line interval")->check(CLI::PositiveNumber);

  // axis
  auto* axis = app.add_subcommand("axis", "advantage axis from decisive rows (p = 1 minus p = 0)");
  std::string model_path, axis_out;
  axis->add_option("--model", model_path, "checkpoint")->required();
  axis->add_option("--data", data_path, "White-relative TSV")->required();
  axis->add_option("-o,--output", axis_out, "axis file")->required();

  // embed
  auto* embed = app.add_subcommand("embed", "print one comma-separated embedding per FEN");
  std::vector<std::string> fens;
  std::string fen_file;
  embed->add_option("--model", model_path, "checkpoint")->required();
  embed->add_option("fens", fens, "FEN strings");
  embed->add_option("--fen-file", fen_file, "file with one FEN per line");

  // play
  auto* play = app.add_subcommand("play", "serve UCI on stdin/stdout");
  EngineArgs play_engine;
  play_engine.add(play);

  // match
  auto* match = app.add_subcommand("match", "play games against a builtin or external opponent");
  EngineArgs match_engine;
  match_engine.add(match);
  lp_match_options mopt;
  lp_match_options_default(&mopt);
  std::string opponent = "random-mover", pgn, summary;
  std::vector<std::string> engine_options;
  double anchor = 0;
  bool have_anchor = false;
  match->add_option("--opponent", opponent, "random-mover, material-greedy or uci:<command>");
  match->add_option("--engine-option", engine_options, "Name=value sent to a UCI opponent (repeatable)");
  match->add_option("--games", mopt.games, "number of games")->check(CLI::PositiveNumber);
  match->add_option("--movetime", mopt.movetime_ms, "per-move time in ms")->check(CLI::PositiveNumber);
  match->add_option("--seed", mopt.seed, "builtin opponent seed");
  match->add_option("--pgn", pgn, "PGN output");
  match->add_option("--summary", summary, "per-game TSV output");
  auto* anchor_opt = match->add_option("--anchor", anchor, "opponent rating; prints an Elo estimate");

  // rate
  auto* rate = app.add_subcommand("rate", "Elo estimate from match summaries or tallies");
  std::vector<std::string> results;
  rate->add_option("results", results, "RATING=summary.tsv or RATING:W:D:L, one per opponent")->required();

  // viz
  auto* viz = app.add_subcommand("viz", "2D projection plots and trajectories");
  std::string reference, scatter_svg, scatter_tsv, moves, traj_svg, traj_tsv, axis_path;
  std::size_t max_points = 5000;
  viz->add_option("--model", model_path, "checkpoint")->required();
  viz->add_option("--axis", axis_path, "axis file")->required();
  viz->add_option("--reference", reference, "White-relative TSV the projection is fitted on")->required();
  viz->add_option("--max-points", max_points, "rows used for fitting and scatter")->check(CLI::PositiveNumber);
  viz->add_option("--scatter-svg", scatter_svg, "scatter plot");
  viz->add_option("--scatter-tsv", scatter_tsv, "scatter data");
  viz->add_option("--moves", moves, "game in coordinate notation, space separated");
  viz->add_option("--trajectory-svg", traj_svg, "trajectory plot (needs --moves)");
  viz->add_option("--trajectory-tsv", traj_tsv, "trajectory data (needs --moves)");

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto* s : app.get_subcommands({})) known |= s->get_name() == argv[1];
    if (!known) {
      std::cerr << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 2;
  }
  have_anchor = anchor_opt->count() > 0;

  try {
    if (ingest->parsed()) {
      Dataset ds;
      lp_ingest_report rep{};
      check(lp_dataset_ingest(in_path.c_str(), white_relative, !no_shuffle, seed, ds.out(), &rep),
            "ingesting " + in_path);
      std::cerr << rep.accepted << " rows accepted, " << rep.skipped << " skipped of " << rep.rows << "\n";
      if (holdout > 0) {
        if (holdout_path.empty()) {
          std::cerr << "error: --holdout needs --holdout-output\n";
          return 2;
        }
        Dataset a, b;
        check(lp_dataset_split(ds, holdout, a.out(), b.out()), "splitting");
        check(lp_dataset_write(a, out_path.c_str()), "writing " + out_path);
        check(lp_dataset_write(b, holdout_path.c_str()), "writing " + holdout_path);
      } else {
        check(lp_dataset_write(ds, out_path.c_str()), "writing " + out_path);
      }
    } else if (train->parsed()) {
      Dataset ds;
      check(lp_dataset_ingest(data_path.c_str(), 1, 0, 0, ds.out(), nullptr), "reading " + data_path);
      if (!ckpt_dir.empty()) topt.checkpoint_dir = ckpt_dir.c_str();
      if (!loss_log.empty()) topt.loss_log = loss_log.c_str();
      struct Progress {
        int every;
        int steps;
      } progress{log_every, topt.steps};
      auto cb = [](int step, double loss, void* user) {
        auto* p = static_cast<Progress*>(user);
        if (step % p->every == 0 || step == p->steps) std::fprintf(stderr, "step %d/%d loss %.4f\n", step, p->steps, loss);
      };
      Model m;
      check(lp_train(ds, preset.c_str(), &topt, cb, &progress, m.out()), "training");
      check(lp_model_save(m, model_out.c_str()), "writing " + model_out);
    } else if (axis->parsed()) {
      Model m;
      Dataset ds;
      Axis a;
      check(lp_model_load(model_path.c_str(), m.out()), "loading " + model_path);
      check(lp_dataset_ingest(data_path.c_str(), 1, 0, 0, ds.out(), nullptr), "reading " + data_path);
      check(lp_axis_from_dataset(m, ds, a.out()), "computing axis");
      check(lp_axis_save(a, axis_out.c_str()), "writing " + axis_out);
      std::uint64_t w = 0, b = 0;
      lp_axis_counts(a, &w, &b);
      std::cerr << "axis from " << w << " White-won and " << b << " Black-won rows, |a| = " << lp_axis_norm(a) << "\n";
    } else if (embed->parsed()) {
      if (!fen_file.empty()) {
        std::ifstream f(fen_file);
        if (!f) {
          std::cerr << "error: cannot read " << fen_file << "\n";
          return 2;
        }
        for (std::string line; std::getline(f, line);)
          if (!line.empty()) fens.push_back(line);
      }
      if (fens.empty()) {
        std::cerr << "error: no FENs given\n" << embed->help();
        return 2;
      }
      Model m;
      check(lp_model_load(model_path.c_str(), m.out()), "loading " + model_path);
      const int d = lp_model_dim(m);
      std::vector<const char*> ptrs;
      for (const auto& f : fens) ptrs.push_back(f.c_str());
      std::vector<float> out(fens.size() * d);
      check(lp_model_embed_fens(m, ptrs.data(), ptrs.size(), out.data()), "embedding");
      for (std::size_t i = 0; i < fens.size(); ++i) {
        for (int j = 0; j < d; ++j) std::printf(j ? ",%.9g" : "%.9g", out[i * d + j]);
        std::printf("\n");
      }
    } else if (play->parsed()) {
      Engine e;
      play_engine.open(e);
      check(lp_engine_serve_stdio(e), "serving");
    } else if (match->parsed()) {
      Engine e;
      match_engine.open(e);
      std::vector<const char*> opts;
      for (const auto& o : engine_options) opts.push_back(o.c_str());
      mopt.opponent = opponent.c_str();
      mopt.engine_options = opts.data();
      mopt.engine_option_count = opts.size();
      if (!pgn.empty()) mopt.pgn_path = pgn.c_str();
      if (!summary.empty()) mopt.summary_path = summary.c_str();
      auto cb = [](int game, const lp_match_result* r, void*) {
        std::fprintf(stderr, "game %d: +%d =%d -%d (%.1f%%)\n", game, r->wins, r->draws, r->losses, 100 * r->score);
      };
      lp_match_result r{};
      check(lp_match_run(e, &mopt, cb, nullptr, &r), "match");
      std::printf("wins %d draws %d losses %d score %.4f\n", r.wins, r.draws, r.losses, r.score);
      if (have_anchor) {
        lp_elo_result elo{};
        check(lp_elo_estimate(&anchor, &r.wins, &r.draws, &r.losses, 1, &elo), "rating");
        std::printf("elo %.1f [%.1f, %.1f]\n", elo.rating, elo.lower, elo.upper);
      }
    } else if (rate->parsed()) {
      std::vector<double> anchors;
      std::vector<int> w, d, l;
      for (const auto& spec : results) {
        int a = 0, b = 0, c = 0;
        double rating = 0;
        auto eq = spec.find('=');
        if (eq != std::string::npos) {
          rating = std::stod(spec.substr(0, eq));
          read_summary(spec.substr(eq + 1), a, b, c);
        } else if (std::sscanf(spec.c_str(), "%lf:%d:%d:%d", &rating, &a, &b, &c) != 4) {
          std::cerr << "error: cannot parse '" << spec << "' (expected RATING=summary.tsv or RATING:W:D:L)\n"
                    << rate->help();
          return 2;
        }
        anchors.push_back(rating);
        w.push_back(a);
        d.push_back(b);
        l.push_back(c);
      }
      lp_elo_result elo{};
      check(lp_elo_estimate(anchors.data(), w.data(), d.data(), l.data(), anchors.size(), &elo), "rating");
      std::printf("elo %.1f [%.1f, %.1f] draw_nu %.4f\n", elo.rating, elo.lower, elo.upper, elo.draw_nu);
    } else if (viz->parsed()) {
      if ((!traj_svg.empty() || !traj_tsv.empty()) && moves.empty()) {
        std::cerr << "error: trajectory output needs --moves\n";
        return 2;
      }
      Model m;
      Axis a;
      Dataset ds;
      Projection p;
      check(lp_model_load(model_path.c_str(), m.out()), "loading " + model_path);
      check(lp_axis_load(axis_path.c_str(), a.out()), "loading " + axis_path);
      check(lp_dataset_ingest(reference.c_str(), 1, 0, 0, ds.out(), nullptr), "reading " + reference);
      check(lp_projection_fit(m, ds, max_points, p.out()), "fitting projection");
      double e1 = 0, e2 = 0;
      lp_projection_explained(p, &e1, &e2);
      std::cerr << "explained variance " << e1 << " + " << e2 << "\n";
      if (!scatter_svg.empty() || !scatter_tsv.empty())
        check(lp_viz_scatter(m, a, p, ds, max_points, scatter_svg.empty() ? nullptr : scatter_svg.c_str(),
                             scatter_tsv.empty() ? nullptr : scatter_tsv.c_str()),
              "scatter");
      if (!moves.empty())
        check(lp_viz_trajectory(m, a, p, moves.c_str(), traj_svg.empty() ? nullptr : traj_svg.c_str(),
                                traj_tsv.empty() ? nullptr : traj_tsv.c_str()),
              "trajectory");
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
