#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "labeler.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic annotated-position file"};
  lp::synth::GenerateOptions opt;
  std::string out;
  bool white = false;
  app.add_option("-o,--output", out, "Output TSV (FEN<TAB>p)")->required();
  app.add_option("-n,--positions", opt.positions, "Number of positions")->check(CLI::PositiveNumber);
  app.add_option("--samples-per-game", opt.samples_per_game, "Random samples per game");
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_flag("--white-relative", white, "Write White-relative probabilities (default: side to move)");
  CLI11_PARSE(app, argc, argv);
  try {
    auto ds = lp::synth::generate(opt);
    if (!white)
      for (auto& row : ds)
        if (row.position.side_to_move() == lp::chess::Color::kBlack) row.p_white = 1.0 - row.p_white;
    lp::data::write_dataset(out, ds);
    std::printf("wrote %zu positions to %s\n", ds.size(), out.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
