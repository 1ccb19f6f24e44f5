#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "latentplan/planner.hpp"

namespace lp::uci {

// key=value file naming the model files and search settings. Relative paths
// are resolved against the file's directory.
struct EngineConfig {
  std::string checkpoint;
  std::string axis;
  plan::PlanConfig plan;
  int max_depth = 6;

  void validate() const;
  std::string to_text() const;
};

EngineConfig load_engine_config(const std::string& path);
EngineConfig parse_engine_config(const std::string& text, const std::string& base_dir = ".");

struct EngineOptions {
  std::string name = "latentplan";
  std::string author = "latentplan authors";
  plan::PlanConfig plan;
  int max_depth = 6;
  // Per-level cost estimate is measured on first use of "go movetime" unless
  // a fixed value (seconds per depth step) is given here.
  double fixed_seconds_per_ply = 0;
};

// Runs the UCI protocol until "quit" or end of input. Search runs on a worker
// thread so "isready" and "stop" are answered while it is busy. Never throws
// on protocol errors: malformed input is reported as "info string" and
// ignored.
class Session {
 public:
  Session(std::shared_ptr<const plan::PositionEmbedder> embedder, plan::AdvantageAxis axis,
          EngineOptions options);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void run(std::istream& in, std::ostream& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lp::uci
