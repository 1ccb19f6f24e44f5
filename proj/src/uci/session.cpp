#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "latentplan/error.hpp"
#include "latentplan/uci.hpp"

namespace lp::uci {

using chess::Position;

namespace {

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::optional<long> to_long(const std::string& s) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

bool parse_bool(const std::string& v, bool& out) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "true" || s == "1" || s == "on") return out = true, true;
  if (s == "false" || s == "0" || s == "off") return out = false, true;
  return false;
}

// Fixed probe positions for movetime calibration.
const char* kProbes[] = {
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
    "r1bqkb1r/pppp1ppp/2n2n2/4p3/2B1P3/5N2/PPPP1PPP/RNBQK2R w KQkq - 4 4",
    "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
    "r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
    "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
};

}  // namespace

void EngineConfig::validate() const {
  plan.validate();
  if (max_depth < 1) throw Error(ErrorCode::kConfig, "engine config: max_depth must be >= 1");
  if (plan.depth > max_depth) throw Error(ErrorCode::kConfig, "engine config: depth exceeds max_depth");
}

std::string EngineConfig::to_text() const {
  std::ostringstream out;
  out << "checkpoint=" << checkpoint << "\naxis=" << axis << "\nbeam_width=" << plan.beam_width
      << "\ndepth=" << plan.depth << "\nmax_depth=" << max_depth
      << "\nadversarial=" << (plan.adversarial_mode ? "true" : "false")
      << "\npaper_literal=" << (plan.paper_literal_mode ? "true" : "false") << "\n";
  return out.str();
}

EngineConfig parse_engine_config(const std::string& text, const std::string& base_dir) {
  EngineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) -> void {
    throw Error(ErrorCode::kConfig, "engine config line " + std::to_string(line_no) + ": " + why);
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).string();
  };
  auto number = [&](const std::string& v) {
    auto n = to_long(v);
    if (!n) fail("expected an integer, got '" + v + "'");
    return static_cast<int>(*n);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "checkpoint") cfg.checkpoint = resolve(value);
    else if (key == "axis") cfg.axis = resolve(value);
    else if (key == "beam_width") cfg.plan.beam_width = number(value);
    else if (key == "depth") cfg.plan.depth = number(value);
    else if (key == "max_depth") cfg.max_depth = number(value);
    else if (key == "adversarial") {
      if (!parse_bool(value, cfg.plan.adversarial_mode)) fail("expected true/false");
    } else if (key == "paper_literal") {
      if (!parse_bool(value, cfg.plan.paper_literal_mode)) fail("expected true/false");
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (cfg.checkpoint.empty()) throw Error(ErrorCode::kConfig, "engine config: checkpoint is required");
  if (cfg.axis.empty()) throw Error(ErrorCode::kConfig, "engine config: axis is required");
  cfg.validate();
  return cfg;
}

EngineConfig load_engine_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read engine config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_engine_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

struct Session::Impl {
  std::shared_ptr<const plan::PositionEmbedder> embedder;
  plan::AdvantageAxis axis;
  EngineOptions opt;

  Position root = Position::start();
  std::vector<Position> history;

  std::ostream* out = nullptr;
  std::mutex out_mu;

  std::thread worker;
  std::atomic<bool> stop{false};
  std::atomic<bool> searching{false};
  bool pending_infinite = false;
  std::mutex stop_mu;
  std::condition_variable stop_cv;
  std::vector<double> seconds_per_depth;  // index = depth

  void say(const std::string& line) {
    std::lock_guard<std::mutex> lock(out_mu);
    *out << line << '\n';
    out->flush();
  }

  void join() {
    if (worker.joinable()) worker.join();
    searching = false;
  }

  void calibrate() {
    if (!seconds_per_depth.empty()) return;
    seconds_per_depth.assign(opt.max_depth + 1, 0.0);
    if (opt.fixed_seconds_per_ply > 0) {
      for (int d = 1; d <= opt.max_depth; ++d) seconds_per_depth[d] = d * opt.fixed_seconds_per_ply;
      return;
    }
    // Time depth 1 and 2 on the probes; each extra ply adds about one more
    // level of the same width, so costs extrapolate linearly from there.
    double t[3] = {0, 0, 0};
    for (int d = 1; d <= std::min(2, opt.max_depth); ++d) {
      plan::PlanConfig pc = opt.plan;
      pc.depth = d;
      auto start = std::chrono::steady_clock::now();
      for (const char* fen : kProbes) plan::search(*embedder, axis, Position::from_fen(fen), {}, pc);
      t[d] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
             std::size(kProbes);
    }
    const double step = opt.max_depth >= 2 ? std::max(t[2] - t[1], t[1]) : t[1];
    for (int d = 1; d <= opt.max_depth; ++d) seconds_per_depth[d] = t[1] + (d - 1) * step;
  }

  int depth_for_movetime(long ms) {
    calibrate();
    const double budget = 0.8 * ms / 1000.0;
    int best = 1;
    for (int d = 1; d <= opt.max_depth; ++d)
      if (seconds_per_depth[d] <= budget) best = d;
    return best;
  }

  void cmd_uci() {
    say("id name " + opt.name);
    say("id author " + opt.author);
    say("option name BeamWidth type spin default " + std::to_string(opt.plan.beam_width) + " min 1 max 64");
    say("option name Depth type spin default " + std::to_string(opt.plan.depth) + " min 1 max " +
        std::to_string(opt.max_depth));
    say(std::string("option name AdversarialMode type check default ") +
        (opt.plan.adversarial_mode ? "true" : "false"));
    say(std::string("option name PaperLiteralMode type check default ") +
        (opt.plan.paper_literal_mode ? "true" : "false"));
    // Pondering, multi-PV and hash tables are not supported; fixed values.
    say("option name Ponder type check default false");
    say("option name MultiPV type spin default 1 min 1 max 1");
    say("option name Hash type spin default 1 min 1 max 1");
    say("uciok");
  }

  void cmd_setoption(const std::vector<std::string>& w) {
    // setoption name <id...> [value <x...>]
    auto name_it = std::find(w.begin(), w.end(), "name");
    auto value_it = std::find(w.begin(), w.end(), "value");
    if (name_it == w.end() || name_it + 1 == w.end() || (value_it != w.end() && value_it < name_it)) {
      say("info string malformed setoption");
      return;
    }
    std::string name, value;
    for (auto it = name_it + 1; it != value_it && it != w.end(); ++it) name += (name.empty() ? "" : " ") + *it;
    if (value_it != w.end())
      for (auto it = value_it + 1; it != w.end(); ++it) value += (value.empty() ? "" : " ") + *it;
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(), ::tolower);
    if (key == "beamwidth") {
      auto v = to_long(value);
      if (!v || *v < 1 || *v > 64) return say("info string BeamWidth must be an integer in [1, 64]");
      opt.plan.beam_width = static_cast<int>(*v);
    } else if (key == "depth") {
      auto v = to_long(value);
      if (!v || *v < 1 || *v > opt.max_depth)
        return say("info string Depth must be an integer in [1, " + std::to_string(opt.max_depth) + "]");
      opt.plan.depth = static_cast<int>(*v);
    } else if (key == "adversarialmode") {
      if (!parse_bool(value, opt.plan.adversarial_mode)) return say("info string AdversarialMode expects true/false");
    } else if (key == "paperliteralmode") {
      if (!parse_bool(value, opt.plan.paper_literal_mode)) return say("info string PaperLiteralMode expects true/false");
    } else if (key == "ponder" || key == "multipv" || key == "hash") {
      say("info string option " + name + " is not supported");
    } else {
      say("info string unknown option " + name);
    }
    seconds_per_depth.clear();
  }

  void cmd_position(const std::vector<std::string>& w) {
    std::size_t i = 1;
    Position pos;
    try {
      if (i < w.size() && w[i] == "startpos") {
        pos = Position::start();
        ++i;
      } else if (i < w.size() && w[i] == "fen") {
        std::string fen;
        std::size_t j = i + 1;
        for (; j < w.size() && w[j] != "moves"; ++j) fen += (fen.empty() ? "" : " ") + w[j];
        pos = Position::from_fen(fen);
        i = j;
      } else {
        say("info string position expects startpos or fen");
        return;
      }
    } catch (const Error& e) {
      say(std::string("info string invalid position: ") + e.what());
      return;
    }
    std::vector<Position> hist;
    if (i < w.size()) {
      if (w[i] != "moves") {
        say("info string expected 'moves' after position");
        return;
      }
      for (++i; i < w.size(); ++i) {
        auto m = chess::parse_uci(pos, w[i]);
        if (!m) {
          say("info string illegal move " + w[i] + " in position command; position unchanged");
          return;
        }
        hist.push_back(pos);
        pos = chess::apply_move_unchecked(pos, *m);
      }
    }
    root = pos;
    history = std::move(hist);
  }

  void cmd_go(const std::vector<std::string>& w) {
    plan::PlanConfig pc = opt.plan;
    std::optional<int> depth;
    long movetime = -1;
    bool infinite = false;
    long wtime = -1, btime = -1, winc = 0, binc = 0, movestogo = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
      auto next_num = [&]() -> std::optional<long> {
        if (i + 1 >= w.size()) return std::nullopt;
        return to_long(w[++i]);
      };
      const std::string& k = w[i];
      if (k == "depth") {
        auto v = next_num();
        if (!v || *v < 1) return say("info string go depth expects a positive integer"), emit_fallback();
        depth = static_cast<int>(std::min<long>(*v, opt.max_depth));
      } else if (k == "movetime") {
        auto v = next_num();
        if (!v || *v < 1) return say("info string go movetime expects a positive integer"), emit_fallback();
        movetime = *v;
      } else if (k == "wtime" || k == "btime" || k == "winc" || k == "binc" || k == "movestogo") {
        auto v = next_num();
        if (!v) return say("info string go " + k + " expects an integer"), emit_fallback();
        (k == "wtime" ? wtime : k == "btime" ? btime : k == "winc" ? winc : k == "binc" ? binc : movestogo) = *v;
      } else if (k == "infinite") {
        infinite = true;
      } else if (k == "ponder" || k == "searchmoves") {
        say("info string go " + k + " is not supported; ignored");
      } else if (k == "nodes" || k == "mate") {
        say("info string go " + k + " is not supported; ignored");
        if (i + 1 < w.size()) ++i;
      } else {
        say("info string unknown go parameter " + k);
      }
    }
    const bool white = root.side_to_move() == chess::Color::kWhite;
    const long clock = white ? wtime : btime;
    if (movetime < 0 && clock >= 0) {
      const long inc = white ? winc : binc;
      movetime = std::max<long>(1, clock / (movestogo > 0 ? movestogo + 1 : 30) + inc / 2);
    }
    if (depth) pc.depth = *depth;
    else if (infinite) pc.depth = opt.max_depth;
    else if (movetime > 0) pc.depth = depth_for_movetime(movetime);

    if (chess::legal_moves(root).empty()) {
      say("info string no legal moves");
      say("bestmove 0000");
      return;
    }
    stop = false;
    searching = true;
    pending_infinite = infinite;
    Position r = root;
    std::vector<Position> h = history;
    worker = std::thread([this, r, h, pc, movetime, infinite]() {
      std::atomic<bool> done{false};
      std::thread timer;
      std::mutex tm;
      std::condition_variable tcv;
      if (movetime > 0 && !infinite) {
        timer = std::thread([&] {
          std::unique_lock<std::mutex> lock(tm);
          if (!tcv.wait_for(lock, std::chrono::milliseconds(movetime * 95 / 100), [&] { return done.load(); }))
            stop = true;
        });
      }
      std::string best;
      try {
        auto res = plan::search(*embedder, axis, r, h, pc, &stop);
        // Utility is a cosine; reported as centi-cosine so GUIs have a number.
        std::ostringstream info;
        info << "info depth " << res.completed_depth << " score cp " << std::lround(res.utility * 100) << " pv";
        for (auto m : res.line) info << ' ' << chess::to_uci(m);
        say(info.str());
        best = chess::to_uci(res.best);
      } catch (const std::exception& e) {
        say(std::string("info string search failed: ") + e.what());
        best = chess::to_uci(chess::legal_moves(r).front());
      }
      {
        std::lock_guard<std::mutex> lock(tm);
        done = true;
      }
      tcv.notify_all();
      if (timer.joinable()) timer.join();
      if (infinite) wait_for_stop();
      say("bestmove " + best);
    });
  }

  // "go infinite" must not answer before "stop" or "quit".
  void wait_for_stop() {
    std::unique_lock<std::mutex> lock(stop_mu);
    stop_cv.wait(lock, [&] { return stop.load(); });
  }

  void request_stop() {
    {
      std::lock_guard<std::mutex> lock(stop_mu);
      stop = true;
    }
    stop_cv.notify_all();
  }

  // A go command that cannot be parsed still owes exactly one bestmove.
  void emit_fallback() {
    auto moves = chess::legal_moves(root);
    say("bestmove " + (moves.empty() ? std::string("0000") : chess::to_uci(moves.front())));
  }

  void run(std::istream& in, std::ostream& o) {
    out = &o;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto w = split_words(line);
      if (w.empty()) continue;
      const std::string& c = w[0];
      if (c == "isready") {
        say("readyok");
        continue;
      }
      if (c == "stop") {
        request_stop();
        join();
        continue;
      }
      if (c == "quit") break;
      // Everything else waits for a running search to finish; an infinite
      // search only finishes on "stop", so anything else implies one.
      if (searching && pending_infinite) request_stop();
      join();
      if (c == "uci") cmd_uci();
      else if (c == "ucinewgame") {
        root = Position::start();
        history.clear();
      } else if (c == "setoption") cmd_setoption(w);
      else if (c == "position") cmd_position(w);
      else if (c == "go") cmd_go(w);
      else if (c == "debug" || c == "register" || c == "ponderhit") {
        // accepted and ignored
      } else {
        say("info string unknown command: " + c);
      }
    }
    request_stop();
    join();
  }
};

Session::Session(std::shared_ptr<const plan::PositionEmbedder> embedder, plan::AdvantageAxis axis,
                 EngineOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!embedder) throw Error(ErrorCode::kInvalidArgument, "session: embedder is required");
  if (embedder->dim() != axis.dim()) throw Error(ErrorCode::kShape, "session: embedder and axis dimensions differ");
  options.plan.validate();
  impl_->embedder = std::move(embedder);
  impl_->axis = std::move(axis);
  impl_->opt = std::move(options);
}

Session::~Session() {
  impl_->request_stop();
  impl_->join();
}

void Session::run(std::istream& in, std::ostream& out) { impl_->run(in, out); }

}  // namespace lp::uci
