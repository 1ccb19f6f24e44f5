#include "latentplan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "latentplan/error.hpp"

namespace lp::data {

namespace {

constexpr std::size_t kMaxWarnings = 20;

bool parse_probability(std::string_view text, double& out) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && end == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

Dataset ingest(std::istream& in, const IngestOptions& options, IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = {};
  Dataset ds;
  auto skip = [&](std::size_t line_no, const std::string& why) {
    ++rep.skipped;
    if (rep.warnings.size() < kMaxWarnings)
      rep.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    ++rep.rows;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      skip(line_no, "missing tab separator");
      continue;
    }
    double p;
    if (!parse_probability(std::string_view(line).substr(tab + 1), p)) {
      skip(line_no, "unparsable probability");
      continue;
    }
    if (p < 0.0 || p > 1.0) {
      skip(line_no, "probability outside [0, 1]");
      continue;
    }
    AnnotatedPosition row;
    try {
      row.position = chess::Position::from_fen(std::string_view(line).substr(0, tab));
      row.tokens = tokenize(row.position);
    } catch (const Error& e) {
      skip(line_no, e.what());
      continue;
    }
    bool black = row.position.side_to_move() == chess::Color::kBlack;
    row.p_white = (options.frame == ProbabilityFrame::kMover && black) ? 1.0 - p : p;
    ds.push_back(std::move(row));
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read error while ingesting");
  rep.accepted = ds.size();
  if (options.shuffle) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(ds.begin(), ds.end(), rng);
  }
  return ds;
}

Dataset ingest(const std::string& path, const IngestOptions& options, IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path);
  return ingest(in, options, report);
}

void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write dataset " + path);
  char buf[32];
  for (const auto& row : ds) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, row.p_white);
    out << row.position.fen() << '\t' << std::string_view(buf, end - buf) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing dataset " + path);
}

void split(const Dataset& ds, double holdout_fraction, Dataset& train, Dataset& holdout) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "holdout fraction must be in [0, 1)");
  auto n_hold = static_cast<std::size_t>(std::llround(holdout_fraction * ds.size()));
  train.assign(ds.begin(), ds.end() - n_hold);
  holdout.assign(ds.end() - n_hold, ds.end());
}

PositiveIndex::PositiveIndex(const std::vector<double>& p, double delta) : delta_(delta) {
  const std::size_t n = p.size();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  rank_.resize(n);
  for (std::size_t r = 0; r < n; ++r) rank_[order_[r]] = r;
  lo_.resize(n);
  hi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = rank_[i];
    const double pi = p[i];
    if (!(delta > 0)) {
      lo_[i] = r;
      hi_[i] = r + 1;
      continue;
    }
    // Predicate is monotone on each side of r in sorted order.
    auto left = std::partition_point(order_.begin(), order_.begin() + r, [&](std::size_t j) {
      return !is_positive_pair(pi, p[j], delta);
    });
    auto right = std::partition_point(order_.begin() + r + 1, order_.end(), [&](std::size_t j) {
      return is_positive_pair(pi, p[j], delta);
    });
    lo_[i] = static_cast<std::size_t>(left - order_.begin());
    hi_[i] = static_cast<std::size_t>(right - order_.begin());
  }
  set_min_positives(min_positives_);
}

void PositiveIndex::set_min_positives(std::size_t n) {
  min_positives_ = n;
  anchors_.clear();
  for (std::size_t i = 0; i < rank_.size(); ++i)
    if (count(i) >= n && count(i) > 0) anchors_.push_back(i);
}

std::size_t PositiveIndex::neighbour(std::size_t i, std::size_t k) const {
  std::size_t r = lo_[i] + k;
  if (r >= rank_[i]) ++r;
  return order_[r];
}

std::vector<std::size_t> PositiveIndex::neighbours(std::size_t i) const {
  std::vector<std::size_t> out;
  out.reserve(count(i));
  for (std::size_t k = 0; k < count(i); ++k) out.push_back(neighbour(i, k));
  std::sort(out.begin(), out.end());
  return out;
}

PositiveIndex build_positive_index(const Dataset& ds, double delta) {
  std::vector<double> p;
  p.reserve(ds.size());
  for (const auto& row : ds) p.push_back(row.p_white);
  return PositiveIndex(p, delta);
}

std::vector<std::uint8_t> positive_mask(const std::vector<double>& p, double delta) {
  const std::size_t n = p.size();
  std::vector<std::uint8_t> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && is_positive_pair(p[i], p[j], delta)) mask[i * n + j] = 1;
  return mask;
}

TrainBatch sample_batch(const Dataset& ds, const PositiveIndex& index, std::mt19937_64& rng,
                        const BatchShape& shape) {
  if (ds.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot sample from an empty dataset");
  if (index.size() != ds.size())
    throw Error(ErrorCode::kInvalidArgument, "positive index was built for a different dataset");
  if (shape.groups < 0 || shape.positives_per_anchor < 0 || shape.fill < 0)
    throw Error(ErrorCode::kInvalidArgument, "negative batch shape");
  const auto need = static_cast<std::size_t>(shape.positives_per_anchor);
  if (shape.groups > 0 && need > index.min_positives())
    throw Error(ErrorCode::kInvalidArgument, "index anchor threshold below positives per anchor");
  if (shape.groups > 0 && index.anchors().empty())
    throw Error(ErrorCode::kDegenerate, "no position has enough delta-neighbours to act as an anchor");

  std::uniform_int_distribution<std::size_t> any_row(0, ds.size() - 1);
  TrainBatch batch;
  batch.indices.reserve(shape.size());
  std::vector<std::size_t> picks;
  for (int g = 0; g < shape.groups; ++g) {
    // Drawing uniformly over rows and redrawing ineligible ones is the same
    // as drawing uniformly over eligible anchors.
    std::size_t anchor;
    do {
      anchor = any_row(rng);
    } while (index.count(anchor) < index.min_positives() || index.count(anchor) == 0);
    batch.indices.push_back(anchor);
    std::uniform_int_distribution<std::size_t> pick(0, index.count(anchor) - 1);
    picks.clear();
    while (picks.size() < need) {
      std::size_t k = pick(rng);
      if (std::find(picks.begin(), picks.end(), k) == picks.end()) picks.push_back(k);
    }
    for (std::size_t k : picks) batch.indices.push_back(index.neighbour(anchor, k));
  }
  for (int f = 0; f < shape.fill; ++f) batch.indices.push_back(any_row(rng));

  batch.p_white.reserve(batch.indices.size());
  for (std::size_t i : batch.indices) batch.p_white.push_back(ds[i].p_white);
  batch.mask = positive_mask(batch.p_white, index.delta());
  return batch;
}

}  // namespace lp::data
