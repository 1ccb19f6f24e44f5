#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentplan/planner.hpp"

namespace lp::viz {

// Affine map to the plane spanned by the top two principal components of a
// reference set. Fit once, reuse for every later projection.
struct Projection {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> basis;  // orthonormal
  std::array<double, 2> explained{};         // variance fractions

  int dim() const { return static_cast<int>(mean.size()); }
  std::array<double, 2> project(std::span<const float> z) const;
  // Direction only: the mean is not subtracted.
  std::array<double, 2> project_direction(std::span<const double> v) const;
};

// Rows are embeddings. Eigendecomposition of the centred covariance; each
// basis vector is signed so its first nonzero coordinate is positive. Throws
// lp::Error(kInvalidArgument) for fewer than 3 rows and lp::Error(kDegenerate)
// when the data has rank < 2.
Projection fit_projection(const nn::Matrix<float>& embeddings);

struct TrajectoryPoint {
  int ply = 0;
  std::string fen;
  double x = 0;
  double y = 0;
  double score = 0;  // cos(z, a)
  std::optional<double> p_white;
};

// One record per position, the start included. Throws
// lp::Error(kIllegalMove) naming the 1-based ply of the first illegal move.
std::vector<TrajectoryPoint> trajectory(const plan::PositionEmbedder& embedder, const plan::AdvantageAxis& axis,
                                        const Projection& projection, std::span<const chess::Move> moves,
                                        const chess::Position& start = chess::Position::start());

struct ScatterPoint {
  double x = 0;
  double y = 0;
  double p_white = 0.5;
};

void write_trajectory_tsv(std::ostream& out, std::span<const TrajectoryPoint> points);
// Self-contained SVG: arrows between consecutive positions, points coloured
// red (White favoured) to blue (Black favoured), and the projected axis.
void write_trajectory_svg(std::ostream& out, std::span<const TrajectoryPoint> points,
                          const Projection& projection, const plan::AdvantageAxis& axis,
                          const std::string& title = "latent trajectory");

void write_scatter_tsv(std::ostream& out, std::span<const ScatterPoint> points);
void write_scatter_svg(std::ostream& out, std::span<const ScatterPoint> points, const Projection& projection,
                       const plan::AdvantageAxis& axis, const std::string& title = "embedding projection");

}  // namespace lp::viz
