#include <Eigen/Eigenvalues>
#include <cmath>

#include "latentplan/error.hpp"
#include "latentplan/viz.hpp"

namespace lp::viz {

std::array<double, 2> Projection::project(std::span<const float> z) const {
  if (static_cast<int>(z.size()) != dim()) throw Error(ErrorCode::kShape, "projection: dimension mismatch");
  std::array<double, 2> out{0, 0};
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < z.size(); ++i) out[k] += (z[i] - mean[i]) * basis[k][i];
  return out;
}

std::array<double, 2> Projection::project_direction(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != dim()) throw Error(ErrorCode::kShape, "projection: dimension mismatch");
  std::array<double, 2> out{0, 0};
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < v.size(); ++i) out[k] += v[i] * basis[k][i];
  return out;
}

Projection fit_projection(const nn::Matrix<float>& embeddings) {
  if (embeddings.rows() < 3) throw Error(ErrorCode::kInvalidArgument, "projection needs at least 3 embeddings");
  if (embeddings.cols() < 2) throw Error(ErrorCode::kDegenerate, "projection needs at least 2 dimensions");
  Eigen::MatrixXd x = embeddings.cast<double>();
  Eigen::RowVectorXd mu = x.colwise().mean();
  x.rowwise() -= mu;
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::kNumerical, "projection: eigendecomposition failed");
  const auto& values = eig.eigenvalues();  // ascending
  const Eigen::Index d = values.size();
  const double total = values.sum();
  const double top = values(d - 1), second = values(d - 2);
  if (!(top > 1e-12) || !(second > 1e-9 * top))
    throw Error(ErrorCode::kDegenerate, "projection: embeddings span fewer than 2 dimensions");

  Projection p;
  p.mean.assign(mu.data(), mu.data() + mu.size());
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - k);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    p.basis[k].assign(v.data(), v.data() + v.size());
    p.explained[k] = values(d - 1 - k) / total;
  }
  return p;
}

std::vector<TrajectoryPoint> trajectory(const plan::PositionEmbedder& embedder, const plan::AdvantageAxis& axis,
                                        const Projection& projection, std::span<const chess::Move> moves,
                                        const chess::Position& start) {
  if (embedder.dim() != projection.dim() || axis.dim() != projection.dim())
    throw Error(ErrorCode::kShape, "trajectory: embedder, axis and projection dimensions differ");
  std::vector<chess::Position> positions{start};
  for (std::size_t i = 0; i < moves.size(); ++i) {
    auto legal = chess::legal_moves(positions.back());
    if (std::find(legal.begin(), legal.end(), moves[i]) == legal.end())
      throw Error(ErrorCode::kIllegalMove,
                  "trajectory: illegal move " + chess::to_uci(moves[i]) + " at ply " + std::to_string(i + 1));
    positions.push_back(chess::apply_move_unchecked(positions.back(), moves[i]));
  }
  // Each position is embedded on its own, as in a standalone lookup.
  std::vector<TrajectoryPoint> out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    auto z = embedder.embed(std::span<const chess::Position>(&positions[i], 1));
    std::span<const float> row(z.data(), static_cast<std::size_t>(z.cols()));
    auto xy = projection.project(row);
    out.push_back({static_cast<int>(i), positions[i].fen(), xy[0], xy[1], plan::cosine(row, axis), std::nullopt});
  }
  return out;
}

}  // namespace lp::viz
