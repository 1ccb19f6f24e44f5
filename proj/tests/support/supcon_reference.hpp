#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "latentplan/dataset.hpp"
#include "latentplan/encoder.hpp"

namespace lp::testing {

// Literal transcription of the formula, no shared code with supcon_loss.
inline double reference_loss(const nn::Matrix<double>& z, const std::vector<std::uint8_t>& mask, double tau) {
  const int n = static_cast<int>(z.rows());
  double total = 0;
  int anchors = 0;
  for (int i = 0; i < n; ++i) {
    int np = 0;
    for (int p = 0; p < n; ++p) np += mask[i * n + p];
    if (np == 0) continue;
    double li = 0;
    for (int p = 0; p < n; ++p) {
      if (!mask[i * n + p]) continue;
      double num = std::exp(z.row(i).dot(z.row(p)) / tau);
      double den = 0;
      for (int a = 0; a < n; ++a)
        if (a != i) den += std::exp(z.row(i).dot(z.row(a)) / tau);
      li += -std::log(num / den);
    }
    total += li / np;
    ++anchors;
  }
  return anchors ? total / anchors : 0.0;
}

// Central difference of reference_loss in z(i, j).
inline double reference_partial(const nn::Matrix<double>& z, const std::vector<std::uint8_t>& mask, double tau, int i,
                                int j, double h) {
  nn::Matrix<double> zp = z, zm = z;
  zp(i, j) += h;
  zm(i, j) -= h;
  return (reference_loss(zp, mask, tau) - reference_loss(zm, mask, tau)) / (2 * h);
}

inline nn::Matrix<double> random_unit_rows(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  nn::Matrix<double> z(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z(i, j) = g(rng);
    z.row(i).normalize();
  }
  return z;
}

// Labels on a 0.1 grid, so some rows share a label and some do not.
inline std::vector<std::uint8_t> random_mask(int n, std::mt19937_64& rng) {
  std::vector<double> p(n);
  std::uniform_int_distribution<int> bucket(0, 3);
  for (double& v : p) v = bucket(rng) * 0.1;
  return data::positive_mask(p, 0.05);
}

}  // namespace lp::testing
