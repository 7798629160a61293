#pragma once

// Reference implementations for cross-checking, deliberately written as
// direct dense formulas and exhaustive loops, independent of the library's
// sparse code paths.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "plain/types.hpp"

namespace oracle {

/// L = I - D^{-1/2} A D^{-1/2} from a dense affinity matrix; rows of
/// zero-degree nodes equal identity rows.
inline plain::Matrix dense_laplacian(const plain::Matrix& affinity) {
  const plain::Index n = affinity.rows();
  plain::Vector degree = affinity.rowwise().sum();
  plain::Matrix lap = plain::Matrix::Identity(n, n);
  for (plain::Index i = 0; i < n; ++i)
    for (plain::Index j = 0; j < n; ++j) {
      if (degree(i) <= 0.0 || degree(j) <= 0.0) continue;
      lap(i, j) -= affinity(i, j) / std::sqrt(degree(i) * degree(j));
    }
  return lap;
}

/// 1/2|Z-Yhat|^2 + eta/2|Z-Y|^2 + alpha/2 tr(Z^T Lx Z) + beta/2 tr(Z Ly Z^T)
/// evaluated with dense products and explicit traces.
inline double propagation_objective_dense(const plain::Matrix& z,
                                          const plain::Matrix& yhat,
                                          const plain::Matrix& y,
                                          const plain::Matrix& ax,
                                          const plain::Matrix& ay, double eta,
                                          double alpha, double beta) {
  plain::Matrix lx = dense_laplacian(ax);
  plain::Matrix ly = dense_laplacian(ay);
  double value = 0.5 * (z - yhat).squaredNorm() + 0.5 * eta * (z - y).squaredNorm();
  value += 0.5 * alpha * (z.transpose() * lx * z).trace();
  value += 0.5 * beta * (z * ly * z.transpose()).trace();
  return value;
}

/// Central finite differences of a scalar functional over one matrix.
template <typename F>
plain::Matrix finite_difference(plain::Matrix at, F&& f, double h = 1e-6) {
  plain::Matrix grad(at.rows(), at.cols());
  for (plain::Index i = 0; i < at.rows(); ++i)
    for (plain::Index j = 0; j < at.cols(); ++j) {
      const double saved = at(i, j);
      at(i, j) = saved + h;
      const double hi = f(at);
      at(i, j) = saved - h;
      const double lo = f(at);
      at(i, j) = saved;
      grad(i, j) = (hi - lo) / (2.0 * h);
    }
  return grad;
}

/// tr(Z^T L Z) through the weighted-difference identity
/// sum_{i<j} a_ij |z_i/sqrt(d_i) - z_j/sqrt(d_j)|^2, plus |z_i|^2 for
/// isolated nodes (identity-row convention).
inline double instance_trace_by_differences(const plain::Matrix& z,
                                            const plain::Matrix& affinity) {
  const plain::Index n = affinity.rows();
  plain::Vector degree = affinity.rowwise().sum();
  double total = 0.0;
  for (plain::Index i = 0; i < n; ++i) {
    if (degree(i) <= 0.0) {
      total += z.row(i).squaredNorm();
      continue;
    }
    for (plain::Index j = i + 1; j < n; ++j) {
      if (degree(j) <= 0.0 || affinity(i, j) == 0.0) continue;
      total += affinity(i, j) * (z.row(i) / std::sqrt(degree(i)) -
                                 z.row(j) / std::sqrt(degree(j)))
                                    .squaredNorm();
    }
  }
  return total;
}

inline bool eval_row_ok(const plain::IntMatrix& truth, plain::Index i) {
  int rel = truth.row(i).sum();
  return rel > 0 && rel < truth.cols();
}

/// Ranking loss by exhaustive pair enumeration.
inline double ranking_loss_brute(const plain::Matrix& scores,
                                 const plain::IntMatrix& truth) {
  double total = 0.0;
  int rows = 0;
  for (plain::Index i = 0; i < scores.rows(); ++i) {
    if (!eval_row_ok(truth, i)) continue;
    double bad = 0.0;
    long pairs = 0;
    for (plain::Index p = 0; p < scores.cols(); ++p)
      for (plain::Index q = 0; q < scores.cols(); ++q) {
        if (!(truth(i, p) == 1 && truth(i, q) == 0)) continue;
        ++pairs;
        if (scores(i, q) > scores(i, p)) bad += 1.0;
        if (scores(i, q) == scores(i, p)) bad += 0.5;
      }
    total += bad / static_cast<double>(pairs);
    ++rows;
  }
  return rows ? total / rows : 0.0;
}

/// Average precision by per-label rank recomputation.
inline double average_precision_brute(const plain::Matrix& scores,
                                      const plain::IntMatrix& truth) {
  double total = 0.0;
  int rows = 0;
  for (plain::Index i = 0; i < scores.rows(); ++i) {
    if (!eval_row_ok(truth, i)) continue;
    double sum = 0.0;
    int rel = 0;
    for (plain::Index p = 0; p < scores.cols(); ++p) {
      if (!truth(i, p)) continue;
      ++rel;
      // rank of p: labels scored strictly higher, plus earlier-indexed ties
      int rank = 1, rel_at_or_above = 0;
      for (plain::Index q = 0; q < scores.cols(); ++q) {
        if (q == p) continue;
        bool above = scores(i, q) > scores(i, p) ||
                     (scores(i, q) == scores(i, p) && q < p);
        if (above) {
          ++rank;
          if (truth(i, q)) ++rel_at_or_above;
        }
      }
      sum += static_cast<double>(rel_at_or_above + 1) / rank;
    }
    total += sum / rel;
    ++rows;
  }
  return rows ? total / rows : 0.0;
}

inline double hamming_loss_brute(const plain::Matrix& scores,
                                 const plain::IntMatrix& truth, double thr) {
  long bad = 0;
  for (plain::Index i = 0; i < scores.rows(); ++i)
    for (plain::Index j = 0; j < scores.cols(); ++j) {
      bool on = scores(i, j) > thr;
      if (on != (truth(i, j) == 1)) ++bad;
    }
  return static_cast<double>(bad) / (scores.rows() * scores.cols());
}

/// Rows drawn on the unit sphere.
inline plain::Matrix random_unit_rows(plain::Index n, plain::Index d,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  plain::Matrix x(n, d);
  for (plain::Index i = 0; i < n; ++i) {
    for (plain::Index j = 0; j < d; ++j) x(i, j) = gauss(rng);
    x.row(i) /= x.row(i).norm();
  }
  return x;
}

/// Dense symmetric non-negative affinity with zero diagonal.
inline plain::Matrix random_affinity(plain::Index n, double density,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  plain::Matrix a = plain::Matrix::Zero(n, n);
  for (plain::Index i = 0; i < n; ++i)
    for (plain::Index j = i + 1; j < n; ++j)
      if (unit(rng) < density) a(i, j) = a(j, i) = unit(rng);
  return a;
}

inline plain::Matrix random_matrix(plain::Index rows, plain::Index cols,
                                   std::uint64_t seed, double lo = -1.0,
                                   double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  plain::Matrix m(rows, cols);
  for (plain::Index i = 0; i < rows; ++i)
    for (plain::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline plain::IntMatrix random_binary(plain::Index rows, plain::Index cols,
                                      double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  plain::IntMatrix m(rows, cols);
  for (plain::Index i = 0; i < rows; ++i)
    for (plain::Index j = 0; j < cols; ++j) m(i, j) = unit(rng) < p ? 1 : 0;
  return m;
}

}  // namespace oracle
