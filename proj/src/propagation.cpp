#include "plain/propagation.hpp"

#include <cmath>

namespace plain {

namespace {

void check_shapes(const Matrix& z, const Matrix& yhat, const Matrix& y,
                  const NormalizedLaplacian& lx, const NormalizedLaplacian& ly) {
  if (z.rows() != yhat.rows() || z.cols() != yhat.cols() ||
      z.rows() != y.rows() || z.cols() != y.cols())
    throw DataError("propagation: Z, Yhat and Y must share shape");
  if (lx.dim() != z.rows())
    throw DataError("propagation: instance Laplacian dim mismatch");
  if (ly.dim() != z.cols())
    throw DataError("propagation: label Laplacian dim mismatch");
}

}  // namespace

double propagation_objective(const Matrix& z, const Matrix& yhat,
                             const Matrix& y, const NormalizedLaplacian& lx,
                             const NormalizedLaplacian& ly,
                             const PropagationConfig& cfg) {
  check_shapes(z, yhat, y, lx, ly);
  double value = 0.5 * (z - yhat).squaredNorm();
  value += 0.5 * cfg.eta * (z - y).squaredNorm();
  if (cfg.alpha != 0.0)
    value += 0.5 * cfg.alpha * z.cwiseProduct(lx.left_multiply(z)).sum();
  if (cfg.beta != 0.0)
    value += 0.5 * cfg.beta * z.cwiseProduct(ly.right_multiply(z)).sum();
  return value;
}

Matrix propagation_gradient(const Matrix& z, const Matrix& yhat,
                            const Matrix& y, const NormalizedLaplacian& lx,
                            const NormalizedLaplacian& ly,
                            const PropagationConfig& cfg) {
  check_shapes(z, yhat, y, lx, ly);
  Matrix grad = (1.0 + cfg.eta) * z - (yhat + cfg.eta * y);
  if (cfg.alpha != 0.0) grad.noalias() += cfg.alpha * lx.left_multiply(z);
  if (cfg.beta != 0.0) grad.noalias() += cfg.beta * ly.right_multiply(z);
  return grad;
}

Matrix minmax_normalize_columns(Matrix z) {
  for (Index j = 0; j < z.cols(); ++j) {
    double lo = z.col(j).minCoeff();
    double hi = z.col(j).maxCoeff();
    if (hi == lo)
      z.col(j).setConstant(0.5);
    else
      z.col(j) = (z.col(j).array() - lo) / (hi - lo);
  }
  return z;
}

Matrix propagate(Matrix z, const Matrix& yhat, const Matrix& y,
                 const NormalizedLaplacian& lx, const NormalizedLaplacian& ly,
                 const PropagationConfig& cfg, PropagationTrace* trace) {
  check_shapes(z, yhat, y, lx, ly);
  if (cfg.gamma <= 0.0) throw DataError("propagation step size gamma must be positive");
  if (cfg.steps < 0) throw DataError("propagation step count must be non-negative");

  if (trace) trace->objectives.push_back(propagation_objective(z, yhat, y, lx, ly, cfg));
  const Matrix pull = yhat + cfg.eta * y;  // constant across steps
  const double keep = 1.0 - cfg.gamma * (1.0 + cfg.eta);
  Matrix lxz, zly;
  for (int t = 0; t < cfg.steps; ++t) {
    // z <- z - gamma ((1 + eta) z + alpha Lx z + beta z Ly - pull)
    if (cfg.alpha != 0.0) lx.left_multiply_into(z, lxz);
    if (cfg.beta != 0.0) ly.right_multiply_into(z, zly);
    z = keep * z + cfg.gamma * pull;
    if (cfg.alpha != 0.0) z.noalias() -= (cfg.gamma * cfg.alpha) * lxz;
    if (cfg.beta != 0.0) z.noalias() -= (cfg.gamma * cfg.beta) * zly;
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > 1e6)
      throw NumericalError(
          "pseudo-label propagation diverged at step " + std::to_string(t + 1) +
          "; reduce the step size gamma");
    if (trace && trace->per_step)
      trace->objectives.push_back(propagation_objective(z, yhat, y, lx, ly, cfg));
  }
  if (trace && !trace->per_step && cfg.steps > 0)
    trace->objectives.push_back(propagation_objective(z, yhat, y, lx, ly, cfg));
  if (cfg.normalize) z = minmax_normalize_columns(std::move(z));
  return z;
}

}  // namespace plain
