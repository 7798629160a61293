#pragma once

#include <vector>

#include "plain/graph.hpp"
#include "plain/types.hpp"

namespace plain {

struct PropagationConfig {
  double eta = 1.0;     // candidate-consistency weight, >= 0
  double alpha = 0.01;  // instance regularizer weight, >= 0
  double beta = 0.01;   // label regularizer weight, >= 0
  double gamma = 0.01;  // gradient step size, > 0
  int steps = 200;      // gradient steps per call, >= 0
  bool normalize = true;  // column-wise min-max rescale after the steps
};

/// Objective values along the descent. With per_step set the value is
/// recorded before the first step and after every step; otherwise only the
/// initial and final values (both prior to normalization) are kept.
struct PropagationTrace {
  bool per_step = true;
  std::vector<double> objectives;
};

/// 1/2 |Z - Yhat|_F^2 + eta/2 |Z - Y|_F^2
///   + alpha/2 tr(Z^T Lx Z) + beta/2 tr(Z Ly Z^T)
double propagation_objective(const Matrix& z, const Matrix& yhat,
                             const Matrix& y, const NormalizedLaplacian& lx,
                             const NormalizedLaplacian& ly,
                             const PropagationConfig& cfg);

/// (1 + eta) Z + alpha Lx Z + beta Z Ly - (Yhat + eta Y)
Matrix propagation_gradient(const Matrix& z, const Matrix& yhat,
                            const Matrix& y, const NormalizedLaplacian& lx,
                            const NormalizedLaplacian& ly,
                            const PropagationConfig& cfg);

/// Runs cfg.steps gradient-descent steps at rate cfg.gamma, then (when
/// cfg.normalize) rescales each column to [0,1] by (z - min)/(max - min);
/// constant columns map to 0.5. Throws NumericalError when entries blow up,
/// which signals a divergent step size.
Matrix propagate(Matrix z, const Matrix& yhat, const Matrix& y,
                 const NormalizedLaplacian& lx, const NormalizedLaplacian& ly,
                 const PropagationConfig& cfg,
                 PropagationTrace* trace = nullptr);

/// Column-wise min-max rescale to [0,1]; constant columns map to 0.5.
Matrix minmax_normalize_columns(Matrix z);

}  // namespace plain
