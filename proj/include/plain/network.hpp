#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "plain/types.hpp"

namespace plain {

enum class LossKind { MSE, MAE, BCE, PMSE };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

struct LayerDims {
  Index in = 0, h1 = 0, h2 = 0, out = 0;
};

/// Hidden widths by label count: [64,64] below 64 labels, [256,256] below
/// 256, [512,512] otherwise.
LayerDims default_dims(Index feature_dim, Index label_count);

/// Three fully-connected layers d -> h1 -> h2 -> L with rectifier hidden
/// activations and raw logit outputs.
struct NetworkParams {
  Matrix w1, w2, w3;  // h1 x d, h2 x h1, L x h2
  Vector b1, b2, b3;

  LayerDims dims() const {
    return {w1.cols(), w1.rows(), w2.rows(), w3.rows()};
  }
  NetworkParams& operator+=(const NetworkParams& other);
  NetworkParams& operator*=(double s);
  double squared_norm() const;
};

struct OptimizerConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-5;  // applied to weights, not biases
  int batch_size = 128;
  std::uint64_t seed = 0;
};

struct LossOptions {
  // With the switch on, MSE/MAE act on raw logits (the unbounded variant);
  // off, they act on sigmoid outputs and MSE coincides with PMSE.
  bool mse_on_logits = true;
};

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
NetworkParams init_params(const LayerDims& dims, std::uint64_t seed);

struct ForwardPass {
  Matrix h1, h2;         // post-rectifier hidden activations
  Matrix logits;         // B x L
  Matrix prediction;     // sigmoid(logits), entries in (0,1)
};

ForwardPass forward(const NetworkParams& params, const Matrix& x_batch);

/// Mean over the batch of the per-example loss (summed over labels).
/// BCE is evaluated in the numerically stable logit form.
double loss_value(LossKind kind, const ForwardPass& fwd, const Matrix& z_batch,
                  const LossOptions& opts = {});

/// Exact gradient of loss_value with respect to the parameters.
NetworkParams backward(const NetworkParams& params, const Matrix& x_batch,
                       const Matrix& z_batch, LossKind kind,
                       const LossOptions& opts = {});

/// Same, reusing an existing forward pass over x_batch.
NetworkParams backward(const NetworkParams& params, const ForwardPass& fwd,
                       const Matrix& x_batch, const Matrix& z_batch,
                       LossKind kind, const LossOptions& opts = {});

/// theta <- theta - lr * (grad + weight_decay * theta), decay on weights only.
void sgd_step(NetworkParams& params, const NetworkParams& grads,
              const OptimizerConfig& cfg);

/// Versioned text checkpoint: dims header plus flat parameter arrays.
void save_params(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace plain
