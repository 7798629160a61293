#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "plain/dataset.hpp"
#include "plain/graph.hpp"
#include "plain/network.hpp"
#include "plain/propagation.hpp"
#include "plain/types.hpp"

namespace plain {

enum class VariantKind { PLAIN, DNN_ONLY, NO_LABEL_SIM, NO_INSTANCE_SIM, TWO_STAGE };

VariantKind variant_from_string(const std::string& name);
std::string to_string(VariantKind kind);

struct EpochRecord {
  int epoch = 0;
  double deep_loss = 0.0;           // mean mini-batch loss over the epoch
  double prop_objective_start = 0.0;
  double prop_objective_end = 0.0;
};

struct TrainState {
  int epoch = 0;
  NetworkParams params;
  Matrix z;  // pseudo-label matrix, n x L
  std::vector<EpochRecord> history;
  double training_seconds = 0.0;     // batch updates
  double propagation_seconds = 0.0;  // full forward + propagation steps
};

struct TrainConfig {
  PropagationConfig prop;
  OptimizerConfig opt;
  LossKind loss = LossKind::BCE;
  LossOptions loss_opts;
  int epochs = 100;
  bool full_batch = false;          // one whole-dataset gradient step per epoch
  bool propagate_on_logits = false; // feed raw logits instead of sigmoid outputs
  std::uint64_t seed = 0;
};

/// Called after every epoch with the live state; used for curve logging.
using EpochCallback = std::function<void(const TrainState&)>;

/// Alternating loop: per epoch, mini-batch updates of the network against the
/// current pseudo-labels, a full forward pass, then propagation steps on Z.
/// Z starts at the candidate matrix and persists across epochs.
/// Variants: DNN_ONLY trains on Z = Y with no propagation; NO_LABEL_SIM and
/// NO_INSTANCE_SIM zero beta and alpha respectively; TWO_STAGE first runs
/// propagation to convergence against Yhat = Y, then fits the frozen Z.
TrainState train(const Dataset& trainset, const NormalizedLaplacian& lx,
                 const NormalizedLaplacian& ly, const TrainConfig& cfg,
                 VariantKind variant = VariantKind::PLAIN,
                 const EpochCallback& on_epoch = nullptr);

/// Pure forward scoring of unseen rows; the graphs play no role here.
Matrix predict(const NetworkParams& params, const Matrix& features);

}  // namespace plain
