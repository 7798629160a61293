#include "plain/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace plain {

VariantKind variant_from_string(const std::string& name) {
  if (name == "plain") return VariantKind::PLAIN;
  if (name == "dnn") return VariantKind::DNN_ONLY;
  if (name == "no-label-sim") return VariantKind::NO_LABEL_SIM;
  if (name == "no-instance-sim") return VariantKind::NO_INSTANCE_SIM;
  if (name == "two-stage") return VariantKind::TWO_STAGE;
  throw DataError("unknown variant '" + name +
                  "' (expected plain, dnn, no-label-sim, no-instance-sim or two-stage)");
}

std::string to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::PLAIN: return "plain";
    case VariantKind::DNN_ONLY: return "dnn";
    case VariantKind::NO_LABEL_SIM: return "no-label-sim";
    case VariantKind::NO_INSTANCE_SIM: return "no-instance-sim";
    case VariantKind::TWO_STAGE: return "two-stage";
  }
  return "?";
}

namespace {

/// Stage-one propagation of the two-stage variant: descend until the relative
/// objective change drops below 1e-6 or a step cap is reached.
Matrix propagate_to_convergence(Matrix z, const Matrix& y,
                                const NormalizedLaplacian& lx,
                                const NormalizedLaplacian& ly,
                                PropagationConfig cfg) {
  constexpr int kMaxSteps = 10000;
  constexpr double kRelTol = 1e-6;
  const bool normalize_after = cfg.normalize;
  cfg.normalize = false;
  cfg.steps = 1;
  double prev = propagation_objective(z, y, y, lx, ly, cfg);
  for (int t = 0; t < kMaxSteps; ++t) {
    z = propagate(std::move(z), y, y, lx, ly, cfg);
    double cur = propagation_objective(z, y, y, lx, ly, cfg);
    if (std::abs(prev - cur) <= kRelTol * std::max(1.0, std::abs(prev))) break;
    prev = cur;
  }
  return normalize_after ? minmax_normalize_columns(std::move(z)) : z;
}

}  // namespace

TrainState train(const Dataset& trainset, const NormalizedLaplacian& lx,
                 const NormalizedLaplacian& ly, const TrainConfig& cfg,
                 VariantKind variant, const EpochCallback& on_epoch) {
  trainset.validate();
  const Index n = trainset.meta.n;
  const Index L = trainset.meta.L;
  if (lx.dim() != n) throw DataError("train: instance Laplacian dim mismatch");
  if (ly.dim() != L) throw DataError("train: label Laplacian dim mismatch");

  const Matrix y = trainset.candidates.cast<double>();
  PropagationConfig prop = cfg.prop;
  if (variant == VariantKind::NO_LABEL_SIM) prop.beta = 0.0;
  if (variant == VariantKind::NO_INSTANCE_SIM) prop.alpha = 0.0;

  TrainState state;
  state.z = y;
  state.params = init_params(default_dims(trainset.meta.d, L),
                             mix_seed(cfg.seed, 0x1217));

  if (variant == VariantKind::TWO_STAGE)
    state.z = propagate_to_convergence(state.z, y, lx, ly, prop);

  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x51ffe));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  const int batch_size = cfg.full_batch ? static_cast<int>(n)
                                        : std::min<int>(cfg.opt.batch_size, n);
  if (batch_size < 1) throw DataError("batch size must be positive");

  using clock = std::chrono::steady_clock;
  Matrix x_batch, z_batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (!cfg.full_batch) std::shuffle(order.begin(), order.end(), shuffle_rng);

    const auto t0 = clock::now();
    double loss_sum = 0.0;
    int batches = 0;
    for (Index start = 0; start < n; start += batch_size) {
      const Index rows = std::min<Index>(batch_size, n - start);
      x_batch.resize(rows, trainset.meta.d);
      z_batch.resize(rows, L);
      for (Index r = 0; r < rows; ++r) {
        x_batch.row(r) = trainset.features.row(order[start + r]);
        z_batch.row(r) = state.z.row(order[start + r]);
      }
      ForwardPass fwd = forward(state.params, x_batch);
      loss_sum += loss_value(cfg.loss, fwd, z_batch, cfg.loss_opts);
      NetworkParams grads =
          backward(state.params, fwd, x_batch, z_batch, cfg.loss, cfg.loss_opts);
      sgd_step(state.params, grads, cfg.opt);
      ++batches;
    }
    if (!std::isfinite(loss_sum))
      throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    const auto t1 = clock::now();
    state.training_seconds += std::chrono::duration<double>(t1 - t0).count();

    EpochRecord record;
    record.epoch = epoch;
    record.deep_loss = loss_sum / std::max(batches, 1);

    if (variant != VariantKind::DNN_ONLY && variant != VariantKind::TWO_STAGE) {
      ForwardPass full = forward(state.params, trainset.features);
      const Matrix& yhat = cfg.propagate_on_logits ? full.logits : full.prediction;
      PropagationTrace trace;
      trace.per_step = false;
      state.z = propagate(std::move(state.z), yhat, y, lx, ly, prop, &trace);
      record.prop_objective_start = trace.objectives.front();
      record.prop_objective_end = trace.objectives.back();
      state.propagation_seconds +=
          std::chrono::duration<double>(clock::now() - t1).count();
    }

    state.epoch = epoch;
    state.history.push_back(record);
    if (on_epoch) on_epoch(state);
  }
  return state;
}

Matrix predict(const NetworkParams& params, const Matrix& features) {
  return forward(params, features).prediction;
}

}  // namespace plain
