#include "plain/network.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace plain {

namespace {

constexpr double kPredFloor = 1e-12;

Matrix sigmoid(const Matrix& x) {
  Matrix p = (1.0 + (-x.array()).exp()).inverse().matrix();
  // keep predictions strictly inside (0,1) even for huge logits
  return p.array().min(1.0 - kPredFloor).max(kPredFloor).matrix();
}

Matrix loss_dlogits(LossKind kind, const ForwardPass& fwd, const Matrix& z,
                    const LossOptions& opts) {
  const double inv_b = 1.0 / static_cast<double>(fwd.logits.rows());
  const auto& p = fwd.prediction.array();
  switch (kind) {
    case LossKind::BCE:
      return inv_b * (fwd.prediction - z);
    case LossKind::PMSE:
      return (2.0 * inv_b * (p - z.array()) * p * (1.0 - p)).matrix();
    case LossKind::MSE:
      if (opts.mse_on_logits) return 2.0 * inv_b * (fwd.logits - z);
      return (2.0 * inv_b * (p - z.array()) * p * (1.0 - p)).matrix();
    case LossKind::MAE: {
      Matrix diff = opts.mse_on_logits ? (fwd.logits - z).eval()
                                       : (fwd.prediction - z).eval();
      Matrix s = diff.array().sign().matrix();
      if (opts.mse_on_logits) return inv_b * s;
      return (inv_b * s.array() * p * (1.0 - p)).matrix();
    }
  }
  throw std::logic_error("unreachable loss kind");
}

}  // namespace

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mse") return LossKind::MSE;
  if (name == "mae") return LossKind::MAE;
  if (name == "bce") return LossKind::BCE;
  if (name == "pmse") return LossKind::PMSE;
  throw DataError("unknown loss '" + name + "' (expected mse, mae, bce or pmse)");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return "mse";
    case LossKind::MAE: return "mae";
    case LossKind::BCE: return "bce";
    case LossKind::PMSE: return "pmse";
  }
  return "?";
}

LayerDims default_dims(Index feature_dim, Index label_count) {
  Index h = label_count < 64 ? 64 : (label_count < 256 ? 256 : 512);
  return {feature_dim, h, h, label_count};
}

NetworkParams& NetworkParams::operator+=(const NetworkParams& other) {
  w1 += other.w1; w2 += other.w2; w3 += other.w3;
  b1 += other.b1; b2 += other.b2; b3 += other.b3;
  return *this;
}

NetworkParams& NetworkParams::operator*=(double s) {
  w1 *= s; w2 *= s; w3 *= s;
  b1 *= s; b2 *= s; b3 *= s;
  return *this;
}

double NetworkParams::squared_norm() const {
  return w1.squaredNorm() + w2.squaredNorm() + w3.squaredNorm() +
         b1.squaredNorm() + b2.squaredNorm() + b3.squaredNorm();
}

NetworkParams init_params(const LayerDims& dims, std::uint64_t seed) {
  if (dims.in < 1 || dims.h1 < 1 || dims.h2 < 1 || dims.out < 1)
    throw DataError("invalid network dims");
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Matrix& w, Index rows, Index cols, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    w.resize(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) w(r, c) = dist(rng);
  };
  NetworkParams params;
  fill(params.w1, dims.h1, dims.in, dims.in);
  fill(params.w2, dims.h2, dims.h1, dims.h1);
  fill(params.w3, dims.out, dims.h2, dims.h2);
  params.b1 = Vector::Zero(dims.h1);
  params.b2 = Vector::Zero(dims.h2);
  params.b3 = Vector::Zero(dims.out);
  return params;
}

ForwardPass forward(const NetworkParams& params, const Matrix& x_batch) {
  if (x_batch.cols() != params.w1.cols())
    throw DataError("forward: feature dim " + std::to_string(x_batch.cols()) +
                    " does not match network input " + std::to_string(params.w1.cols()));
  ForwardPass fwd;
  fwd.h1 = ((x_batch * params.w1.transpose()).rowwise() + params.b1.transpose())
               .cwiseMax(0.0);
  fwd.h2 = ((fwd.h1 * params.w2.transpose()).rowwise() + params.b2.transpose())
               .cwiseMax(0.0);
  fwd.logits = (fwd.h2 * params.w3.transpose()).rowwise() + params.b3.transpose();
  fwd.prediction = sigmoid(fwd.logits);
  return fwd;
}

double loss_value(LossKind kind, const ForwardPass& fwd, const Matrix& z_batch,
                  const LossOptions& opts) {
  if (z_batch.rows() != fwd.logits.rows() || z_batch.cols() != fwd.logits.cols())
    throw DataError("loss: target shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(fwd.logits.rows());
  switch (kind) {
    case LossKind::BCE: {
      // max(x,0) - x z + log(1 + exp(-|x|)), finite for any logit
      const auto& x = fwd.logits.array();
      auto bce = x.max(0.0) - x * z_batch.array() + (1.0 + (-x.abs()).exp()).log();
      return inv_b * bce.sum();
    }
    case LossKind::PMSE:
      return inv_b * (fwd.prediction - z_batch).squaredNorm();
    case LossKind::MSE:
      return inv_b * (opts.mse_on_logits ? (fwd.logits - z_batch).squaredNorm()
                                         : (fwd.prediction - z_batch).squaredNorm());
    case LossKind::MAE:
      return inv_b * (opts.mse_on_logits
                          ? (fwd.logits - z_batch).cwiseAbs().sum()
                          : (fwd.prediction - z_batch).cwiseAbs().sum());
  }
  throw std::logic_error("unreachable loss kind");
}

NetworkParams backward(const NetworkParams& params, const Matrix& x_batch,
                       const Matrix& z_batch, LossKind kind,
                       const LossOptions& opts) {
  return backward(params, forward(params, x_batch), x_batch, z_batch, kind, opts);
}

NetworkParams backward(const NetworkParams& params, const ForwardPass& fwd,
                       const Matrix& x_batch, const Matrix& z_batch,
                       LossKind kind, const LossOptions& opts) {
  Matrix dlogits = loss_dlogits(kind, fwd, z_batch, opts);

  NetworkParams g;
  g.w3.noalias() = dlogits.transpose() * fwd.h2;
  g.b3 = dlogits.colwise().sum().transpose();

  Matrix dh2 = (dlogits * params.w3).cwiseProduct(
      (fwd.h2.array() > 0.0).cast<double>().matrix());
  g.w2.noalias() = dh2.transpose() * fwd.h1;
  g.b2 = dh2.colwise().sum().transpose();

  Matrix dh1 = (dh2 * params.w2).cwiseProduct(
      (fwd.h1.array() > 0.0).cast<double>().matrix());
  g.w1.noalias() = dh1.transpose() * x_batch;
  g.b1 = dh1.colwise().sum().transpose();
  return g;
}

void sgd_step(NetworkParams& params, const NetworkParams& grads,
              const OptimizerConfig& cfg) {
  const double lr = cfg.learning_rate;
  const double wd = cfg.weight_decay;
  params.w1 -= lr * (grads.w1 + wd * params.w1);
  params.w2 -= lr * (grads.w2 + wd * params.w2);
  params.w3 -= lr * (grads.w3 + wd * params.w3);
  params.b1 -= lr * grads.b1;
  params.b2 -= lr * grads.b2;
  params.b3 -= lr * grads.b3;
}

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  LayerDims dims = params.dims();
  out << "plainnet 1\n"
      << dims.in << ' ' << dims.h1 << ' ' << dims.h2 << ' ' << dims.out << '\n';
  char buf[64];
  auto put = [&](const double* data, Index count) {
    for (Index i = 0; i < count; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", data[i]);
      out << buf << (i + 1 == count ? '\n' : ' ');
    }
  };
  put(params.w1.data(), params.w1.size());
  put(params.b1.data(), params.b1.size());
  put(params.w2.data(), params.w2.size());
  put(params.b2.data(), params.b2.size());
  put(params.w3.data(), params.w3.size());
  put(params.b3.data(), params.b3.size());
  if (!out) throw DataError("write failed for " + path.string());
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "plainnet" || version != 1)
    throw DataError(path.string() + ": not a version-1 checkpoint");
  LayerDims dims;
  in >> dims.in >> dims.h1 >> dims.h2 >> dims.out;
  if (!in || dims.in < 1 || dims.h1 < 1 || dims.h2 < 1 || dims.out < 1)
    throw DataError(path.string() + ": bad checkpoint dims");
  NetworkParams params;
  auto get = [&](Matrix& m, Index rows, Index cols) {
    m.resize(rows, cols);
    for (Index i = 0; i < m.size(); ++i)
      if (!(in >> m.data()[i])) throw DataError(path.string() + ": truncated checkpoint");
  };
  auto getv = [&](Vector& v, Index rows) {
    v.resize(rows);
    for (Index i = 0; i < v.size(); ++i)
      if (!(in >> v(i))) throw DataError(path.string() + ": truncated checkpoint");
  };
  get(params.w1, dims.h1, dims.in);
  getv(params.b1, dims.h1);
  get(params.w2, dims.h2, dims.h1);
  getv(params.b2, dims.h2);
  get(params.w3, dims.out, dims.h2);
  getv(params.b3, dims.out);
  return params;
}

}  // namespace plain
