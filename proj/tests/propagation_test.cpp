#include "plain/propagation.hpp"

#include <cmath>

#include "doctest.h"
#include "support/oracles.hpp"

using namespace plain;

namespace {

struct Problem {
  Matrix z, yhat, y;
  Matrix ax, ay;  // dense affinities for the oracle
  SparseSym gx, gy;
  NormalizedLaplacian lx, ly;
};

Problem random_problem(Index n, Index labels, std::uint64_t seed) {
  Problem p;
  p.z = oracle::random_matrix(n, labels, seed, 0.0, 1.0);
  p.yhat = oracle::random_matrix(n, labels, seed + 1, 0.0, 1.0);
  p.y = oracle::random_binary(n, labels, 0.4, seed + 2).cast<double>();
  p.ax = oracle::random_affinity(n, 0.4, seed + 3);
  p.ay = oracle::random_affinity(labels, 0.6, seed + 4);
  p.gx.dim = n;
  p.gx.mat = p.ax.sparseView();
  p.gy.dim = labels;
  p.gy.mat = p.ay.sparseView();
  p.lx = NormalizedLaplacian(p.gx);
  p.ly = NormalizedLaplacian(p.gy);
  return p;
}

NormalizedLaplacian empty_laplacian(Index dim) {
  SparseSym g;
  g.dim = dim;
  g.mat.resize(dim, dim);
  return NormalizedLaplacian(g);
}

}  // namespace

TEST_CASE("objective vanishes at the consistent point") {
  Matrix z = oracle::random_matrix(4, 3, 1, 0.0, 1.0);
  auto lx = empty_laplacian(4);
  auto ly = empty_laplacian(3);
  PropagationConfig cfg;
  cfg.alpha = cfg.beta = 0.0;
  cfg.eta = 2.0;
  CHECK(propagation_objective(z, z, z, lx, ly, cfg) == 0.0);
}

TEST_CASE("objective counts both Frobenius terms") {
  // eta=1, Z=0, Yhat=Y=ones(2x2): 1/2*4 + 1/2*4 = 4
  Matrix z = Matrix::Zero(2, 2);
  Matrix ones = Matrix::Ones(2, 2);
  PropagationConfig cfg;
  cfg.eta = 1.0;
  cfg.alpha = cfg.beta = 0.0;
  CHECK(propagation_objective(z, ones, ones, empty_laplacian(2), empty_laplacian(2), cfg) ==
        doctest::Approx(4.0));
}

TEST_CASE("objective matches the dense oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Problem p = random_problem(12, 5, 1000 + 10 * seed);
    PropagationConfig cfg;
    cfg.eta = 0.7;
    cfg.alpha = 0.3;
    cfg.beta = 0.2;
    double got = propagation_objective(p.z, p.yhat, p.y, p.lx, p.ly, cfg);
    double expect = oracle::propagation_objective_dense(p.z, p.yhat, p.y, p.ax, p.ay,
                                                        cfg.eta, cfg.alpha, cfg.beta);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("gradient vanishes at the closed-form fixed point") {
  Matrix yhat = oracle::random_matrix(5, 3, 7, 0.0, 1.0);
  Matrix y = oracle::random_binary(5, 3, 0.5, 8).cast<double>();
  PropagationConfig cfg;
  cfg.eta = 2.5;
  cfg.alpha = cfg.beta = 0.0;
  Matrix z = (yhat + cfg.eta * y) / (1.0 + cfg.eta);
  Matrix g = propagation_gradient(z, yhat, y, empty_laplacian(5), empty_laplacian(3), cfg);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gradient reduces to Z - Yhat without regularizers") {
  Matrix z = oracle::random_matrix(4, 2, 9);
  Matrix yhat = oracle::random_matrix(4, 2, 10);
  PropagationConfig cfg;
  cfg.eta = cfg.alpha = cfg.beta = 0.0;
  Matrix g = propagation_gradient(z, yhat, Matrix::Zero(4, 2), empty_laplacian(4),
                                  empty_laplacian(2), cfg);
  CHECK((g - (z - yhat)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Problem p = random_problem(10, 4, 2000 + 10 * seed);
    PropagationConfig cfg;
    cfg.eta = 0.5 + 0.1 * (seed % 3);
    cfg.alpha = 0.2;
    cfg.beta = 0.15;
    Matrix analytic = propagation_gradient(p.z, p.yhat, p.y, p.lx, p.ly, cfg);
    Matrix numeric = oracle::finite_difference(
        p.z,
        [&](const Matrix& z) {
          return propagation_objective(z, p.yhat, p.y, p.lx, p.ly, cfg);
        },
        1e-6);
    double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() / scale < 1e-5);
  }
}

TEST_CASE("zero steps with normalization off is the identity") {
  Problem p = random_problem(6, 3, 42);
  PropagationConfig cfg;
  cfg.steps = 0;
  cfg.normalize = false;
  Matrix out = propagate(p.z, p.yhat, p.y, p.lx, p.ly, cfg);
  CHECK(out == p.z);
}

TEST_CASE("iteration reaches the closed-form fixed point") {
  Matrix yhat = oracle::random_matrix(8, 4, 55, 0.0, 1.0);
  Matrix y = oracle::random_binary(8, 4, 0.5, 56).cast<double>();
  PropagationConfig cfg;
  cfg.eta = 1.0;
  cfg.alpha = cfg.beta = 0.0;
  cfg.gamma = 0.1;
  cfg.steps = 200;
  cfg.normalize = false;
  Matrix z0 = oracle::random_matrix(8, 4, 57, 0.0, 1.0);
  Matrix out = propagate(z0, yhat, y, empty_laplacian(8), empty_laplacian(4), cfg);
  Matrix expect = (yhat + y) / 2.0;
  CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("contraction rate without regularizers is |1 - gamma (1 + eta)|") {
  Matrix yhat = oracle::random_matrix(6, 3, 60, 0.0, 1.0);
  Matrix y = oracle::random_binary(6, 3, 0.5, 61).cast<double>();
  PropagationConfig cfg;
  cfg.eta = 1.5;
  cfg.alpha = cfg.beta = 0.0;
  cfg.gamma = 0.2;
  cfg.steps = 1;
  cfg.normalize = false;
  Matrix fixed_point = (yhat + cfg.eta * y) / (1.0 + cfg.eta);
  Matrix z = oracle::random_matrix(6, 3, 62, 0.0, 1.0);
  double before = (z - fixed_point).norm();
  Matrix z1 = propagate(z, yhat, y, empty_laplacian(6), empty_laplacian(3), cfg);
  double after = (z1 - fixed_point).norm();
  double rate = std::abs(1.0 - cfg.gamma * (1.0 + cfg.eta));
  CHECK(after == doctest::Approx(before * rate).epsilon(1e-10));
}

TEST_CASE("min-max normalization handles plain and constant columns") {
  Matrix z(3, 2);
  z << 0.2, 1.0,
       0.2, 1.0,
       0.6, 1.0;
  Matrix out = minmax_normalize_columns(z);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(1, 0) == 0.0);
  CHECK(out(2, 0) == 1.0);
  CHECK(out(0, 1) == 0.5);  // constant column
  CHECK(out(2, 1) == 0.5);

  // idempotence
  Matrix twice = minmax_normalize_columns(out);
  CHECK(twice == out);
}

TEST_CASE("normalization runs after the gradient steps inside propagate") {
  Problem p = random_problem(9, 4, 70);
  PropagationConfig cfg;
  cfg.eta = 1.0;
  cfg.alpha = 0.1;
  cfg.beta = 0.1;
  cfg.gamma = 0.05;
  cfg.steps = 3;
  cfg.normalize = true;
  Matrix out = propagate(p.z, p.yhat, p.y, p.lx, p.ly, cfg);
  CHECK(out.minCoeff() >= 0.0);
  CHECK(out.maxCoeff() <= 1.0);

  cfg.normalize = false;
  Matrix raw = propagate(p.z, p.yhat, p.y, p.lx, p.ly, cfg);
  CHECK(out == minmax_normalize_columns(raw));
}

TEST_CASE("objective descends monotonically inside the stability bound") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Problem p = random_problem(15, 4, 3000 + 10 * seed);
    PropagationConfig cfg;
    cfg.eta = 1.0;
    cfg.alpha = 0.4;
    cfg.beta = 0.3;
    cfg.gamma = 1.0 / (1.0 + cfg.eta + 2.0 * cfg.alpha + 2.0 * cfg.beta);
    cfg.steps = 200;
    cfg.normalize = false;
    PropagationTrace trace;
    propagate(p.z, p.yhat, p.y, p.lx, p.ly, cfg, &trace);
    REQUIRE(trace.objectives.size() == 201);
    for (std::size_t t = 1; t < trace.objectives.size(); ++t)
      CHECK(trace.objectives[t] <= trace.objectives[t - 1] + 1e-12);
  }
}

TEST_CASE("divergent step sizes raise a numerical error") {
  Problem p = random_problem(10, 3, 80);
  PropagationConfig cfg;
  cfg.eta = 1.0;
  cfg.alpha = 0.5;
  cfg.beta = 0.5;
  cfg.gamma = 50.0;  // way past 2 / L
  cfg.steps = 500;
  cfg.normalize = false;
  CHECK_THROWS_AS(propagate(p.z, p.yhat, p.y, p.lx, p.ly, cfg), NumericalError);
}

TEST_CASE("shape mismatches are rejected") {
  Problem p = random_problem(5, 3, 90);
  PropagationConfig cfg;
  CHECK_THROWS_AS(
      propagation_objective(p.z, p.yhat.topRows(3), p.y, p.lx, p.ly, cfg), DataError);
  CHECK_THROWS_AS(
      propagation_gradient(p.z, p.yhat, p.y, empty_laplacian(4), p.ly, cfg), DataError);
}
