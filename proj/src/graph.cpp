#include "plain/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace plain {

void SparseSym::dump(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[64];
  for (int outer = 0; outer < mat.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat, outer); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
}

std::vector<std::vector<int>> knn_inner_product(const Matrix& features, int k) {
  const Index n = features.rows();
  if (k < 1 || k >= n)
    throw DataError("neighbor count k=" + std::to_string(k) +
                    " must satisfy 1 <= k < n=" + std::to_string(n));

  std::vector<std::vector<int>> neighbors(n);
  const Index block = 256;
  Matrix dots;
  std::vector<int> idx;
  for (Index start = 0; start < n; start += block) {
    const Index rows = std::min(block, n - start);
    dots.noalias() = features.middleRows(start, rows) * features.transpose();
    for (Index r = 0; r < rows; ++r) {
      const Index i = start + r;
      idx.resize(n - 1);
      int pos = 0;
      for (Index j = 0; j < n; ++j)
        if (j != i) idx[pos++] = static_cast<int>(j);
      auto better = [&](int a, int b) {
        double da = dots(r, a), db = dots(r, b);
        if (da != db) return da > db;
        return a < b;
      };
      std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);
      neighbors[i].assign(idx.begin(), idx.begin() + k);
    }
  }
  return neighbors;
}

SparseSym build_instance_graph(const Matrix& features, const GraphConfig& cfg) {
  const Index n = features.rows();
  auto neighbors = knn_inner_product(features, cfg.k);
  if (cfg.rho <= 0.0) throw DataError("kernel exponent rho must be positive");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * cfg.k * 2);
  for (Index i = 0; i < n; ++i)
    for (int j : neighbors[i]) {
      double dot = features.row(i).dot(features.row(j));
      if (dot <= 0.0) continue;
      double w = std::pow(dot, cfg.rho);
      // S + S^T: both orientations; duplicates accumulate for mutual pairs.
      triplets.emplace_back(static_cast<int>(i), j, w);
      triplets.emplace_back(j, static_cast<int>(i), w);
    }

  SparseSym graph;
  graph.dim = n;
  graph.mat.resize(n, n);
  graph.mat.setFromTriplets(triplets.begin(), triplets.end());
  return graph;
}

SparseSym build_label_graph(const IntMatrix& candidates, const GraphConfig& cfg) {
  const Index L = candidates.cols();
  Eigen::VectorXi counts = candidates.colwise().sum();
  Matrix cooc = (candidates.cast<double>().transpose() * candidates.cast<double>());

  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < L; ++i)
    for (Index j = 0; j < L; ++j) {
      if (i == j && !cfg.label_graph_self_loops) continue;
      double denom = static_cast<double>(counts(i)) + static_cast<double>(counts(j));
      if (denom == 0.0) continue;
      double w = cooc(i, j) / denom;
      if (w > 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    }

  SparseSym graph;
  graph.dim = L;
  graph.mat.resize(L, L);
  graph.mat.setFromTriplets(triplets.begin(), triplets.end());
  return graph;
}

NormalizedLaplacian::NormalizedLaplacian(const SparseSym& graph) {
  dim_ = graph.dim;
  degrees_ = Vector::Zero(dim_);
  for (int outer = 0; outer < graph.mat.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(graph.mat, outer); it; ++it) {
      if (it.value() < 0.0)
        throw DataError("affinity weights must be non-negative");
      degrees_(it.row()) += it.value();
    }

  Vector inv_sqrt(dim_);
  for (Index i = 0; i < dim_; ++i)
    inv_sqrt(i) = degrees_(i) > 0.0 ? 1.0 / std::sqrt(degrees_(i)) : 0.0;

  scaled_adj_ = graph.mat;
  for (int outer = 0; outer < scaled_adj_.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_adj_, outer); it; ++it)
      it.valueRef() *= inv_sqrt(it.row()) * inv_sqrt(it.col());
}

Matrix NormalizedLaplacian::left_multiply(const Matrix& z) const {
  Matrix out;
  left_multiply_into(z, out);
  return out;
}

Matrix NormalizedLaplacian::right_multiply(const Matrix& z) const {
  Matrix out;
  right_multiply_into(z, out);
  return out;
}

void NormalizedLaplacian::left_multiply_into(const Matrix& z, Matrix& out) const {
  if (z.rows() != dim_)
    throw DataError("left_multiply: matrix has " + std::to_string(z.rows()) +
                    " rows, Laplacian dim is " + std::to_string(dim_));
  // Isolated nodes have an all-zero row in the scaled adjacency, so their
  // result row is z itself: the identity-row convention falls out for free.
  out.resize(z.rows(), z.cols());
  out.noalias() = scaled_adj_ * z;
  out = z - out;
}

void NormalizedLaplacian::right_multiply_into(const Matrix& z, Matrix& out) const {
  if (z.cols() != dim_)
    throw DataError("right_multiply: matrix has " + std::to_string(z.cols()) +
                    " cols, Laplacian dim is " + std::to_string(dim_));
  out.resize(z.rows(), z.cols());
  out.noalias() = z * scaled_adj_;
  out = z - out;
}

Matrix NormalizedLaplacian::dense() const {
  return Matrix::Identity(dim_, dim_) - Matrix(scaled_adj_);
}

NormalizedLaplacian normalized_laplacian(const SparseSym& graph) {
  return NormalizedLaplacian(graph);
}

}  // namespace plain
