#pragma once

#include <Eigen/SparseCore>
#include <filesystem>
#include <vector>

#include "plain/types.hpp"

namespace plain {

struct GraphConfig {
  int k = 10;        // neighbors per node
  double rho = 3.0;  // monomial kernel exponent
  bool label_graph_self_loops = false;
};

/// Sparse symmetric non-negative affinity matrix.
struct SparseSym {
  Index dim = 0;
  Eigen::SparseMatrix<double> mat;  // symmetric, weights >= 0

  Index nonzeros() const { return mat.nonZeros(); }
  /// Writes one `row col weight` line per stored entry.
  void dump(const std::filesystem::path& path) const;
};

/// Symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2}, kept in
/// factored form so products against dense matrices stay sparse. Rows of
/// isolated nodes (degree 0) act as identity rows.
class NormalizedLaplacian {
 public:
  NormalizedLaplacian() = default;
  explicit NormalizedLaplacian(const SparseSym& graph);

  Index dim() const { return dim_; }
  const Vector& degrees() const { return degrees_; }

  /// L * Z for Z with dim() rows.
  Matrix left_multiply(const Matrix& z) const;
  /// Z * L for Z with dim() columns.
  Matrix right_multiply(const Matrix& z) const;
  /// Allocation-free variants for hot loops.
  void left_multiply_into(const Matrix& z, Matrix& out) const;
  void right_multiply_into(const Matrix& z, Matrix& out) const;
  /// Dense realization; intended for small dims and debugging.
  Matrix dense() const;

 private:
  Index dim_ = 0;
  Vector degrees_;
  Eigen::SparseMatrix<double> scaled_adj_;  // D^{-1/2} A D^{-1/2}
};

/// Exact top-k neighbors by inner product, excluding self. Ties broken in
/// favor of the smaller index.
std::vector<std::vector<int>> knn_inner_product(const Matrix& features, int k);

/// Instance affinity: s_ij = max(x_i . x_j, 0)^rho for j among the k nearest
/// neighbors of i, then symmetrized as S + S^T (mutual relations add).
SparseSym build_instance_graph(const Matrix& features, const GraphConfig& cfg);

/// Label co-occurrence affinity with penalized normalization:
/// a_ij = #(both labels present) / (#(i present) + #(j present)), i != j.
/// The diagonal stays zero unless cfg.label_graph_self_loops is set.
SparseSym build_label_graph(const IntMatrix& candidates, const GraphConfig& cfg = {});

NormalizedLaplacian normalized_laplacian(const SparseSym& graph);

}  // namespace plain
