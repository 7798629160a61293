#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "plain/types.hpp"

namespace plain {

struct DatasetMeta {
  Index n = 0;  ///< number of examples
  Index d = 0;  ///< feature dimensionality
  Index L = 0;  ///< number of labels

  void validate() const;
};

/// A multi-label dataset: features plus a candidate-label matrix, and
/// optionally the ground-truth labels (used for evaluation only).
/// Clean multi-label data has candidates == truth; partially labeled data
/// has truth as a subset of candidates per row.
struct Dataset {
  DatasetMeta meta;
  Matrix features;                    // n x d, rows L2-normalized on load
  IntMatrix candidates;               // n x L in {0,1}
  std::optional<IntMatrix> truth;     // n x L in {0,1}, truth <= candidates
  int zero_norm_rows = 0;             // rows left as zero vectors at load

  bool has_truth() const { return truth.has_value(); }
  void validate() const;
};

struct SynthConfig {
  int r = 3;               // false positives injected per example
  std::uint64_t seed = 0;
};

/// Partition of example indices into folds of near-equal size.
struct FoldPlan {
  int fold_count = 0;
  std::vector<int> assignments;  // per-example fold index

  std::vector<int> test_indices(int fold) const;
  std::vector<int> train_indices(int fold) const;
};

/// Reads the sparse text format:
///   header `n d L`, then per example `<cand>|<truth> <idx>:<val> ...`
/// where <cand>/<truth> are comma-separated 0-based label ids (truth may be
/// empty) and feature entries carry strictly increasing 0-based indices.
/// With `normalize` set, feature rows are scaled to unit Euclidean norm;
/// zero rows are left as-is and counted in Dataset::zero_norm_rows.
Dataset load_dataset(const std::filesystem::path& path, bool normalize = true);

/// Writes the same text format; feature values keep full double precision so
/// a load/save/load cycle reproduces matrices bit-identically.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Corrupts clean multi-label data into partial multi-label data: per example,
/// r labels drawn uniformly without replacement from the complement of the
/// truth set are added to the candidate set. When the complement holds fewer
/// than r labels the candidate set becomes all L labels. Truth is untouched.
Dataset synthesize_pml(const Dataset& clean, const SynthConfig& cfg);

/// Uniform random partition into fold_count folds whose sizes differ by at
/// most one. Unstratified.
FoldPlan make_folds(const DatasetMeta& meta, int fold_count, std::uint64_t seed);

/// Row subset, preserving meta.d and meta.L.
Dataset select_rows(const Dataset& ds, const std::vector<int>& rows);

}  // namespace plain
