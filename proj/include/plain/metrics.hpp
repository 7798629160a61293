#pragma once

#include "plain/types.hpp"

namespace plain {

struct EvalReport {
  double ranking_loss = 0.0;
  double average_precision = 0.0;
  double hamming_loss = 0.0;
  int n_evaluated = 0;  // rows entering ranking loss / average precision
  int n_skipped = 0;    // rows with zero or all-relevant truth
};

/// Mean over instances of the fraction of (relevant, irrelevant) label pairs
/// ordered wrongly by score; ties count 1/2. Rows with no relevant or no
/// irrelevant label are skipped.
double ranking_loss(const Matrix& scores, const IntMatrix& truth,
                    int* skipped = nullptr);

/// Mean over instances of the average over relevant labels of
/// (relevant labels ranked at or above it) / (its rank), ranks by descending
/// score with ties broken by label index. Same skip rule as ranking_loss.
double average_precision(const Matrix& scores, const IntMatrix& truth,
                         int* skipped = nullptr);

/// Fraction of the n*L bits where (score > threshold) disagrees with truth.
double hamming_loss(const Matrix& scores, const IntMatrix& truth,
                    double threshold = 0.5);

EvalReport evaluate(const Matrix& scores, const IntMatrix& truth,
                    double threshold = 0.5);

}  // namespace plain
