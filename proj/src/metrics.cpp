#include "plain/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace plain {

namespace {

void check_shapes(const Matrix& scores, const IntMatrix& truth) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols())
    throw DataError("metrics: score and truth shapes differ");
}

bool row_evaluable(const IntMatrix& truth, Index i) {
  int rel = truth.row(i).sum();
  return rel > 0 && rel < truth.cols();
}

}  // namespace

double ranking_loss(const Matrix& scores, const IntMatrix& truth, int* skipped) {
  check_shapes(scores, truth);
  double total = 0.0;
  int evaluated = 0, skip = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    if (!row_evaluable(truth, i)) {
      ++skip;
      continue;
    }
    double bad = 0.0;
    int rel = 0, irr = 0;
    for (Index p = 0; p < scores.cols(); ++p) {
      if (!truth(i, p)) continue;
      ++rel;
      for (Index q = 0; q < scores.cols(); ++q) {
        if (truth(i, q)) continue;
        if (scores(i, q) > scores(i, p)) bad += 1.0;
        else if (scores(i, q) == scores(i, p)) bad += 0.5;
      }
    }
    irr = static_cast<int>(scores.cols()) - rel;
    total += bad / (static_cast<double>(rel) * irr);
    ++evaluated;
  }
  if (skipped) *skipped = skip;
  return evaluated > 0 ? total / evaluated : 0.0;
}

double average_precision(const Matrix& scores, const IntMatrix& truth, int* skipped) {
  check_shapes(scores, truth);
  const Index L = scores.cols();
  double total = 0.0;
  int evaluated = 0, skip = 0;
  std::vector<int> order(L);
  for (Index i = 0; i < scores.rows(); ++i) {
    if (!row_evaluable(truth, i)) {
      ++skip;
      continue;
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores(i, a) != scores(i, b)) return scores(i, a) > scores(i, b);
      return a < b;
    });
    double sum = 0.0;
    int rel_seen = 0;
    for (Index rank = 1; rank <= L; ++rank) {
      if (truth(i, order[rank - 1])) {
        ++rel_seen;
        sum += static_cast<double>(rel_seen) / static_cast<double>(rank);
      }
    }
    total += sum / rel_seen;
    ++evaluated;
  }
  if (skipped) *skipped = skip;
  return evaluated > 0 ? total / evaluated : 0.0;
}

double hamming_loss(const Matrix& scores, const IntMatrix& truth, double threshold) {
  check_shapes(scores, truth);
  if (!(threshold > 0.0 && threshold < 1.0))
    throw DataError("hamming threshold must lie in (0,1)");
  long mismatches = 0;
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index j = 0; j < scores.cols(); ++j)
      mismatches += ((scores(i, j) > threshold) != (truth(i, j) != 0));
  return static_cast<double>(mismatches) /
         (static_cast<double>(scores.rows()) * scores.cols());
}

EvalReport evaluate(const Matrix& scores, const IntMatrix& truth, double threshold) {
  EvalReport report;
  int skip_rl = 0;
  report.ranking_loss = ranking_loss(scores, truth, &skip_rl);
  report.average_precision = average_precision(scores, truth);
  report.hamming_loss = hamming_loss(scores, truth, threshold);
  report.n_skipped = skip_rl;
  report.n_evaluated = static_cast<int>(scores.rows()) - skip_rl;
  return report;
}

}  // namespace plain
