#include "plain/metrics.hpp"

#include <cmath>

#include "doctest.h"
#include "support/oracles.hpp"

using namespace plain;

TEST_CASE("ranking loss on separable and inverted orderings") {
  Matrix scores(1, 4);
  scores << 0.9, 0.8, 0.2, 0.1;
  IntMatrix truth(1, 4);
  truth << 1, 1, 0, 0;
  CHECK(ranking_loss(scores, truth) == 0.0);

  IntMatrix inverted(1, 4);
  inverted << 0, 0, 1, 1;
  CHECK(ranking_loss(scores, inverted) == 1.0);
}

TEST_CASE("ranking loss hand example with both truth assignments") {
  Matrix scores(1, 3);
  scores << 0.9, 0.4, 0.6;
  IntMatrix t1(1, 3);
  t1 << 1, 0, 1;
  CHECK(ranking_loss(scores, t1) == 0.0);
  IntMatrix t2(1, 3);
  t2 << 1, 1, 0;
  CHECK(ranking_loss(scores, t2) == doctest::Approx(0.5));
}

TEST_CASE("ties contribute one half") {
  Matrix scores(1, 2);
  scores << 0.4, 0.4;
  IntMatrix truth(1, 2);
  truth << 1, 0;
  CHECK(ranking_loss(scores, truth) == doctest::Approx(0.5));
}

TEST_CASE("average precision extremes") {
  Matrix scores(1, 4);
  scores << 0.9, 0.8, 0.2, 0.1;
  IntMatrix top(1, 4);
  top << 1, 1, 0, 0;
  CHECK(average_precision(scores, top) == 1.0);

  IntMatrix last(1, 4);
  last << 0, 0, 0, 1;
  CHECK(average_precision(scores, last) == doctest::Approx(0.25));  // 1/L
}

TEST_CASE("average precision hand example") {
  Matrix scores(1, 3);
  scores << 0.9, 0.4, 0.6;
  IntMatrix truth(1, 3);
  truth << 0, 1, 1;
  CHECK(average_precision(scores, truth) == doctest::Approx(7.0 / 12.0));
}

TEST_CASE("hamming loss counts threshold disagreements") {
  Matrix scores(2, 2);
  scores << 0.9, 0.1, 0.2, 0.8;
  IntMatrix truth(2, 2);
  truth << 1, 1, 0, 1;
  CHECK(hamming_loss(scores, truth, 0.5) == doctest::Approx(0.25));

  IntMatrix same(2, 2);
  same << 1, 0, 0, 1;
  CHECK(hamming_loss(scores, same, 0.5) == 0.0);
  IntMatrix flipped(2, 2);
  flipped << 0, 1, 1, 0;
  CHECK(hamming_loss(scores, flipped, 0.5) == 1.0);

  CHECK_THROWS_AS(hamming_loss(scores, truth, 0.0), DataError);
  CHECK_THROWS_AS(hamming_loss(scores, truth, 1.5), DataError);
}

TEST_CASE("ranking metrics are invariant under monotone score maps") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix scores = oracle::random_matrix(8, 6, 100 + seed, 0.0, 1.0);
    IntMatrix truth = oracle::random_binary(8, 6, 0.4, 200 + seed);
    Matrix mapped = 2.0 * scores.array() - 0.3;
    CHECK(ranking_loss(scores, truth) == ranking_loss(mapped, truth));
    CHECK(average_precision(scores, truth) == average_precision(mapped, truth));
  }
}

TEST_CASE("metrics equal brute-force oracles on random instances") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Matrix scores = oracle::random_matrix(8, 6, 1000 + seed, 0.0, 1.0);
    IntMatrix truth = oracle::random_binary(8, 6, 0.35, 2000 + seed);
    CHECK(ranking_loss(scores, truth) == oracle::ranking_loss_brute(scores, truth));
    CHECK(average_precision(scores, truth) ==
          oracle::average_precision_brute(scores, truth));
    CHECK(hamming_loss(scores, truth, 0.5) ==
          oracle::hamming_loss_brute(scores, truth, 0.5));
  }
}

TEST_CASE("rows without both label kinds are skipped and counted") {
  Matrix scores(3, 3);
  scores << 0.9, 0.5, 0.1,
            0.9, 0.5, 0.1,
            0.9, 0.5, 0.1;
  IntMatrix truth(3, 3);
  truth << 1, 0, 1,   // evaluable
           0, 0, 0,   // no relevant label
           1, 1, 1;   // no irrelevant label
  EvalReport report = evaluate(scores, truth);
  CHECK(report.n_evaluated == 1);
  CHECK(report.n_skipped == 2);
  CHECK(report.n_evaluated + report.n_skipped == 3);
  // hamming still covers all rows: mismatches: row0 {0.5->0 vs 0 ok, .9 ok, .1 vs 1 bad}
  CHECK(report.hamming_loss == doctest::Approx((1.0 + 1.0 + 2.0) / 9.0));
}

TEST_CASE("ranking loss complements ranking accuracy on tie-free rows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix scores = oracle::random_matrix(6, 5, 3000 + seed, 0.0, 1.0);
    IntMatrix truth = oracle::random_binary(6, 5, 0.4, 4000 + seed);
    // accuracy: fraction of (relevant, irrelevant) pairs ordered correctly
    double correct = 0.0;
    int rows = 0;
    for (Index i = 0; i < 6; ++i) {
      int rel = truth.row(i).sum();
      if (rel == 0 || rel == 5) continue;
      double good = 0.0;
      long pairs = 0;
      for (Index p = 0; p < 5; ++p)
        for (Index q = 0; q < 5; ++q)
          if (truth(i, p) == 1 && truth(i, q) == 0) {
            ++pairs;
            if (scores(i, p) > scores(i, q)) good += 1.0;
          }
      correct += good / pairs;
      ++rows;
    }
    if (rows == 0) continue;
    correct /= rows;
    CHECK(ranking_loss(scores, truth) == doctest::Approx(1.0 - correct).epsilon(1e-12));
  }
}

TEST_CASE("shape mismatch is rejected") {
  CHECK_THROWS_AS(ranking_loss(Matrix::Zero(2, 3), IntMatrix::Zero(2, 4)), DataError);
}
