#include <cmath>

#include "doctest.h"
#include "mfmil/metrics/auc.hpp"
#include "mfmil/metrics/variability.hpp"
#include "mfmil/numkit/rng.hpp"
#include "oracles.hpp"

using namespace mfmil;
using namespace mfmil::metrics;
using numkit::Matrix;
using numkit::RngStream;

namespace {

struct Case {
  std::vector<double> scores;
  std::vector<int> labels;
};

Case random_case(RngStream& rng, bool ties) {
  Case c;
  const std::size_t n = 2 + rng.uniform_index(199);
  c.labels.resize(n);
  c.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.labels[i] = rng.uniform() < 0.4 ? 1 : 0;
    c.scores[i] = ties ? static_cast<double>(rng.uniform_index(6)) : rng.normal();
  }
  c.labels[0] = 1;
  c.labels[1] = 0;
  return c;
}

}  // namespace

TEST_CASE("small AUC examples") {
  CHECK(auc_binary(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75);
  CHECK(auc_binary(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(auc_binary(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}) == 0.5);
}

TEST_CASE("AUC input errors") {
  CHECK_THROWS_AS(auc_binary(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(auc_binary(std::vector<double>{0.1}, std::vector<int>{1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(auc_binary(std::vector<double>{0.1, 0.2}, std::vector<int>{2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(auc_binary(std::vector<double>{NAN, 0.2}, std::vector<int>{1, 0}), std::invalid_argument);
  Matrix off(2, 2, {0.5, 0.6, 0.5, 0.5});
  CHECK_THROWS_AS(auc_macro_ovr(off, std::vector<std::size_t>{0, 1}), std::invalid_argument);
  Matrix missing(2, 3, {0.2, 0.3, 0.5, 0.1, 0.1, 0.8});
  CHECK_THROWS_AS(auc_macro_ovr(missing, std::vector<std::size_t>{0, 1}), std::invalid_argument);
}

TEST_CASE("fast AUC equals the pairwise count exactly") {
  RngStream rng(1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const Case c = random_case(rng, trial % 2 == 0);
    REQUIRE(auc_binary(c.scores, c.labels) == testing::pairwise_auc(c.scores, c.labels));
  }
}

TEST_CASE("AUC depends only on the ordering") {
  RngStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Case c = random_case(rng, trial % 3 == 0);
    const double base = auc_binary(c.scores, c.labels);
    std::vector<double> mapped(c.scores.size());
    for (std::size_t i = 0; i < mapped.size(); ++i) mapped[i] = std::exp(0.5 * c.scores[i]) + 3.0;
    CHECK(auc_binary(mapped, c.labels) == base);

    // Flipping labels gives the complement.
    std::vector<int> flipped(c.labels.size());
    for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = 1 - c.labels[i];
    CHECK(auc_binary(c.scores, flipped) + base == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("macro one-vs-rest matches the per-class oracle") {
  RngStream rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t c = 2 + rng.uniform_index(4);
    const std::size_t n = c + rng.uniform_index(150);
    Matrix probs(n, c);
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = i < c ? i : rng.uniform_index(c);
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += (probs(i, k) = trial % 2 ? rng.uniform_index(4) + 1.0 : rng.uniform() + 1e-3);
      for (std::size_t k = 0; k < c; ++k) probs(i, k) /= s;
    }
    CHECK(std::abs(auc_macro_ovr(probs, labels) - testing::pairwise_macro_auc(probs, labels)) <= 1e-12);
  }
}

TEST_CASE("two-class probabilities use the positive column") {
  RngStream rng(9);
  const std::size_t n = 60;
  Matrix probs(n, 2);
  std::vector<std::size_t> labels(n);
  std::vector<double> pos(n);
  std::vector<int> bin(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i % 2;
    bin[i] = static_cast<int>(labels[i]);
    pos[i] = probs(i, 1) = rng.uniform();
    probs(i, 0) = 1.0 - pos[i];
  }
  CHECK(auc_from_probabilities(probs, labels) == auc_binary(pos, bin));
  CHECK(auc_macro_ovr(probs, labels) == doctest::Approx(auc_binary(pos, bin)).epsilon(1e-15));
}

TEST_CASE("variability summary") {
  const auto s = variability(std::vector<double>{88.0, 90.0, 92.0});
  CHECK(s.min == 88.0);
  CHECK(s.max == 92.0);
  CHECK(s.mean == 90.0);
  CHECK(s.std == 2.0);
  CHECK(s.std_defined);
  CHECK(s.count == 3);

  const auto one = variability(std::vector<double>{71.5});
  CHECK(one.std == 0.0);
  CHECK_FALSE(one.std_defined);
  CHECK(one.mean == 71.5);
  CHECK_THROWS_AS(variability(std::vector<double>{}), std::invalid_argument);
}
