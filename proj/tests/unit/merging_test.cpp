#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mfmil/merging/merge.hpp"
#include "mfmil/numkit/rng.hpp"

using namespace mfmil;
using namespace mfmil::merging;
using numkit::ParamSet;
using numkit::RngStream;

namespace {

ParamSet vec(std::vector<double> v) {
  ParamSet p;
  const std::size_t n = v.size();
  p.add("w", {n}, std::move(v));
  return p;
}

ParamSet two_entry(RngStream& rng, double scale = 1.0, double offset = 0.0) {
  ParamSet p;
  auto a = p.add("a", {3, 4});
  auto b = p.add("b", {5});
  for (double& x : a) x = offset + scale * rng.normal();
  for (double& x : b) x = offset + scale * rng.normal();
  return p;
}

MergeConfig ties_cfg(double density, double scale = 1.0) { return MergeConfig{MergeMethod::Ties, density, scale}; }

}  // namespace

TEST_CASE("soup averages entrywise") {
  ParamSet a, b;
  a.add("w", {2}, {1, 2});
  b.add("w", {2}, {3, 4});
  const std::vector<ParamSet> in{a, b};
  CHECK(soup(in).values("w")[0] == 2.0);
  CHECK(soup(in).values("w")[1] == 3.0);
}

TEST_CASE("soup is idempotent and order independent") {
  RngStream rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const ParamSet one = two_entry(rng, std::pow(10.0, rng.uniform(-3, 3)));
    const std::size_t m = 1 + rng.uniform_index(10);
    CHECK(soup(std::vector<ParamSet>(m, one)) == one);

    std::vector<ParamSet> models;
    for (std::size_t i = 0; i < m; ++i) models.push_back(two_entry(rng));
    const ParamSet ref = soup(models);
    const auto perm = rng.permutation(m);
    std::vector<ParamSet> shuffled;
    for (std::size_t i : perm) shuffled.push_back(models[i]);
    CHECK(soup(shuffled) == ref);
  }
}

TEST_CASE("ties hand trace") {
  const ParamSet init = vec({0, 0, 0});
  const std::vector<ParamSet> models{vec({0.9, -0.1, 0.5}), vec({0.8, 0.2, -0.6})};
  const ParamSet out = ties(init, models, ties_cfg(2.0 / 3.0));
  const auto w = out.values("w");
  CHECK(w[0] == (0.9 + 0.8) / 2.0);
  CHECK(w[0] == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(w[1] == 0.0);
  CHECK(w[2] == -0.6);
}

TEST_CASE("trim keep count") {
  CHECK(trim_keep_count(2.0 / 3.0, 3) == 2);
  CHECK(trim_keep_count(0.2, 10) == 2);
  CHECK(trim_keep_count(0.2, 11) == 3);
  CHECK(trim_keep_count(0.01, 5) == 1);
  CHECK(trim_keep_count(1.0, 7) == 7);
}

TEST_CASE("ties on identical models returns the model") {
  // Inputs within a factor of two of init so theta - init is exact.
  RngStream rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    ParamSet init;
    auto iv = init.add("w", {20});
    for (double& x : iv) x = rng.uniform(1.0, 2.0);
    ParamSet theta = init;
    for (double& x : theta.values("w")) x += rng.uniform(-0.4, 0.4);
    const std::size_t m = 1 + rng.uniform_index(8);
    CHECK(ties(init, std::vector<ParamSet>(m, theta), ties_cfg(1.0)) == theta);
  }
}

TEST_CASE("ties sign tie goes positive") {
  const ParamSet init = vec({0, 0});
  const std::vector<ParamSet> models{vec({0.5, 0.3}), vec({-0.5, 0.1}), vec({0.25, -0.25}), vec({-0.25, 0.25})};
  const ParamSet out = ties(init, models, ties_cfg(1.0));
  const auto w = out.values("w");
  CHECK(w[0] == 0.375);
  CHECK(w[1] == doctest::Approx((0.3 + 0.1 + 0.25) / 3.0).epsilon(1e-15));

  const std::vector<ParamSet> opposed{vec({0.7, 0}), vec({-0.7, 0})};
  CHECK(ties(init, opposed, ties_cfg(1.0)).flatten()[0] == 0.7);
}

TEST_CASE("ties trimming uses the whole flattened vector") {
  ParamSet init;
  init.add("a", {2}, {0, 0});
  init.add("b", {2}, {0, 0});
  ParamSet m = init;
  m.values("a")[0] = 0.1;
  m.values("a")[1] = 0.2;
  m.values("b")[0] = 0.4;
  m.values("b")[1] = -0.3;
  const ParamSet out = ties(init, std::vector<ParamSet>{m}, ties_cfg(0.5));
  CHECK(out.values("a")[0] == 0.0);
  CHECK(out.values("a")[1] == 0.0);
  CHECK(out.values("b")[0] == 0.4);
  CHECK(out.values("b")[1] == -0.3);

  // Equal magnitudes: the lower flattened index survives.
  const ParamSet tie = ties(vec({0, 0, 0}), std::vector<ParamSet>{vec({0.5, -0.5, 0.5})}, ties_cfg(0.5));
  CHECK(tie.values("w")[0] == 0.5);
  CHECK(tie.values("w")[1] == -0.5);
  CHECK(tie.values("w")[2] == 0.0);
}

TEST_CASE("ties task vector is linear in the scale") {
  RngStream rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const ParamSet init = two_entry(rng);
    std::vector<ParamSet> models;
    for (int i = 0; i < 5; ++i) models.push_back(two_entry(rng));
    const double density = rng.uniform(0.05, 1.0);
    const ParamSet base = ties_task_vector(init, models, ties_cfg(density, 1.0));
    for (double lambda : {0.5, 2.0, 3.0, 0.3, 1e-3}) {
      ParamSet scaled = ties_task_vector(init, models, ties_cfg(density, lambda));
      const auto a = base.flatten();
      const auto b = scaled.flatten();
      for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(b[i] == lambda * a[i]);
    }
    // With a zero init the full output is the task vector itself.
    const ParamSet zero = init.zeros_like();
    CHECK(ties(zero, models, ties_cfg(density, 0.5)) == ties_task_vector(zero, models, ties_cfg(density, 0.5)));
  }
}

TEST_CASE("ties with full density and agreeing signs matches soup of task vectors") {
  RngStream rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const ParamSet init = two_entry(rng);
    const auto flat_init = init.flatten();
    std::vector<ParamSet> models;
    std::vector<ParamSet> taus;
    std::vector<double> sign(flat_init.size());
    for (double& s : sign) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> tau(flat_init.size());
      for (std::size_t j = 0; j < tau.size(); ++j) tau[j] = sign[j] * rng.uniform(0.01, 1.0);
      ParamSet t = init.zeros_like();
      t.assign_flat(tau);
      taus.push_back(t);
      std::vector<double> theta(flat_init.size());
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = flat_init[j] + tau[j];
      ParamSet th = init.zeros_like();
      th.assign_flat(theta);
      models.push_back(th);
    }
    const auto got = ties(init, models, ties_cfg(1.0)).flatten();
    const auto mean_tau = soup(taus).flatten();
    for (std::size_t j = 0; j < got.size(); ++j) REQUIRE(std::abs(got[j] - (flat_init[j] + mean_tau[j])) <= 1e-12);
  }
}

TEST_CASE("ties is order independent") {
  RngStream rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const ParamSet init = two_entry(rng);
    std::vector<ParamSet> models;
    for (int i = 0; i < 7; ++i) models.push_back(two_entry(rng));
    const ParamSet ref = ties(init, models, ties_cfg(0.3));
    std::vector<ParamSet> shuffled;
    for (std::size_t i : rng.permutation(models.size())) shuffled.push_back(models[i]);
    CHECK(ties(init, shuffled, ties_cfg(0.3)) == ref);
    for (double x : ref.flatten()) CHECK(std::isfinite(x));
  }
}

TEST_CASE("merge input errors") {
  const std::vector<ParamSet> none;
  CHECK_THROWS_AS(soup(none), std::invalid_argument);
  CHECK_THROWS_AS(ties(vec({0}), none, ties_cfg(0.5)), std::invalid_argument);
  const std::vector<ParamSet> mixed{vec({1, 2}), vec({1, 2, 3})};
  CHECK_THROWS_AS(soup(mixed), numkit::CongruenceError);
  CHECK_THROWS_AS(ties(vec({0, 0}), mixed, ties_cfg(0.5)), numkit::CongruenceError);
  CHECK_THROWS_AS(ties_cfg(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ties_cfg(1.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ties_cfg(0.5, 0.0).validate(), std::invalid_argument);
  CHECK(parse_merge_method("TIES") == MergeMethod::Ties);
  CHECK_THROWS_AS(parse_merge_method("dare"), std::invalid_argument);

  // Soup ignores init; dispatch matches the direct calls.
  const std::vector<ParamSet> in{vec({1, 2}), vec({3, 4})};
  CHECK(merge(vec({9, 9}), in, MergeConfig{}) == soup(in));
  CHECK(merge(vec({0, 0}), in, ties_cfg(1.0)) == ties(vec({0, 0}), in, ties_cfg(1.0)));
}
