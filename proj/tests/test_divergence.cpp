#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "oscl/divergence.hpp"

using namespace oscl;

namespace {

std::vector<double> bern(double p1) { return {1.0 - p1, p1}; }

}  // namespace

TEST_CASE("kl") {
  CHECK(kl(bern(0.3), bern(0.3)) == doctest::Approx(0.0));
  CHECK(kl(bern(0.5), bern(0.25)) == doctest::Approx(0.2075187496));
  CHECK(std::isinf(kl(bern(0.5), std::vector<double>{1.0, 0.0})));
}

TEST_CASE("dmax and the smooth variant") {
  CHECK(dmax(bern(0.5), bern(0.5)) == doctest::Approx(0.0));
  CHECK(dmax(bern(0.75), bern(0.5)) == doctest::Approx(std::log2(1.5)));
  CHECK(dmax_eps(bern(0.9), bern(0.5), 0.15) == doctest::Approx(std::log2(1.5)));
  CHECK_THROWS_AS(dmax_eps(bern(0.9), bern(0.5), 1.0), ConfigError);

  Xoshiro256ss rng(31);
  for (int i = 0; i < 40; ++i) {
    auto p = oracles::random_simplex(rng, 5);
    auto q = oracles::random_simplex(rng, 5, 0.02);
    double eps = 0.05 + 0.4 * rng.next_double();
    double got = dmax_eps(p, q, eps);
    double want = oracles::dmax_eps_bruteforce(p, q, eps);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("spectrum divergence") {
  CHECK(ds_eps(bern(0.9), bern(0.5), 0.05) == doctest::Approx(std::log2(1.8)));
  CHECK(ds_eps(bern(0.9), bern(0.5), 0.95) == doctest::Approx(std::log2(0.2)));
  Xoshiro256ss rng(32);
  for (int i = 0; i < 20; ++i) {
    auto p = oracles::random_simplex(rng, 6);
    double eps = 0.01 + 0.98 * rng.next_double();
    CHECK(ds_eps(p, p, eps) == doctest::Approx(0.0));
  }
  // eps = 0 is the unsmoothed max divergence
  CHECK(ds_eps(bern(0.75), bern(0.5), 0.0) == doctest::Approx(dmax(bern(0.75), bern(0.5))));
}

TEST_CASE("spectrum divergence matches the threshold-scan oracle") {
  Xoshiro256ss rng(33);
  for (int i = 0; i < 60; ++i) {
    size_t n = 2 + rng.next_below(8);
    auto p = oracles::random_simplex(rng, n);
    auto q = oracles::random_simplex(rng, n);
    if (i % 4 == 0) q[rng.next_below(n)] = 0.0;  // exercise the q-null path
    double eps = 0.02 + 0.9 * rng.next_double();
    double got = ds_eps(p, q, eps);
    double want = oracles::ds_bruteforce(p, q, eps);
    if (std::isinf(want))
      CHECK(got == want);
    else
      CHECK(got == want);  // both pick the same atom value
  }
}

TEST_CASE("hypothesis testing divergence") {
  SUBCASE("pinned small cases") {
    HypothesisTestResult r = dh_eps(bern(0.9), bern(0.5), 0.2, DhMode::Exact);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.set.member[1] == 1);
    CHECK(r.set.member[0] == 0);

    HypothesisTestResult full = dh_eps(bern(0.9), bern(0.5), 0.05, DhMode::Exact);
    CHECK(full.value == doctest::Approx(0.0));
    CHECK(full.set.count() == 2);

    HypothesisTestResult zero = dh_eps(bern(0.3), bern(0.6), 0.0, DhMode::Exact);
    CHECK(zero.value == doctest::Approx(0.0));
    CHECK(zero.p_mass == doctest::Approx(1.0));
  }
  SUBCASE("exact matches the exhaustive oracle") {
    Xoshiro256ss rng(34);
    for (int i = 0; i < 60; ++i) {
      size_t n = 2 + rng.next_below(9);
      auto p = oracles::random_simplex(rng, n);
      auto q = oracles::random_simplex(rng, n);
      double eps = 0.02 + 0.45 * rng.next_double();
      HypothesisTestResult got = dh_eps(p, q, eps, DhMode::Exact);
      auto want = oracles::dh_bruteforce(p, q, eps);
      CHECK(got.value == doctest::Approx(want.value).epsilon(1e-12));
      CHECK(got.p_mass + 1e-12 >= 1.0 - eps);
    }
  }
  SUBCASE("greedy is feasible and dominated by exact") {
    Xoshiro256ss rng(35);
    for (int i = 0; i < 40; ++i) {
      auto p = oracles::random_simplex(rng, 10);
      auto q = oracles::random_simplex(rng, 10);
      double eps = 0.1 + 0.3 * rng.next_double();
      HypothesisTestResult greedy = dh_eps(p, q, eps, DhMode::Greedy);
      HypothesisTestResult exact = dh_eps(p, q, eps, DhMode::Exact);
      CHECK(greedy.p_mass + 1e-12 >= 1.0 - eps);
      CHECK(exact.value + 1e-12 >= greedy.value);
      CHECK(greedy.q_mass + 1e-12 >= exact.q_mass);
      CHECK(!greedy.exact);
      CHECK(exact.exact);
    }
  }
  SUBCASE("exact mode refuses oversized alphabets") {
    Xoshiro256ss rng(36);
    auto p = oracles::random_simplex(rng, 30);
    auto q = oracles::random_simplex(rng, 30);
    CHECK_THROWS_AS(dh_eps(p, q, 0.1, DhMode::Exact), ConfigError);
    CHECK_NOTHROW(dh_eps(p, q, 0.1, DhMode::Greedy));
  }
}

TEST_CASE("monotonicity in the smoothing parameter") {
  Xoshiro256ss rng(37);
  for (int i = 0; i < 100; ++i) {
    auto p = oracles::random_simplex(rng, 7);
    auto q = oracles::random_simplex(rng, 7);
    double prev_ds = kInf;
    double prev_dh = -kInf;
    for (double eps : {0.05, 0.1, 0.2, 0.4, 0.6}) {
      double ds = ds_eps(p, q, eps);
      double dh = dh_eps(p, q, eps, DhMode::Exact).value;
      // the spectrum quantile shrinks, the testing exponent grows
      CHECK(ds <= prev_ds + 1e-12);
      CHECK(dh + 1e-12 >= prev_dh);
      prev_ds = ds;
      prev_dh = dh;
    }
    CHECK(ds_eps(p, q, 0.3) <= dmax(p, q) + 1e-12);
  }
}

TEST_CASE("mixture identity for relative entropy") {
  Xoshiro256ss rng(38);
  for (int i = 0; i < 30; ++i) {
    auto q = oracles::random_simplex(rng, 6, 0.05);
    std::vector<std::vector<double>> parts;
    auto lambda = oracles::random_simplex(rng, 4);
    std::vector<double> mix(6, 0.0);
    for (int k = 0; k < 4; ++k) {
      parts.push_back(oracles::random_simplex(rng, 6, 0.05));
      for (size_t s = 0; s < 6; ++s) mix[s] += lambda[k] * parts[k][s];
    }
    double lhs = kl(mix, q);
    double rhs = 0.0;
    for (int k = 0; k < 4; ++k) rhs += lambda[k] * (kl(parts[k], q) - kl(parts[k], mix));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("l1 against the entropy gap") {
  Xoshiro256ss rng(39);
  for (int i = 0; i < 50; ++i) {
    auto p = oracles::random_simplex(rng, 6, 0.02);
    auto q = oracles::random_simplex(rng, 6, 0.02);
    double l1 = 2.0 * tv_exact(std::span<const double>(p), std::span<const double>(q));
    CHECK(l1 <= 2.0 * std::sqrt(kl(p, q)) + 1e-12);
  }
}

TEST_CASE("near distributions have controlled ratio tails") {
  Xoshiro256ss rng(40);
  for (int i = 0; i < 50; ++i) {
    auto p = oracles::random_simplex(rng, 6, 0.02);
    auto other = oracles::random_simplex(rng, 6, 0.02);
    double mix = 0.2 * rng.next_double();
    std::vector<double> q(6);
    for (size_t s = 0; s < 6; ++s) q[s] = (1.0 - mix) * p[s] + mix * other[s];
    double eps = tv_exact(std::span<const double>(p), std::span<const double>(q));
    for (double delta : {0.3, 0.5, 0.7}) {
      double tail = 0.0;
      for (size_t s = 0; s < 6; ++s)
        if (p[s] > 0.0 && p[s] / q[s] >= 1.0 / delta) tail += p[s];
      CHECK(tail <= eps / (1.0 - delta) + 1e-12);
    }
  }
}

TEST_CASE("merging symbols never helps the tester") {
  Xoshiro256ss rng(41);
  for (int i = 0; i < 40; ++i) {
    size_t n = 6 + rng.next_below(7);
    auto p = oracles::random_simplex(rng, n);
    auto q = oracles::random_simplex(rng, n);
    size_t n2 = 2 + rng.next_below(4);
    std::vector<size_t> f(n);
    for (auto& v : f) v = rng.next_below(n2);
    std::vector<double> fp(n2, 0.0), fq(n2, 0.0);
    for (size_t s = 0; s < n; ++s) {
      fp[f[s]] += p[s];
      fq[f[s]] += q[s];
    }
    double eps = 0.05 + 0.3 * rng.next_double();
    CHECK(dh_eps(fp, fq, eps, DhMode::Exact).value <=
          dh_eps(p, q, eps, DhMode::Exact).value + 1e-12);
  }
}

TEST_CASE("information measures") {
  SUBCASE("shared uniform bit") {
    JointDist mz({Axis{"M", {"0", "1"}}, Axis{"Z", {"0", "1"}}}, {0.5, 0.0, 0.0, 0.5});
    CHECK(mutual_info(mz, {"M"}, {"Z"}) == doctest::Approx(1.0));
  }
  SUBCASE("three-way shared bit") {
    std::vector<double> t(8, 0.0);
    t[0] = 0.5;
    t[7] = 0.5;
    JointDist j({Axis{"Z", {"0", "1"}}, Axis{"M", {"0", "1"}}, Axis{"N", {"0", "1"}}}, t);
    CHECK(tripartite_info(j, {"Z"}, {"M"}, {"N"}) == doctest::Approx(2.0));
    CHECK(mutual_info(j, {"Z"}, {"M"}) == doctest::Approx(1.0));
    CHECK(cond_mutual_info(j, {"Z"}, {"M"}, {"N"}) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("independent triple") {
    JointDist j = product(product(JointDist({Axis{"A", {"0", "1"}}}, bern(0.3)),
                                  JointDist({Axis{"B", {"0", "1"}}}, bern(0.6))),
                          JointDist({Axis{"C", {"0", "1"}}}, bern(0.5)));
    CHECK(mutual_info(j, {"A"}, {"B"}) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(tripartite_info(j, {"A"}, {"B"}, {"C"}) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cond_mutual_info(j, {"A"}, {"B"}, {"C"}) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("iid spectrum estimates") {
  FiniteDist p3({"0", "1"}, {0.7, 0.3});
  FiniteDist p5({"0", "1"}, {0.5, 0.5});

  SUBCASE("n = 1 agrees with the exact value") {
    double exact = ds_eps(p3.probs, p5.probs, 0.1);
    QuantileEstimate est = ds_eps_iid_estimate(p3, p5, 1, 0.1, 20000, 5);
    CHECK(std::abs(est.estimate - exact) <= std::max(4.0 * est.std_error, 1e-9));
  }
  SUBCASE("identical arguments stay at zero") {
    QuantileEstimate est = ds_eps_iid_estimate(p3, p3, 20, 0.2, 2000, 6);
    CHECK(est.estimate == doctest::Approx(0.0));
  }
  SUBCASE("rate approaches the relative entropy") {
    QuantileEstimate est = ds_eps_iid_estimate(p3, p5, 500, 0.1, 50000, 7);
    CHECK(std::abs(est.estimate / 500.0 - 0.1187089) <= 0.1);
  }
  SUBCASE("exact convolution matches the dense product computation") {
    Xoshiro256ss rng(44);
    FiniteDist p = oracles::random_dist(rng, 3, 0.05);
    FiniteDist q = oracles::random_dist(rng, 3, 0.05);
    for (size_t n : {1, 2, 3}) {
      std::vector<double> pp = {1.0}, qq = {1.0};
      for (size_t i = 0; i < n; ++i) {
        std::vector<double> np, nq;
        for (double a : pp)
          for (double b : p.probs) np.push_back(a * b);
        for (double a : qq)
          for (double b : q.probs) nq.push_back(a * b);
        pp = np;
        qq = nq;
      }
      CHECK(ds_eps_iid_exact(p, q, n, 0.15) ==
            doctest::Approx(ds_eps(pp, qq, 0.15)).epsilon(1e-7));
    }
  }
}
