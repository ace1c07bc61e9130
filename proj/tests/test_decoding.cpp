#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "oscl/decoding.hpp"

using namespace oscl;

namespace {

// correlated pair over |Y| = |M| = 4 with a skewed side marginal; the
// decoy prior is pushed away from the likely symbols so the testing
// divergence leaves room for more than one slot
JointDist skewed_pair(Xoshiro256ss& rng, double stay) {
  std::vector<double> p_y = oracles::random_simplex(rng, 4, 0.3);
  std::sort(p_y.begin(), p_y.end(), std::greater<double>());
  std::vector<double> t(16, 0.0);
  for (size_t y = 0; y < 4; ++y)
    for (size_t m = 0; m < 4; ++m) t[y * 4 + m] = p_y[y] * (m == y ? stay : (1.0 - stay) / 3.0);
  return JointDist({Axis{"Y", {"0", "1", "2", "3"}}, Axis{"M", {"0", "1", "2", "3"}}}, t);
}

FiniteDist skew_prior() { return FiniteDist({"0", "1", "2", "3"}, {0.02, 0.06, 0.22, 0.70}); }

}  // namespace

TEST_CASE("decoder scans in slot order") {
  SUBCASE("single passing slot") {
    auto accept = [](size_t, uint32_t) { return true; };
    std::vector<uint32_t> cw = {3};
    UniDecodeResult r = decode_unipartite(size_t{0}, std::span<const uint32_t>(cw), accept);
    CHECK(r.index == 0);
    CHECK(!r.bottom);
  }
  SUBCASE("full test returns the first slot") {
    auto accept = [](size_t, uint32_t) { return true; };
    std::vector<uint32_t> cw = {3, 1, 2, 0};
    CHECK(decode_unipartite(size_t{0}, std::span<const uint32_t>(cw), accept).index == 0);
  }
  SUBCASE("empty test reports bottom") {
    auto accept = [](size_t, uint32_t) { return false; };
    std::vector<uint32_t> cw = {3, 1};
    UniDecodeResult r = decode_unipartite(size_t{0}, std::span<const uint32_t>(cw), accept);
    CHECK(r.bottom);
    CHECK(r.index == 0);
  }
  SUBCASE("deterministic on identical inputs") {
    Xoshiro256ss rng(61);
    JointDist p_ym = skewed_pair(rng, 0.9);
    HypothesisTestResult dh;
    DenseTest test = build_test_from_dh(
        p_ym,
        product(marginalize(p_ym, {"Y"}), JointDist::from_finite(skew_prior(), "M")), 4, 0.1,
        DhMode::Exact, &dh);
    std::vector<uint32_t> cw = {2, 0, 1, 3};
    auto a = decode_unipartite(size_t{1}, std::span<const uint32_t>(cw), test);
    auto b = decode_unipartite(size_t{1}, std::span<const uint32_t>(cw), test);
    CHECK(a.index == b.index);
    CHECK(a.bottom == b.bottom);
  }
}

TEST_CASE("bipartite decoder basics") {
  SUBCASE("single passing pair") {
    auto accept = [](size_t, uint32_t, uint32_t) { return true; };
    std::vector<uint32_t> m = {1}, n = {2};
    BiDecodeResult r = decode_bipartite(size_t{0}, std::span<const uint32_t>(m),
                                        std::span<const uint32_t>(n), accept);
    CHECK(r.j == 0);
    CHECK(r.k == 0);
    CHECK(!r.bottom);
  }
  SUBCASE("thresholds at minus infinity accept the first pair") {
    BipartiteThresholds th{-kInf, -kInf, -kInf};
    std::vector<double> lr(8, 0.0);
    DenseBipartiteTest test = build_test_from_thresholds(th, lr, lr, lr, 2, 2, 2);
    std::vector<uint32_t> m = {1, 0}, n = {0, 1};
    BiDecodeResult r = decode_bipartite(size_t{1}, std::span<const uint32_t>(m),
                                        std::span<const uint32_t>(n), test);
    CHECK(r.j == 0);
    CHECK(r.k == 0);
  }
  SUBCASE("thresholds at plus infinity reject everything") {
    BipartiteThresholds th{kInf, kInf, kInf};
    std::vector<double> lr(8, 0.0);
    DenseBipartiteTest test = build_test_from_thresholds(th, lr, lr, lr, 2, 2, 2);
    std::vector<uint32_t> m = {1, 0}, n = {0, 1};
    CHECK(decode_bipartite(size_t{1}, std::span<const uint32_t>(m),
                           std::span<const uint32_t>(n), test)
              .bottom);
  }
}

TEST_CASE("tests from the divergence optimizer") {
  SUBCASE("eps = 0 keeps the support") {
    JointDist p({Axis{"Y", {"0", "1"}}, Axis{"M", {"0", "1"}}}, {0.4, 0.1, 0.1, 0.4});
    JointDist q = product(marginalize(p, {"Y"}), marginalize(p, {"M"}));
    HypothesisTestResult dh;
    DenseTest test = build_test_from_dh(p, q, 2, 0.0, DhMode::Exact, &dh);
    CHECK(dh.p_mass == doctest::Approx(1.0));
    for (size_t i = 0; i < 4; ++i) CHECK(test.member[i] == 1);
  }
  SUBCASE("the singleton-ratio set appears at eps = 0.2") {
    JointDist p({Axis{"Y", {"0"}}, Axis{"M", {"0", "1"}}}, {0.1, 0.9});
    JointDist q({Axis{"Y", {"0"}}, Axis{"M", {"0", "1"}}}, {0.5, 0.5});
    HypothesisTestResult dh;
    DenseTest test = build_test_from_dh(p, q, 2, 0.2, DhMode::Exact, &dh);
    CHECK(dh.value == doctest::Approx(1.0));
    CHECK(test.member[1] == 1);
    CHECK(test.member[0] == 0);
  }
  SUBCASE("greedy q-mass dominates the exhaustive optimum") {
    Xoshiro256ss rng(62);
    for (int i = 0; i < 25; ++i) {
      auto p = oracles::random_simplex(rng, 12);
      auto q = oracles::random_simplex(rng, 12);
      double eps = 0.05 + 0.3 * rng.next_double();
      HypothesisTestResult greedy = dh_eps(p, q, eps, DhMode::Greedy);
      auto oracle = oracles::dh_bruteforce(p, q, eps);
      CHECK(greedy.q_mass + 1e-12 >= oracle.q_mass);
      CHECK(greedy.value <= oracle.value + 1e-12);
    }
  }
}

TEST_CASE("threshold test mass against exhaustive enumeration") {
  // doubly symmetric bit-string pairs, n = 6: the acceptance mass of the
  // threshold test matches a direct scan over all 2^12 pairs and the
  // binomial closed form
  const int nb = 6;
  const double flip = 0.1;
  const size_t side = size_t{1} << nb;
  const size_t cells = side * side;
  std::vector<double> p(cells), lr1(cells), lr2(cells), lr12(cells);
  for (size_t m = 0; m < side; ++m)
    for (size_t n = 0; n < side; ++n) {
      int k = __builtin_popcount(unsigned(m ^ n));
      double pj = std::pow(0.5, nb) * std::pow(flip, k) * std::pow(1.0 - flip, nb - k);
      size_t i = m * side + n;
      p[i] = pj;
      double lcond = double(nb) + k * std::log2(flip) + (nb - k) * std::log2(1.0 - flip);
      lr1[i] = lcond;
      lr2[i] = lcond;
      lr12[i] = lcond;
    }
  BipartiteThresholds th = BipartiteThresholds::from_rates(2, 2, 0.3);
  DenseBipartiteTest test = build_test_from_thresholds(th, lr1, lr2, lr12, 1, side, side);
  double test_mass = 0.0;
  for (size_t i = 0; i < cells; ++i)
    if (test.member[i]) test_mass += p[i];
  double premise = bipartite_premise_mass(th, p, lr1, lr2, lr12);
  CHECK(test_mass == doctest::Approx(1.0 - premise).epsilon(1e-12));

  double binom = 0.0;
  {
    double v = std::pow(1.0 - flip, nb);
    for (int k = 0; k <= nb; ++k) {
      double lcond = double(nb) + k * std::log2(flip) + (nb - k) * std::log2(1.0 - flip);
      if (lcond < th.t1 || lcond < th.t2 || lcond < th.t12) binom += v;
      v *= double(nb - k) / double(k + 1) * (flip / (1.0 - flip));
    }
  }
  CHECK(premise == doctest::Approx(binom).epsilon(1e-9));
}

TEST_CASE("unipartite bench meets the positional guarantee") {
  Xoshiro256ss rng(63);
  const double eps = 0.1, delta = 0.3;
  int meaningful = 0;
  for (int i = 0; i < 4; ++i) {
    JointDist p_ym = skewed_pair(rng, 0.9);
    FiniteDist prior = skew_prior();
    std::vector<double> pflat = p_ym.table(), qflat(16);
    JointDist p_y = marginalize(p_ym, {"Y"});
    for (size_t y = 0; y < 4; ++y)
      for (size_t m = 0; m < 4; ++m) qflat[y * 4 + m] = p_y.at_flat(y) * prior.probs[m];
    double dh = dh_eps(pflat, qflat, eps, DhMode::Exact).value;
    int R = int(std::floor(std::max(dh - std::log2(1.0 / delta), 0.0)));
    if (R >= 1) ++meaningful;
    UniBenchReport rep =
        bench_unipartite(p_ym, 1, prior, eps, delta, R, DhMode::Exact, 10000, 900 + i, 2);
    CHECK(rep.error_rate <= rep.bound_error + 4.0 * rep.error_std_error);
    CHECK(rep.tv_plugin <= rep.bound_tv + 0.02);
  }
  CHECK(meaningful >= 2);
}

TEST_CASE("decoded pair distribution stays near the source") {
  Xoshiro256ss rng(68);
  JointDist p_ym = skewed_pair(rng, 0.93);
  FiniteDist prior = skew_prior();
  std::vector<double> pflat = p_ym.table(), qflat(16);
  JointDist p_y = marginalize(p_ym, {"Y"});
  for (size_t y = 0; y < 4; ++y)
    for (size_t m = 0; m < 4; ++m) qflat[y * 4 + m] = p_y.at_flat(y) * prior.probs[m];
  double dh = dh_eps(pflat, qflat, 0.1, DhMode::Exact).value;
  int R = int(std::floor(std::max(dh - std::log2(1.0 / 0.25), 0.0)));
  UniBenchReport rep = bench_unipartite(p_ym, 1, prior, 0.1, 0.25, R, DhMode::Exact,
                                        100000, 69, 2);
  CHECK(rep.tv_plugin <= 0.1 + 2.0 * 0.25 + 0.02);
}

TEST_CASE("larger tests never create new misses") {
  // enlarging the acceptance set can only turn bottoms into decodes
  Xoshiro256ss rng(64);
  JointDist p_ym = skewed_pair(rng, 0.85);
  FiniteDist prior = skew_prior();
  SplitCore core = make_split_core(p_ym, 1, prior);
  std::vector<double> pflat = p_ym.table(), qflat(16);
  JointDist p_y = marginalize(p_ym, {"Y"});
  for (size_t y = 0; y < 4; ++y)
    for (size_t m = 0; m < 4; ++m) qflat[y * 4 + m] = p_y.at_flat(y) * prior.probs[m];
  HypothesisTestResult small = dh_eps(pflat, qflat, 0.2, DhMode::Exact);
  HypothesisTestResult large = dh_eps(pflat, qflat, 0.02, DhMode::Exact);
  DenseTest t_small{4, small.set.member}, t_large{4, large.set.member};
  Xoshiro256ss trial_rng(65);
  size_t bottom_small = 0, bottom_large = 0;
  for (int t = 0; t < 4000; ++t) {
    size_t j = trial_rng.next_below(4);
    size_t y = core.x_sampler(trial_rng);
    std::vector<uint32_t> cw(4);
    for (size_t s = 0; s < 4; ++s)
      cw[s] = (s == j) ? uint32_t(core.cond_samplers[y](trial_rng))
                       : uint32_t(core.prior_sampler(trial_rng));
    bottom_small += decode_unipartite(y, std::span<const uint32_t>(cw), t_small).bottom;
    bottom_large += decode_unipartite(y, std::span<const uint32_t>(cw), t_large).bottom;
  }
  CHECK(bottom_large <= bottom_small);
}

TEST_CASE("bipartite bench meets the pair guarantee") {
  // product-structured instance: y uniform bits, m and n independent noisy
  // copies; rates picked by exact premise scan
  const int nb = 16;
  const double q1 = 0.03, q2 = 0.05;
  const double eps = 0.1, delta = 0.15;

  auto premise_at = [&](int r1, int r2) {
    BipartiteThresholds th = BipartiteThresholds::from_rates(r1, r2, delta);
    double mass = 0.0;
    double v1 = std::pow(1.0 - q1, nb);
    for (int k1 = 0; k1 <= nb; ++k1) {
      double lr1 = double(nb) + k1 * std::log2(q1) + (nb - k1) * std::log2(1.0 - q1);
      double v2 = std::pow(1.0 - q2, nb);
      for (int k2 = 0; k2 <= nb; ++k2) {
        double lr2 = double(nb) + k2 * std::log2(q2) + (nb - k2) * std::log2(1.0 - q2);
        double lr12 = lr1 + lr2;
        if (lr1 < th.t1 || lr2 < th.t2 || lr12 < th.t12) mass += v1 * v2;
        v2 *= double(nb - k2) / double(k2 + 1) * (q2 / (1.0 - q2));
      }
      v1 *= double(nb - k1) / double(k1 + 1) * (q1 / (1.0 - q1));
    }
    return mass;
  };
  int r1 = 0, r2 = 0;
  while (premise_at(r1 + 1, r2) <= eps && r1 < 8) ++r1;
  while (premise_at(r1, r2 + 1) <= eps && r2 < 8) ++r2;
  double premise = premise_at(r1, r2);
  CHECK(premise <= eps);
  CHECK(r1 + r2 >= 2);  // a non-trivial slot grid

  BipartiteThresholds th = BipartiteThresholds::from_rates(r1, r2, delta);
  auto accept = [&](size_t y, uint32_t m, uint32_t n) {
    int k1 = __builtin_popcount(unsigned(m ^ uint32_t(y)));
    int k2 = __builtin_popcount(unsigned(n ^ uint32_t(y)));
    double lr1 = double(nb) + k1 * std::log2(q1) + (nb - k1) * std::log2(1.0 - q1);
    double lr2 = double(nb) + k2 * std::log2(q2) + (nb - k2) * std::log2(1.0 - q2);
    return lr1 >= th.t1 && lr2 >= th.t2 && lr1 + lr2 >= th.t12;
  };

  const size_t trials = 8000;
  size_t wrong = 0;
  Xoshiro256ss rng(66);
  std::vector<uint32_t> mcw(size_t{1} << r1), ncw(size_t{1} << r2);
  for (size_t t = 0; t < trials; ++t) {
    uint32_t y = uint32_t(rng.next_below(uint64_t{1} << nb));
    uint32_t m = y, n = y;
    for (int b = 0; b < nb; ++b) {
      if (rng.next_double() < q1) m ^= (uint32_t{1} << b);
      if (rng.next_double() < q2) n ^= (uint32_t{1} << b);
    }
    size_t j = rng.next_below(mcw.size());
    size_t k = rng.next_below(ncw.size());
    for (size_t s = 0; s < mcw.size(); ++s)
      mcw[s] = (s == j) ? m : uint32_t(rng.next_below(uint64_t{1} << nb));
    for (size_t s = 0; s < ncw.size(); ++s)
      ncw[s] = (s == k) ? n : uint32_t(rng.next_below(uint64_t{1} << nb));
    BiDecodeResult d = decode_bipartite(size_t(y), std::span<const uint32_t>(mcw),
                                        std::span<const uint32_t>(ncw), accept);
    wrong += (d.bottom || d.j != j || d.k != k) ? 1 : 0;
  }
  double rate = double(wrong) / double(trials);
  double se = std::sqrt(std::max(rate * (1.0 - rate), 1.0 / double(trials)) / double(trials));
  CHECK(rate <= eps + 3.0 * delta + 4.0 * se);
}

TEST_CASE("dense bipartite bench on a small joint") {
  Xoshiro256ss rng(67);
  JointDist p_ymn = oracles::random_joint(rng, {3, 3, 3}, {"Y", "M", "N"}, 0.1);
  FiniteDist u = marginalize(p_ymn, {"M"}).to_finite();
  FiniteDist v = marginalize(p_ymn, {"N"}).to_finite();
  BiBenchReport rep = bench_bipartite(p_ymn, 1, 1, u, v, 0.2, 0.2, 1, 1, 4000, 68, 2);
  CHECK(rep.premise_mass >= 0.0);
  if (rep.premise_ok)
    CHECK(rep.pair_error_rate <= rep.bound_pair_error + 4.0 * rep.pair_error_std_error);
}
