#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "oscl/analysis.hpp"

using namespace oscl;

namespace {

JointDist dsbc_pair(double flip) {
  std::vector<double> t = {0.5 * (1.0 - flip), 0.5 * flip, 0.5 * flip, 0.5 * (1.0 - flip)};
  return JointDist({Axis{"X", {"0", "1"}}, Axis{"Y", {"0", "1"}}}, t);
}

double h2(double p) { return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p); }

// random chain instance with spread-out kernels, so the helper rows stay
// away from the acceptance-count cap of the extension construction
JointDist spread_markov(Xoshiro256ss& rng, size_t xc, size_t yc, size_t mc) {
  return oracles::random_markov_xym(rng, xc, yc, mc, 0.55);
}

}  // namespace

TEST_CASE("task1_br_bound") {
  SUBCASE("independent message with the matched helper") {
    JointDist xy({Axis{"X", {"0", "1"}}, Axis{"Y", {"0", "1"}}}, {0.4, 0.1, 0.1, 0.4});
    JointDist p = product(xy, JointDist({Axis{"M", {"0", "1"}}}, {0.3, 0.7}));
    double bound = task1_br_bound(p, std::nullopt, 0.1, 0.25);
    CHECK(bound == doctest::Approx(2.0 * std::log2(4.0)));
  }
  SUBCASE("explicit canonical helper matches the default") {
    Xoshiro256ss rng(81);
    JointDist p = oracles::random_markov_xym(rng, 3, 3, 3, 0.1);
    JointDist p_ym = marginalize(p, {"Y", "M"});
    JointDist p_y = marginalize(p, {"Y"});
    std::vector<std::vector<double>> rows(3, std::vector<double>(3));
    for (size_t y = 0; y < 3; ++y)
      for (size_t m = 0; m < 3; ++m) rows[y][m] = p_ym.at_flat(y * 3 + m) / p_y.at_flat(y);
    CondKernel canonical(p.axes()[1], Axis{"Nk", {"0", "1", "2"}}, rows);
    CHECK(task1_br_bound(p, canonical, 0.1, 0.2) ==
          doctest::Approx(task1_br_bound(p, std::nullopt, 0.1, 0.2)));
  }
}

TEST_CASE("build_extension") {
  SUBCASE("uniform conditionals flatten completely") {
    JointDist p = product(JointDist({Axis{"X", {"0", "1"}}}, {0.25, 0.75}),
                          JointDist({Axis{"M", {"0", "1", "2"}}},
                                    {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    ExtensionBuild b = build_extension(p, 66);
    CHECK(b.d0_value == doctest::Approx(std::log2(3.0)));
    CHECK(b.snap_tv <= 1e-9);
    // the occupied E cells are equally likely
    JointDist p_e = marginalize(b.p_xme, {"E"});
    double occupied = 0.0;
    for (double v : p_e.table())
      if (v > 0.0) occupied += 1.0;
    for (double v : p_e.table())
      if (v > 0.0) CHECK(v == doctest::Approx(1.0 / occupied));
  }
  SUBCASE("quarter split at granularity four") {
    JointDist x({Axis{"X", {"0", "1"}}}, {0.5, 0.5});
    CondKernel k(Axis{"X", {"0", "1"}}, Axis{"M", {"0", "1"}},
                 {{0.75, 0.25}, {0.25, 0.75}});
    JointDist p = chain(x, "X", k);
    ExtensionBuild b = build_extension(p, 4);
    CHECK(b.K == 4);
    // support sizes 3 and 1 per (x, m)
    size_t support_m0_x0 = 0;
    for (uint64_t e = 0; e < b.K; ++e)
      if (b.p_xme.at_flat((0 * 2 + 0) * b.K + e) > 0.0) ++support_m0_x0;
    CHECK(support_m0_x0 == 3);
    JointDist back = marginalize(b.p_xme, {"X", "M"});
    CHECK(tv_exact(back, p) <= 1e-12);
  }
  SUBCASE("fine granularity reproduces the pair marginal to snapping accuracy") {
    Xoshiro256ss rng(86);
    for (int i = 0; i < 5; ++i) {
      JointDist p = oracles::random_joint(rng, {3, 3}, {"X", "M"}, 0.05);
      ExtensionBuild b = build_extension(p, uint64_t{1} << 16);
      JointDist back = marginalize(b.p_xme, {"X", "M"});
      CHECK(tv_exact(back, p) <= b.snap_tv + 1e-12);
      CHECK(b.snap_tv <= 1e-4);
      CHECK(b.d0_value == doctest::Approx(std::log2(3.0)));
    }
  }
  SUBCASE("deterministic message needs no extension") {
    JointDist x({Axis{"X", {"0", "1"}}}, {0.5, 0.5});
    CondKernel k(Axis{"X", {"0", "1"}}, Axis{"M", {"0", "1"}}, {{1.0, 0.0}, {0.0, 1.0}});
    ExtensionBuild b = build_extension(chain(x, "X", k), 64);
    CHECK(b.K == 1);
    CHECK(b.d0_value == doctest::Approx(1.0));
  }
}

TEST_CASE("extension inequality") {
  SUBCASE("uniform everything sits at zero margin") {
    JointDist xy = product(JointDist({Axis{"X", {"0", "1"}}}, {0.5, 0.5}),
                           JointDist({Axis{"Y", {"0", "1"}}}, {0.5, 0.5}));
    JointDist p = product(xy, JointDist({Axis{"M", {"0", "1"}}}, {0.5, 0.5}));
    ExtensionInequalityReport rep = verify_extension_inequality(p, std::nullopt, 0.1, 64);
    CHECK(rep.lhs == doctest::Approx(0.0));
    CHECK(rep.hypo1_exact);
    CHECK(rep.hypo1_lhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.hypo2_mass + 1e-12 >= 0.9);
    // the witness set realizes exactly log2|M| - lhs; the margin can only
    // gain from the greedy test being sharper
    CHECK(rep.dh_witness == doctest::Approx(1.0));
    CHECK(rep.margin >= -1e-9);
  }
  SUBCASE("random instances keep a non-negative margin") {
    Xoshiro256ss rng(82);
    int checked = 0, exact_identities = 0;
    for (int i = 0; i < 40 && checked < 20; ++i) {
      JointDist p = spread_markov(rng, 3, 3, 3);
      ExtensionInequalityReport rep = verify_extension_inequality(p, std::nullopt, 0.1, 64);
      ++checked;
      CHECK(rep.margin >= -1e-4);
      CHECK(rep.hypo2_mass + 1e-9 >= 1.0 - 0.1);
      CHECK(rep.d0 == doctest::Approx(std::log2(3.0)));
      if (!rep.capped) {
        CHECK(rep.hypo1_exact);
        CHECK(std::abs(rep.hypo1_lhs - rep.hypo1_rhs) <= 1e-12);
        ++exact_identities;
      }
    }
    CHECK(exact_identities >= 5);
  }
}

TEST_CASE("quantity chain around the two routes") {
  SUBCASE("degenerate message collapses everything to zero") {
    JointDist xy({Axis{"X", {"0", "1"}}, Axis{"Y", {"0", "1"}}}, {0.4, 0.1, 0.1, 0.4});
    JointDist p = chain(xy, "X",
                        CondKernel(Axis{"X", {"0", "1"}}, Axis{"M", {"c"}}, {{1.0}, {1.0}}));
    RouteChainReport rep = check_route_chain(p, 0.1, 64, 3);
    CHECK(rep.br == doctest::Approx(0.0));
    CHECK(rep.ext0 <= 1e-9);
    CHECK(std::abs(rep.ds_plain) <= 1e-9);
  }
  SUBCASE("random instances respect the ordering") {
    Xoshiro256ss rng(83);
    for (int i = 0; i < 10; ++i) {
      JointDist p = spread_markov(rng, 3, 3, 3);
      RouteChainReport rep = check_route_chain(p, 0.1, 64, 4);
      CHECK(rep.item5_margin >= -1e-6);       // br >= ext0
      CHECK(rep.item6_mid_margin >= -1e-9);   // ds_mid_ext >= ds_plain
      CHECK(rep.br <= rep.br_at_canonical + 1e-12);
      CHECK(rep.item6_br_margin >= -1e-9);    // ds_plain >= grid minimum
    }
  }
}

TEST_CASE("rate regions") {
  SUBCASE("two-sender region on the symmetric binary source") {
    auto region = rate_region_task8(dsbc_pair(0.1));
    CHECK(std::abs(region.at("R_a") - h2(0.1)) <= 1e-9);
    CHECK(std::abs(region.at("R_b") - h2(0.1)) <= 1e-9);
    CHECK(std::abs(region.at("sum") - (1.0 + h2(0.1))) <= 1e-9);
    // every coordinate dominates its entropy bound
    CHECK(region.at("R_a") + 1e-9 >= h2(0.1));
    CHECK(region.at("sum") + 1e-9 >= region.at("R_a"));
  }
  SUBCASE("independent sources reduce to plain entropies") {
    JointDist p = product(JointDist({Axis{"X", {"0", "1"}}}, {0.5, 0.5}),
                          JointDist({Axis{"Y", {"0", "1"}}}, {0.3, 0.7}));
    auto region = rate_region_task8(p);
    CHECK(region.at("R_a") == doctest::Approx(1.0));
    CHECK(region.at("R_b") == doctest::Approx(h2(0.3)));
  }
  SUBCASE("side-information region specializes when Z is trivial") {
    Xoshiro256ss rng(84);
    JointDist xy = oracles::random_joint(rng, {2, 2}, {"X", "Y"}, 0.1);
    CondKernel mk = oracles::random_kernel(rng, xy.axes()[0], "M", 2, 0.1);
    CondKernel nk = oracles::random_kernel(rng, xy.axes()[1], "N", 2, 0.1);
    JointDist with_mn = chain(chain(xy, "X", mk), "Y", nk);
    JointDist p = chain(with_mn, "X",
                        CondKernel(Axis{"X", {"0", "1"}}, Axis{"Z", {"z"}}, {{1.0}, {1.0}}));
    auto region = rate_region_task3(marginalize(p, {"X", "Y", "Z", "M", "N"}));
    JointDist flat = marginalize(p, {"X", "Y", "Z", "M", "N"});
    double direct_sum = mutual_info(flat, {"X"}, {"M"}) + mutual_info(flat, {"Y"}, {"N"}) -
                        mutual_info(flat, {"M"}, {"N"});
    CHECK(region.at("sum") == doctest::Approx(direct_sum).epsilon(1e-9));
    double ra_direct = mutual_info(flat, {"X"}, {"M"}) - mutual_info(flat, {"M"}, {"N"});
    CHECK(region.at("R_a") == doctest::Approx(ra_direct).epsilon(1e-9));
  }
  SUBCASE("independent everything zeroes the message regions") {
    JointDist p = product(product(product(JointDist({Axis{"X", {"0", "1"}}}, {0.5, 0.5}),
                                          JointDist({Axis{"Y", {"0", "1"}}}, {0.5, 0.5})),
                                  product(JointDist({Axis{"Z", {"0", "1"}}}, {0.5, 0.5}),
                                          JointDist({Axis{"M", {"0", "1"}}}, {0.5, 0.5}))),
                          JointDist({Axis{"N", {"0", "1"}}}, {0.5, 0.5}));
    auto r3 = rate_region_task3(p);
    CHECK(std::abs(r3.at("R_a")) <= 1e-9);
    CHECK(std::abs(r3.at("sum")) <= 1e-9);
    auto r5 = rate_region_task5(p);
    CHECK(std::abs(r5.at("R_b")) <= 1e-9);
    CHECK(std::abs(r5.at("sum")) <= 1e-9);
  }
  SUBCASE("helper region with an identity helper") {
    JointDist p = dsbc_pair(0.1);
    CondKernel ident(Axis{"Y", {"0", "1"}}, Axis{"N", {"0", "1"}}, {{1, 0}, {0, 1}});
    auto region = rate_region_task9(p, ident);
    CHECK(region.at("R_a") == doctest::Approx(h2(0.1)).epsilon(1e-9));
    CHECK(region.at("inner_R_b") == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("lossy region equals the conditional information of the test channel") {
    JointDist p = dsbc_pair(0.1);
    CondKernel test_channel(Axis{"X", {"0", "1"}}, Axis{"M", {"0", "1"}},
                            {{0.9, 0.1}, {0.1, 0.9}});
    auto region = rate_region_task7(p, test_channel);
    JointDist j = chain(p, "X", test_channel);
    CHECK(region.at("R") ==
          doctest::Approx(cond_mutual_info(j, {"X"}, {"M"}, {"Y"})).epsilon(1e-12));
  }
}

TEST_CASE("bound per symbol approaches the conditional information") {
  Xoshiro256ss rng(85);
  JointDist base = oracles::random_markov_xym(rng, 2, 2, 2, 0.2);
  const double eps = 0.1, delta = 0.25;
  double target = cond_mutual_info(base, {"X"}, {"M"}, {"Y"});

  SUBCASE("small blocks agree with the dense product computation") {
    for (size_t n : {1, 2, 3}) {
      // dense n-fold product of both the joint and the reference
      JointDist pn = base;
      JointDist qn;
      {
        JointDist p_y = marginalize(base, {"Y"});
        JointDist p_xy = marginalize(base, {"X", "Y"});
        JointDist p_ym = marginalize(base, {"Y", "M"});
        std::vector<double> q(base.cells());
        for (size_t x = 0; x < 2; ++x)
          for (size_t y = 0; y < 2; ++y)
            for (size_t m = 0; m < 2; ++m)
              q[(x * 2 + y) * 2 + m] = p_xy.at_flat(x * 2 + y) *
                                       p_ym.at_flat(y * 2 + m) / p_y.at_flat(y);
        qn = JointDist(base.axes(), q);
      }
      std::vector<double> pt = {1.0}, qt = {1.0};
      for (size_t i = 0; i < n; ++i) {
        std::vector<double> np, nq;
        for (size_t a = 0; a < pt.size(); ++a)
          for (size_t b = 0; b < 8; ++b) {
            np.push_back(pt[a] * pn.table()[b]);
            nq.push_back(qt[a] * qn.table()[b]);
          }
        pt = np;
        qt = nq;
      }
      double dense = ds_eps(pt, qt, eps) + 2.0 * std::log2(1.0 / delta);
      double conv = task1_br_bound_iid(base, std::nullopt, n, eps, delta);
      CHECK(conv == doctest::Approx(dense).epsilon(1e-7));
    }
  }
  SUBCASE("exact convolution tightens toward the rate") {
    double at1 = task1_br_bound_iid(base, std::nullopt, 1, eps, delta);
    double at8 = task1_br_bound_iid(base, std::nullopt, 8, eps, delta);
    CHECK(std::abs(at8 / 8.0 - target) <= std::abs(at1 - target) + 0.05);
  }
  SUBCASE("long blocks by sampling") {
    // flatten (X,Y,M) to one alphabet and reuse the block-quantile engine
    JointDist p_y = marginalize(base, {"Y"});
    JointDist p_xy = marginalize(base, {"X", "Y"});
    JointDist p_ym = marginalize(base, {"Y", "M"});
    std::vector<double> q(base.cells());
    for (size_t x = 0; x < 2; ++x)
      for (size_t y = 0; y < 2; ++y)
        for (size_t m = 0; m < 2; ++m)
          q[(x * 2 + y) * 2 + m] =
              p_xy.at_flat(x * 2 + y) * p_ym.at_flat(y * 2 + m) / p_y.at_flat(y);
    FiniteDist pf = base.to_finite_flat();
    FiniteDist qf(pf.labels, q);
    QuantileEstimate est = ds_eps_iid_estimate(pf, qf, 200, eps, 40000, 86);
    CHECK(std::abs(est.estimate / 200.0 - target) <= 0.1);
  }
}

TEST_CASE("four-party bound display") {
  SUBCASE("constant messages leave only the slack") {
    JointDist x1 = JointDist({Axis{"X1", {"0", "1"}}}, {0.5, 0.5});
    JointDist x2 = JointDist({Axis{"X2", {"0", "1"}}}, {0.4, 0.6});
    JointDist y1 = JointDist({Axis{"Y1", {"0", "1"}}}, {0.5, 0.5});
    JointDist y2 = JointDist({Axis{"Y2", {"0", "1"}}}, {0.5, 0.5});
    JointDist p = product(product(x1, x2), product(y1, y2));
    for (const char* name : {"M11", "M12", "M21", "M22"}) {
      const char* in = (name[1] == '1') ? "X1" : "X2";
      p = chain(p, in, CondKernel(p.axes()[p.axis_index(in)], Axis{name, {"c"}},
                                  {{1.0}, {1.0}}));
    }
    auto rows = task6_bound_display(p, 0.1, 0.2);
    double slack = 10.0 * std::log2(5.0);
    CHECK(rows.size() == 4 + 6 + 4 + 1);
    for (const auto& row : rows) CHECK(row.rhs <= slack + 1e-9);
  }
  SUBCASE("a symmetric instance gives symmetric rows") {
    // swapping the two senders and the two receivers maps the instance to
    // itself, so the R[1][1] and R[2][2] rows agree
    JointDist x1 = JointDist({Axis{"X1", {"0", "1"}}}, {0.5, 0.5});
    JointDist x2 = JointDist({Axis{"X2", {"0", "1"}}}, {0.5, 0.5});
    JointDist p = product(x1, x2);
    CondKernel noisy_a(Axis{"X1", {"0", "1"}}, Axis{"M11", {"0", "1"}},
                       {{0.9, 0.1}, {0.1, 0.9}});
    p = chain(p, "X1", noisy_a);
    p = chain(p, "X1", CondKernel(Axis{"X1", {"0", "1"}}, Axis{"M12", {"0", "1"}},
                                  {{0.7, 0.3}, {0.3, 0.7}}));
    p = chain(p, "X2", CondKernel(Axis{"X2", {"0", "1"}}, Axis{"M21", {"0", "1"}},
                                  {{0.7, 0.3}, {0.3, 0.7}}));
    p = chain(p, "X2", CondKernel(Axis{"X2", {"0", "1"}}, Axis{"M22", {"0", "1"}},
                                  {{0.9, 0.1}, {0.1, 0.9}}));
    p = chain(p, "X1", CondKernel(Axis{"X1", {"0", "1"}}, Axis{"Y1", {"0", "1"}},
                                  {{0.8, 0.2}, {0.2, 0.8}}));
    p = chain(p, "X2", CondKernel(Axis{"X2", {"0", "1"}}, Axis{"Y2", {"0", "1"}},
                                  {{0.8, 0.2}, {0.2, 0.8}}));
    auto rows = task6_bound_display(marginalize(p, {"X1", "X2", "M11", "M12", "M21", "M22",
                                                    "Y1", "Y2"}),
                                    0.1, 0.2);
    auto find = [&](const std::string& label) {
      for (const auto& row : rows)
        if (row.label == label) return row.rhs;
      return kInf;
    };
    CHECK(find("R[1][1]") == doctest::Approx(find("R[2][2]")).epsilon(1e-9));
    CHECK(find("R[1][2]") == doctest::Approx(find("R[2][1]")).epsilon(1e-9));
    // the quadruple row is present and numerically assembled
    double quad = find("R[1][1]+R[1][2]+R[2][1]+R[2][2]");
    CHECK(std::isfinite(quad));
  }
}
