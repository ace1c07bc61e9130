#include "oscl/decoding.hpp"

#include <cmath>

#include "oscl/parallel.hpp"

namespace oscl {

DenseTest build_test_from_dh(const JointDist& p_joint, const JointDist& q_reference,
                             size_t m_cells, double eps, DhMode mode,
                             HypothesisTestResult* detail) {
  if (m_cells == 0 || p_joint.cells() % m_cells != 0)
    throw ConfigError("build_test_from_dh: m_cells does not divide the joint");
  HypothesisTestResult r = dh_eps(p_joint, q_reference, eps, mode);
  DenseTest test;
  test.m_cells = m_cells;
  test.member = r.set.member;
  if (detail) *detail = std::move(r);
  return test;
}

DenseBipartiteTest build_test_from_thresholds(const BipartiteThresholds& th,
                                              std::span<const double> lr1,
                                              std::span<const double> lr2,
                                              std::span<const double> lr12, size_t side_cells,
                                              size_t m_cells, size_t n_cells) {
  size_t cells = side_cells * m_cells * n_cells;
  if (lr1.size() != cells || lr2.size() != cells || lr12.size() != cells)
    throw ConfigError("threshold test: ratio table size mismatch");
  DenseBipartiteTest test;
  test.m_cells = m_cells;
  test.n_cells = n_cells;
  test.member.assign(cells, 0);
  for (size_t i = 0; i < cells; ++i)
    test.member[i] = (lr1[i] >= th.t1 && lr2[i] >= th.t2 && lr12[i] >= th.t12) ? 1 : 0;
  return test;
}

double bipartite_premise_mass(const BipartiteThresholds& th, std::span<const double> p,
                              std::span<const double> lr1, std::span<const double> lr2,
                              std::span<const double> lr12) {
  if (p.size() != lr1.size() || p.size() != lr2.size() || p.size() != lr12.size())
    throw ConfigError("premise mass: table size mismatch");
  double mass = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (lr1[i] < th.t1 || lr2[i] < th.t2 || lr12[i] < th.t12) mass += p[i];
  }
  return mass;
}

UniBenchReport bench_unipartite(const JointDist& p_ym, size_t y_axis_count,
                                const FiniteDist& prior, double eps, double delta, int log_slots,
                                DhMode mode, size_t trials, uint64_t seed, size_t workers) {
  if (trials == 0) throw ConfigError("bench_unipartite: trials must be positive");
  SplitCore core = make_split_core(p_ym, y_axis_count, prior);

  // flat p_YM and the reference p_Y x prior
  std::vector<double> pflat(core.x_cells * core.m_cells), qflat(pflat.size());
  for (size_t y = 0; y < core.x_cells; ++y)
    for (size_t m = 0; m < core.m_cells; ++m) {
      pflat[y * core.m_cells + m] = core.p_x[y] * core.cond_at(y, m);
      qflat[y * core.m_cells + m] = core.p_x[y] * core.prior[m];
    }
  HypothesisTestResult dh = dh_eps(std::span<const double>(pflat),
                                   std::span<const double>(qflat), eps, mode);

  UniBenchReport rep;
  rep.log_slots = log_slots;
  rep.dh_value = dh.value;
  rep.trials = trials;
  rep.bound_error = eps + delta;
  rep.bound_tv = eps + 2.0 * delta;

  const size_t slots = size_t{1} << log_slots;
  const size_t m_cells = core.m_cells;
  DenseTest test{m_cells, dh.set.member};

  struct Out {
    uint32_t y, m_out;
    uint8_t wrong, bottom;
  };
  auto outs = run_trials<Out>(trials, workers, [&](size_t t) {
    Xoshiro256ss rng = trial_stream(seed, t);
    thread_local std::vector<uint32_t> cw;
    cw.resize(slots);
    size_t j = rng.next_below(slots);
    size_t y = core.x_sampler(rng);
    for (size_t i = 0; i < slots; ++i)
      cw[i] = (i == j) ? static_cast<uint32_t>(core.cond_samplers[y](rng))
                       : static_cast<uint32_t>(core.prior_sampler(rng));
    UniDecodeResult d = decode_unipartite(y, std::span<const uint32_t>(cw), test);
    Out o;
    o.y = static_cast<uint32_t>(y);
    o.m_out = cw[d.index];
    o.wrong = d.index != j ? 1 : 0;  // bottom already mapped to the first slot
    o.bottom = d.bottom ? 1 : 0;
    return o;
  });

  size_t wrong = 0, bottom = 0;
  std::vector<double> emp(core.x_cells * m_cells, 0.0);
  for (const auto& o : outs) {
    wrong += o.wrong;
    bottom += o.bottom;
    emp[o.y * m_cells + o.m_out] += 1.0 / double(trials);
  }
  rep.error_rate = double(wrong) / double(trials);
  rep.bottom_rate = double(bottom) / double(trials);
  rep.error_std_error =
      std::sqrt(std::max(rep.error_rate * (1.0 - rep.error_rate), 1.0 / double(trials)) /
                double(trials));
  rep.tv_plugin = tv_exact(std::span<const double>(emp), std::span<const double>(pflat));
  return rep;
}

BiBenchReport bench_bipartite(const JointDist& p_ymn, size_t y_axis_count, size_t m_axis_count,
                              const FiniteDist& prior_u, const FiniteDist& prior_v, double eps,
                              double delta, int log_slots_m, int log_slots_n, size_t trials,
                              uint64_t seed, size_t workers) {
  if (trials == 0) throw ConfigError("bench_bipartite: trials must be positive");
  BipartiteSplitSpec spec = make_bipartite_split_spec(p_ymn, y_axis_count, m_axis_count, prior_u,
                                                      prior_v, log_slots_m, log_slots_n);

  // pointwise log ratios over (y, m, n)
  size_t cells = spec.x_cells * spec.m_cells * spec.n_cells;
  std::vector<double> p(cells), lr1(cells), lr2(cells), lr12(cells);
  std::vector<double> p_yn(spec.x_cells * spec.n_cells, 0.0), p_ym(spec.x_cells * spec.m_cells, 0.0);
  for (size_t y = 0; y < spec.x_cells; ++y)
    for (size_t m = 0; m < spec.m_cells; ++m)
      for (size_t n = 0; n < spec.n_cells; ++n) {
        double v = spec.p_x[y] * spec.cond_at(y, m, n);
        p[(y * spec.m_cells + m) * spec.n_cells + n] = v;
        p_yn[y * spec.n_cells + n] += v;
        p_ym[y * spec.m_cells + m] += v;
      }
  auto log_or = [](double num, double den) {
    if (num <= 0.0) return -kInf;
    if (den <= 0.0) return kInf;
    return std::log2(num / den);
  };
  for (size_t y = 0; y < spec.x_cells; ++y)
    for (size_t m = 0; m < spec.m_cells; ++m)
      for (size_t n = 0; n < spec.n_cells; ++n) {
        size_t i = (y * spec.m_cells + m) * spec.n_cells + n;
        lr1[i] = log_or(p[i], spec.prior_u[m] * p_yn[y * spec.n_cells + n]);
        lr2[i] = log_or(p[i], p_ym[y * spec.m_cells + m] * spec.prior_v[n]);
        lr12[i] = log_or(p[i], spec.p_x[y] * spec.prior_u[m] * spec.prior_v[n]);
      }

  BipartiteThresholds th = BipartiteThresholds::from_rates(log_slots_m, log_slots_n, delta);
  DenseBipartiteTest test = build_test_from_thresholds(th, lr1, lr2, lr12, spec.x_cells,
                                                       spec.m_cells, spec.n_cells);
  BiBenchReport rep;
  rep.log_slots_m = log_slots_m;
  rep.log_slots_n = log_slots_n;
  rep.trials = trials;
  rep.premise_mass = bipartite_premise_mass(th, p, lr1, lr2, lr12);
  rep.premise_ok = rep.premise_mass <= eps;
  rep.bound_pair_error = eps + 3.0 * delta;

  struct Out {
    uint8_t wrong, bottom;
  };
  auto outs = run_trials<Out>(trials, workers, [&](size_t t) {
    Xoshiro256ss rng = trial_stream(seed, t);
    BipartiteDraw draw = bipartite_split_sample(spec, rng);
    BiDecodeResult d = decode_bipartite(draw.x, std::span<const uint32_t>(draw.m_codewords),
                                        std::span<const uint32_t>(draw.n_codewords), test);
    Out o;
    o.wrong = (d.j != draw.j || d.k != draw.k) ? 1 : 0;
    o.bottom = d.bottom ? 1 : 0;
    return o;
  });
  size_t wrong = 0, bottom = 0;
  for (const auto& o : outs) {
    wrong += o.wrong;
    bottom += o.bottom;
  }
  rep.pair_error_rate = double(wrong) / double(trials);
  rep.bottom_rate = double(bottom) / double(trials);
  rep.pair_error_std_error = std::sqrt(
      std::max(rep.pair_error_rate * (1.0 - rep.pair_error_rate), 1.0 / double(trials)) /
      double(trials));
  return rep;
}

}  // namespace oscl
