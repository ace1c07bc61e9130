#include <algorithm>
#include <chrono>
#include <cmath>

#include "oscl/parallel.hpp"
#include "oscl/protocols.hpp"

namespace oscl {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

JointDist reorder(const JointDist& j, const std::vector<std::string>& order) {
  if (order.size() != j.rank()) throw ConfigError("reorder: order must name every axis");
  return marginalize(j, order);
}

double freq_std_error(double rate, size_t trials) {
  return std::sqrt(std::max(rate * (1.0 - rate), 1.0 / double(trials)) / double(trials));
}

double log_or(double num, double den) {
  if (num <= 0.0) return -kInf;
  if (den <= 0.0) return kInf;
  return std::log2(num / den);
}

// One sender in a two-sender protocol. Identity senders transmit their
// source symbol through a uniform codebook (slot = any matching codeword,
// sampled sparsely); generic senders carry a message kernel and weight the
// slots by conditional/prior ratios.
struct Sender {
  bool identity = false;
  size_t alphabet = 0;  // message alphabet
  BinPlan plan;
  // generic path
  SplitCore core;
  // divergences backing the split-side constraint
  double ds_value = 0.0;

  size_t slots() const { return plan.total(); }
};

struct SideDraw {
  size_t j = 0;
  size_t bin_first = 0;
  bool degenerate = false;
};

// Fills `bin` with the codewords of the chosen slot's bin and returns the
// slot. Draw order is fixed so reports are worker-count independent.
SideDraw draw_side(const Sender& s, size_t source, Xoshiro256ss& rng,
                   std::vector<uint32_t>& bin, std::vector<uint32_t>& scratch,
                   std::vector<uint32_t>& positions) {
  SideDraw out;
  const size_t slots = s.slots();
  bin.resize(s.plan.bin_size());
  if (s.identity) {
    // matches ~ Binomial(slots, 1/alphabet), positions a uniform subset
    uint64_t c = binomial_sample(rng, slots, 1.0 / double(s.alphabet));
    positions.clear();
    if (c > 0) {
      positions.reserve(c);
      while (positions.size() < c) {
        uint32_t cand = uint32_t(rng.next_below(slots));
        if (std::find(positions.begin(), positions.end(), cand) == positions.end())
          positions.push_back(cand);
      }
      std::sort(positions.begin(), positions.end());
      out.j = positions[rng.next_below(positions.size())];
    } else {
      out.degenerate = true;
      out.j = rng.next_below(slots);
    }
    out.bin_first = s.plan.first_of(s.plan.bin_of(out.j));
    for (size_t i = 0; i < s.plan.bin_size(); ++i) {
      size_t slot = out.bin_first + i;
      bool is_match = !out.degenerate &&
                      std::binary_search(positions.begin(), positions.end(), uint32_t(slot));
      if (is_match) {
        bin[i] = uint32_t(source);
      } else {
        uint64_t v = rng.next_below(s.alphabet - 1);
        if (v >= source) ++v;
        bin[i] = uint32_t(v);
      }
    }
    return out;
  }
  scratch.resize(slots);
  for (size_t i = 0; i < slots; ++i)
    scratch[i] = uint32_t(s.core.prior_sampler(rng));
  out.j = sample_slot_by_weight(s.core, source, scratch, rng, &out.degenerate);
  out.bin_first = s.plan.first_of(s.plan.bin_of(out.j));
  for (size_t i = 0; i < s.plan.bin_size(); ++i) bin[i] = scratch[out.bin_first + i];
  return out;
}

Sender make_identity_sender(size_t alphabet, BinPlan plan) {
  Sender s;
  s.identity = true;
  s.alphabet = alphabet;
  s.plan = plan;
  s.ds_value = std::log2(double(alphabet));  // Ds^0(p_XX || p_X x uniform)
  return s;
}

Sender make_generic_sender(const JointDist& base_source_msg, const FiniteDist& prior,
                           BinPlan plan, double eta) {
  Sender s;
  s.identity = false;
  s.plan = plan;
  s.core = make_split_core(base_source_msg, 1, prior);
  s.alphabet = s.core.m_cells;
  std::vector<double> p(s.core.x_cells * s.core.m_cells), q(p.size());
  for (size_t x = 0; x < s.core.x_cells; ++x)
    for (size_t m = 0; m < s.core.m_cells; ++m) {
      p[x * s.core.m_cells + m] = s.core.p_x[x] * s.core.cond_at(x, m);
      q[x * s.core.m_cells + m] = s.core.p_x[x] * s.core.prior[m];
    }
  s.ds_value = ds_eps(p, q, eta);
  return s;
}

// Shared machinery for tasks 2/3/8/9: two senders, one receiver, threshold
// decoding over (side, m, n) inside the announced bin pair.
struct TwoSenderInstance {
  Sender alice, bob;
  DenseBipartiteTest test;
  BipartiteThresholds thresholds;
  double premise_mass = 0.0;
  size_t side_cells = 1;
};

struct TwoSenderOut {
  uint32_t src_a, src_b, side, m_out, n_out;
  uint8_t bottom, degenerate, wire_a, wire_b;
};

template <typename SourceFn>
std::vector<TwoSenderOut> run_two_sender(const TwoSenderInstance& inst, size_t trials,
                                         size_t workers, uint64_t seed, SourceFn&& draw_source) {
  return run_trials<TwoSenderOut>(trials, workers, [&](size_t t) {
    Xoshiro256ss rng = trial_stream(seed, t);
    thread_local std::vector<uint32_t> bin_a, bin_b, scratch, positions;
    // source draw yields (alice source, bob source, receiver side info)
    auto [sa, sb, side] = draw_source(rng);
    SideDraw da = draw_side(inst.alice, sa, rng, bin_a, scratch, positions);
    SideDraw db = draw_side(inst.bob, sb, rng, bin_b, scratch, positions);
    BiDecodeResult d = decode_bipartite(side, std::span<const uint32_t>(bin_a),
                                        std::span<const uint32_t>(bin_b), inst.test);
    TwoSenderOut o;
    o.src_a = uint32_t(sa);
    o.src_b = uint32_t(sb);
    o.side = uint32_t(side);
    o.m_out = bin_a[d.j];
    o.n_out = bin_b[d.k];
    o.bottom = d.bottom ? 1 : 0;
    o.degenerate = (da.degenerate || db.degenerate) ? 1 : 0;
    o.wire_a = uint8_t(inst.alice.plan.log_bins);  // the announced bin index
    o.wire_b = uint8_t(inst.bob.plan.log_bins);
    return o;
  });
}

void fill_two_sender_report(ProtocolReport& rep, const TwoSenderInstance& inst,
                            const std::vector<TwoSenderOut>& outs) {
  size_t bottoms = 0, degenerates = 0;
  int wire_a = 0, wire_b = 0;
  for (const auto& o : outs) {
    bottoms += o.bottom;
    degenerates += o.degenerate;
    wire_a = std::max(wire_a, int(o.wire_a));
    wire_b = std::max(wire_b, int(o.wire_b));
  }
  if (wire_a != inst.alice.plan.log_bins || wire_b != inst.bob.plan.log_bins)
    throw NumericError("two-sender run: wire bit count drifted from the configured rates");
  rep.trials = outs.size();
  rep.abort_rates["decoder_bottom"] = double(bottoms) / double(outs.size());
  rep.abort_rates["encoder_degenerate"] = double(degenerates) / double(outs.size());
  rep.comm_bits["alice_to_receiver"] = wire_a;
  rep.comm_bits["bob_to_receiver"] = wire_b;
  rep.rates["R_a"] = inst.alice.plan.log_bins;
  rep.rates["r_a"] = inst.alice.plan.log_bin_size;
  rep.rates["R_b"] = inst.bob.plan.log_bins;
  rep.rates["r_b"] = inst.bob.plan.log_bin_size;
  rep.values["premise_mass"] = inst.premise_mass;
  rep.values["threshold_t1"] = inst.thresholds.t1;
  rep.values["threshold_t2"] = inst.thresholds.t2;
  rep.values["threshold_t12"] = inst.thresholds.t12;
}

}  // namespace

// --------------------------------------------------------------------------
// Task 2
// --------------------------------------------------------------------------

ProtocolReport run_task2(const Task2Config& cfg) {
  Stopwatch watch;
  if (cfg.trials == 0) throw ConfigError("task2: trials must be positive");
  JointDist p = reorder(cfg.p_xymn, {"X", "Y", "M", "N"});
  if (!is_markov(p, {"M"}, {"X"}, {"Y", "N"}, 1e-9) ||
      !is_markov(p, {"N"}, {"Y"}, {"X", "M"}, 1e-9))
    throw ConfigError("task2: the chain M-X-Y-N does not hold");
  const size_t xc = p.axis_size(0), yc = p.axis_size(1), mc = p.axis_size(2), nc = p.axis_size(3);

  FiniteDist s_prior = cfg.prior_s ? *cfg.prior_s : marginalize(p, {"M"}).to_finite();
  FiniteDist t_prior = cfg.prior_t ? *cfg.prior_t : marginalize(p, {"N"}).to_finite();

  JointDist p_xm = reorder(marginalize(p, {"X", "M"}), {"X", "M"});
  JointDist p_yn = reorder(marginalize(p, {"Y", "N"}), {"Y", "N"});
  JointDist p_mn = reorder(marginalize(p, {"M", "N"}), {"M", "N"});
  JointDist p_m = marginalize(p, {"M"});
  JointDist p_n = marginalize(p, {"N"});

  // receiver-side divergences for the bin-size caps
  std::vector<double> mn = p_mn.table();
  std::vector<double> q1(mn.size()), q2(mn.size()), q3(mn.size());
  for (size_t m = 0; m < mc; ++m)
    for (size_t n = 0; n < nc; ++n) {
      q1[m * nc + n] = s_prior.probs[m] * p_n.at_flat(n);
      q2[m * nc + n] = p_m.at_flat(m) * t_prior.probs[n];
      q3[m * nc + n] = s_prior.probs[m] * t_prior.probs[n];
    }
  double dh1 = dh_eps(std::span<const double>(mn), std::span<const double>(q1), cfg.eps1,
                      cfg.mode).value;
  double dh2 = dh_eps(std::span<const double>(mn), std::span<const double>(q2), cfg.eps2,
                      cfg.mode).value;
  double dh3 = dh_eps(std::span<const double>(mn), std::span<const double>(q3), cfg.eps3,
                      cfg.mode).value;

  double ld = std::log2(1.0 / cfg.delta);
  double lq = std::log2(3.0 / cfg.delta);
  Sender alice, bob;
  int R_a = cfg.R_a, R_b = cfg.R_b, r_a = cfg.r_a, r_b = cfg.r_b;
  {
    // provisional senders just for the split values
    double ds_a = make_generic_sender(p_xm, s_prior, BinPlan{0, 0}, cfg.eta1).ds_value;
    double ds_b = make_generic_sender(p_yn, t_prior, BinPlan{0, 0}, cfg.eta2).ds_value;
    if (r_a < 0 || r_b < 0) {
      // preferred route: smallest bin sizes satisfying all five constraints
      if (R_a < 0)
        R_a = std::max(0, int(std::ceil(ds_a - std::max(dh1 - 2.0 * ld, 0.0) + 2.0 * lq +
                                        2.0 * ld - 1e-9)));
      if (R_b < 0)
        R_b = std::max(0, int(std::ceil(ds_b - std::max(dh2 - 2.0 * ld, 0.0) + 2.0 * lq +
                                        2.0 * ld - 1e-9)));
      BinSplit split = find_bin_split({R_a, R_b, ds_a, ds_b, dh1, dh2, dh3, cfg.delta, 24});
      if (!split.feasible)
        throw ConfigError("task2: no feasible bin split at the given rates");
      r_a = split.r_a;
      r_b = split.r_b;
    }
    if (R_a < 0 || R_b < 0) throw ConfigError("task2: explicit r requires explicit R");
    alice = make_generic_sender(p_xm, s_prior, BinPlan{R_a, r_a}, cfg.eta1);
    bob = make_generic_sender(p_yn, t_prior, BinPlan{R_b, r_b}, cfg.eta2);
  }
  if (R_a + r_a > cfg.slot_cap_log2 || R_b + r_b > cfg.slot_cap_log2)
    throw ConfigError("task2: slot count exceeds the per-trial cap");

  TwoSenderInstance inst;
  inst.alice = std::move(alice);
  inst.bob = std::move(bob);
  inst.thresholds = BipartiteThresholds::from_rates(r_a, r_b, cfg.delta);
  std::vector<double> lr1(mn.size()), lr2(mn.size()), lr12(mn.size());
  for (size_t i = 0; i < mn.size(); ++i) {
    lr1[i] = log_or(mn[i], q1[i]);
    lr2[i] = log_or(mn[i], q2[i]);
    lr12[i] = log_or(mn[i], q3[i]);
  }
  inst.test = build_test_from_thresholds(inst.thresholds, lr1, lr2, lr12, 1, mc, nc);
  inst.premise_mass = bipartite_premise_mass(inst.thresholds, mn, lr1, lr2, lr12);

  DistSampler xy_sampler(marginalize(p, {"X", "Y"}));
  auto outs = run_two_sender(inst, cfg.trials, cfg.workers, cfg.seed, [&](Xoshiro256ss& rng) {
    size_t xy = xy_sampler(rng);
    return std::tuple<size_t, size_t, size_t>(xy / yc, xy % yc, 0);
  });

  std::vector<double> emp(xc * yc * mc * nc, 0.0);
  for (const auto& o : outs)
    emp[((size_t(o.src_a) * yc + o.src_b) * mc + o.m_out) * nc + o.n_out] +=
        1.0 / double(cfg.trials);

  ProtocolReport rep;
  rep.task = "task2";
  rep.seed = cfg.seed;
  fill_two_sender_report(rep, inst, outs);
  rep.empirical_error =
      tv_exact(std::span<const double>(emp), std::span<const double>(p.table()));
  rep.bias_bound = std::sqrt(double(emp.size()) / double(cfg.trials));
  rep.std_error = rep.bias_bound;
  double eps = cfg.eps1 + cfg.eps2 + cfg.eps3 + 3.0 * cfg.delta;
  rep.theorem_bound = eps + cfg.eta1 + cfg.eta2 + 8.0 * cfg.delta;
  rep.bound_display = "tv(XYMN) <= (eps1+eps2+eps3+3*delta) + eta1 + eta2 + 8*delta";
  rep.premise_checks.push_back({"pair_test_premise", inst.premise_mass, eps,
                                inst.premise_mass <= eps + 1e-12});
  rep.premise_violated = !rep.premise_checks.back().pass;
  rep.values["ds_a"] = inst.alice.ds_value;
  rep.values["ds_b"] = inst.bob.ds_value;
  rep.values["dh_1"] = dh1;
  rep.values["dh_2"] = dh2;
  rep.values["dh_3"] = dh3;
  rep.wall_ms = watch.ms();
  return rep;
}

// --------------------------------------------------------------------------
// Task 3 (side information Z at the receiver)
// --------------------------------------------------------------------------

ProtocolReport run_task3(const Task3Config& cfg) {
  Stopwatch watch;
  if (cfg.trials == 0) throw ConfigError("task3: trials must be positive");
  JointDist p = reorder(cfg.p_xyzmn, {"X", "Y", "Z", "M", "N"});
  if (!is_markov(p, {"M"}, {"X"}, {"Y", "Z", "N"}, 1e-9) ||
      !is_markov(p, {"N"}, {"Y"}, {"X", "Z", "M"}, 1e-9))
    throw ConfigError("task3: the two sender chains do not hold");
  const size_t xc = p.axis_size(0), yc = p.axis_size(1), zc = p.axis_size(2),
               mc = p.axis_size(3), nc = p.axis_size(4);

  FiniteDist s_prior = cfg.prior_s ? *cfg.prior_s : marginalize(p, {"M"}).to_finite();
  FiniteDist t_prior = cfg.prior_t ? *cfg.prior_t : marginalize(p, {"N"}).to_finite();

  JointDist p_xm = reorder(marginalize(p, {"X", "M"}), {"X", "M"});
  JointDist p_yn = reorder(marginalize(p, {"Y", "N"}), {"Y", "N"});
  JointDist p_zmn = reorder(marginalize(p, {"Z", "M", "N"}), {"Z", "M", "N"});
  JointDist p_zm = marginalize(p, {"Z", "M"});
  JointDist p_zn = marginalize(p, {"Z", "N"});
  JointDist p_z = marginalize(p, {"Z"});

  std::vector<double> zmn = p_zmn.table();
  std::vector<double> q1(zmn.size()), q2(zmn.size()), q3(zmn.size());
  for (size_t z = 0; z < zc; ++z)
    for (size_t m = 0; m < mc; ++m)
      for (size_t n = 0; n < nc; ++n) {
        size_t i = (z * mc + m) * nc + n;
        q1[i] = s_prior.probs[m] * p_zn.at_flat(z * nc + n);
        q2[i] = p_zm.at_flat(z * mc + m) * t_prior.probs[n];
        q3[i] = p_z.at_flat(z) * s_prior.probs[m] * t_prior.probs[n];
      }
  double dh1 = dh_eps(std::span<const double>(zmn), std::span<const double>(q1), cfg.eps1,
                      cfg.mode).value;
  double dh2 = dh_eps(std::span<const double>(zmn), std::span<const double>(q2), cfg.eps2,
                      cfg.mode).value;
  double dh3 = dh_eps(std::span<const double>(zmn), std::span<const double>(q3), cfg.eps3,
                      cfg.mode).value;

  int R_a = cfg.R_a, R_b = cfg.R_b, r_a = cfg.r_a, r_b = cfg.r_b;
  double ds_a = make_generic_sender(p_xm, s_prior, BinPlan{0, 0}, cfg.delta).ds_value;
  double ds_b = make_generic_sender(p_yn, t_prior, BinPlan{0, 0}, cfg.delta).ds_value;
  double ld = std::log2(1.0 / cfg.delta), lq = std::log2(3.0 / cfg.delta);
  if (r_a < 0 || r_b < 0) {
    if (R_a < 0)
      R_a = std::max(0, int(std::ceil(ds_a - std::max(dh1 - 2.0 * ld, 0.0) + 2.0 * lq +
                                      2.0 * ld - 1e-9)));
    if (R_b < 0)
      R_b = std::max(0, int(std::ceil(ds_b - std::max(dh2 - 2.0 * ld, 0.0) + 2.0 * lq +
                                      2.0 * ld - 1e-9)));
    BinSplit split = find_bin_split({R_a, R_b, ds_a, ds_b, dh1, dh2, dh3, cfg.delta, 24});
    if (!split.feasible) throw ConfigError("task3: no feasible bin split at the given rates");
    r_a = split.r_a;
    r_b = split.r_b;
  }
  if (R_a < 0 || R_b < 0) throw ConfigError("task3: explicit r requires explicit R");
  if (R_a + r_a > cfg.slot_cap_log2 || R_b + r_b > cfg.slot_cap_log2)
    throw ConfigError("task3: slot count exceeds the per-trial cap");

  TwoSenderInstance inst;
  inst.alice = make_generic_sender(p_xm, s_prior, BinPlan{R_a, r_a}, cfg.delta);
  inst.bob = make_generic_sender(p_yn, t_prior, BinPlan{R_b, r_b}, cfg.delta);
  inst.side_cells = zc;
  inst.thresholds = BipartiteThresholds::from_rates(r_a, r_b, cfg.delta);
  std::vector<double> lr1(zmn.size()), lr2(zmn.size()), lr12(zmn.size());
  for (size_t i = 0; i < zmn.size(); ++i) {
    lr1[i] = log_or(zmn[i], q1[i]);
    lr2[i] = log_or(zmn[i], q2[i]);
    lr12[i] = log_or(zmn[i], q3[i]);
  }
  inst.test = build_test_from_thresholds(inst.thresholds, lr1, lr2, lr12, zc, mc, nc);
  inst.premise_mass = bipartite_premise_mass(inst.thresholds, zmn, lr1, lr2, lr12);

  DistSampler xyz_sampler(marginalize(p, {"X", "Y", "Z"}));
  auto outs = run_two_sender(inst, cfg.trials, cfg.workers, cfg.seed, [&](Xoshiro256ss& rng) {
    size_t xyz = xyz_sampler(rng);
    size_t x = xyz / (yc * zc);
    size_t y = (xyz / zc) % yc;
    size_t z = xyz % zc;
    return std::tuple<size_t, size_t, size_t>(x, y, z);
  });

  std::vector<double> emp(xc * yc * zc * mc * nc, 0.0);
  for (const auto& o : outs) {
    size_t x = o.src_a, y = o.src_b, z = o.side;
    emp[(((x * yc + y) * zc + z) * mc + o.m_out) * nc + o.n_out] += 1.0 / double(cfg.trials);
  }

  ProtocolReport rep;
  rep.task = "task3";
  rep.seed = cfg.seed;
  fill_two_sender_report(rep, inst, outs);
  rep.empirical_error =
      tv_exact(std::span<const double>(emp), std::span<const double>(p.table()));
  rep.bias_bound = std::sqrt(double(emp.size()) / double(cfg.trials));
  rep.std_error = rep.bias_bound;
  double eps = cfg.eps1 + cfg.eps2 + cfg.eps3 + 3.0 * cfg.delta;
  rep.theorem_bound = cfg.eps1 + cfg.eps2 + cfg.eps3 + 13.0 * cfg.delta;
  rep.bound_display = "tv(XYZMN) <= eps1 + eps2 + eps3 + 13*delta";
  rep.premise_checks.push_back({"pair_test_premise", inst.premise_mass, eps,
                                inst.premise_mass <= eps + 1e-12});
  rep.premise_violated = !rep.premise_checks.back().pass;
  rep.values["ds_a"] = ds_a;
  rep.values["ds_b"] = ds_b;
  rep.values["dh_1"] = dh1;
  rep.values["dh_2"] = dh2;
  rep.values["dh_3"] = dh3;
  rep.wall_ms = watch.ms();
  return rep;
}

// --------------------------------------------------------------------------
// Task 4: one sender, two receivers, no side information
// --------------------------------------------------------------------------

ProtocolReport run_task4(const Task4Config& cfg) {
  Stopwatch watch;
  if (cfg.trials == 0) throw ConfigError("task4: trials must be positive");
  JointDist p = reorder(cfg.p_xmn, {"X", "M", "N"});
  const size_t xc = p.axis_size(0), mc = p.axis_size(1), nc = p.axis_size(2);

  FiniteDist s_prior = cfg.prior_s ? *cfg.prior_s : marginalize(p, {"M"}).to_finite();
  FiniteDist t_prior = cfg.prior_t ? *cfg.prior_t : marginalize(p, {"N"}).to_finite();

  JointDist p_xm = reorder(marginalize(p, {"X", "M"}), {"X", "M"});
  JointDist p_xn = reorder(marginalize(p, {"X", "N"}), {"X", "N"});
  JointDist p_x = marginalize(p, {"X"});

  double ds1, ds2, ds3;
  {
    std::vector<double> pa = p_xm.table(), qa(pa.size());
    for (size_t x = 0; x < xc; ++x)
      for (size_t m = 0; m < mc; ++m) qa[x * mc + m] = p_x.at_flat(x) * s_prior.probs[m];
    ds1 = ds_eps(pa, qa, cfg.eps1);
    std::vector<double> pb = p_xn.table(), qb(pb.size());
    for (size_t x = 0; x < xc; ++x)
      for (size_t n = 0; n < nc; ++n) qb[x * nc + n] = p_x.at_flat(x) * t_prior.probs[n];
    ds2 = ds_eps(pb, qb, cfg.eps2);
    std::vector<double> pj = p.table(), qj(pj.size());
    for (size_t x = 0; x < xc; ++x)
      for (size_t m = 0; m < mc; ++m)
        for (size_t n = 0; n < nc; ++n)
          qj[(x * mc + m) * nc + n] = p_x.at_flat(x) * s_prior.probs[m] * t_prior.probs[n];
    ds3 = ds_eps(pj, qj, cfg.eps3);
  }
  double slack = 2.0 * std::log2(5.0 / cfg.delta);
  int R_b = cfg.R_b >= 0 ? cfg.R_b : std::max(0, int(std::ceil(ds1 + slack - 1e-9)));
  int R_c = cfg.R_c >= 0 ? cfg.R_c : std::max(0, int(std::ceil(ds2 + slack - 1e-9)));
  while (double(R_b + R_c) + 1e-9 < ds3 + slack) ++((R_b <= R_c) ? R_b : R_c);
  if (R_b + R_c > cfg.slot_cap_log2)
    throw ConfigError("task4: slot grid exceeds the per-trial cap");

  BipartiteSplitSpec spec =
      make_bipartite_split_spec(p, 1, 1, s_prior, t_prior, R_b, R_c);

  struct Out {
    uint32_t x, m_out, n_out;
    uint8_t degenerate;
  };
  auto outs = run_trials<Out>(cfg.trials, cfg.workers, [&](size_t t) {
    Xoshiro256ss rng = trial_stream(cfg.seed, t);
    thread_local std::vector<uint32_t> mcw, ncw;
    mcw.resize(spec.slots_m());
    ncw.resize(spec.slots_n());
    size_t x = spec.x_sampler(rng);
    for (auto& c : mcw) c = uint32_t(spec.u_sampler(rng));
    for (auto& c : ncw) c = uint32_t(spec.v_sampler(rng));
    bool degenerate = false;
    auto [j, k] = sample_slot_pair_by_weight(spec, x, mcw, ncw, rng, &degenerate);
    Out o;
    o.x = uint32_t(x);
    o.m_out = mcw[j];
    o.n_out = ncw[k];
    o.degenerate = degenerate ? 1 : 0;
    return o;
  });

  std::vector<double> emp(xc * mc * nc, 0.0);
  size_t degenerates = 0;
  for (const auto& o : outs) {
    emp[(size_t(o.x) * mc + o.m_out) * nc + o.n_out] += 1.0 / double(cfg.trials);
    degenerates += o.degenerate;
  }

  ProtocolReport rep;
  rep.task = "task4";
  rep.seed = cfg.seed;
  rep.trials = cfg.trials;
  rep.empirical_error =
      tv_exact(std::span<const double>(emp), std::span<const double>(p.table()));
  rep.bias_bound = std::sqrt(double(emp.size()) / double(cfg.trials));
  rep.std_error = rep.bias_bound;
  rep.theorem_bound = cfg.eps1 + cfg.eps2 + cfg.eps3 + cfg.delta;
  rep.bound_display = "tv(XMN) <= eps1 + eps2 + eps3 + delta";
  rep.comm_bits["alice_to_bob"] = R_b;
  rep.comm_bits["alice_to_charlie"] = R_c;
  rep.rates["R_b"] = R_b;
  rep.rates["R_c"] = R_c;
  rep.values["ds_1"] = ds1;
  rep.values["ds_2"] = ds2;
  rep.values["ds_3"] = ds3;
  rep.abort_rates["encoder_degenerate"] = double(degenerates) / double(cfg.trials);
  rep.premise_checks.push_back({"split_slots", double(R_b + R_c), ds3 + slack,
                                double(R_b + R_c) + 1e-9 >= ds3 + slack});
  rep.premise_violated = !rep.premise_checks.back().pass;
  rep.wall_ms = watch.ms();
  return rep;
}

// --------------------------------------------------------------------------
// Task 5: one sender, two receivers with side information
// --------------------------------------------------------------------------

ProtocolReport run_task5(const Task5Config& cfg) {
  Stopwatch watch;
  if (cfg.trials == 0) throw ConfigError("task5: trials must be positive");
  JointDist p = reorder(cfg.p_xyzmn, {"X", "Y", "Z", "M", "N"});
  if (!is_markov(p, {"M", "N"}, {"X"}, {"Y", "Z"}, 1e-9))
    throw ConfigError("task5: (M,N)-X-(Y,Z) does not hold");
  const size_t xc = p.axis_size(0), yc = p.axis_size(1), zc = p.axis_size(2),
               mc = p.axis_size(3), nc = p.axis_size(4);

  FiniteDist s_prior = cfg.prior_s ? *cfg.prior_s : marginalize(p, {"M"}).to_finite();
  FiniteDist t_prior = cfg.prior_t ? *cfg.prior_t : marginalize(p, {"N"}).to_finite();

  JointDist p_xm = reorder(marginalize(p, {"X", "M"}), {"X", "M"});
  JointDist p_xn = reorder(marginalize(p, {"X", "N"}), {"X", "N"});
  JointDist p_xmn = reorder(marginalize(p, {"X", "M", "N"}), {"X", "M", "N"});
  JointDist p_ym = reorder(marginalize(p, {"Y", "M"}), {"Y", "M"});
  JointDist p_zn = reorder(marginalize(p, {"Z", "N"}), {"Z", "N"});
  JointDist p_x = marginalize(p, {"X"});
  JointDist p_y = marginalize(p, {"Y"});
  JointDist p_z = marginalize(p, {"Z"});

  auto ds_against = [&](const JointDist& joint, const FiniteDist& prior, double eps) {
    size_t oc = joint.axis_size(1);
    std::vector<double> q(joint.cells());
    for (size_t x = 0; x < xc; ++x)
      for (size_t o = 0; o < oc; ++o) q[x * oc + o] = p_x.at_flat(x) * prior.probs[o];
    return ds_eps(std::span<const double>(joint.table()), std::span<const double>(q), eps);
  };
  double ds1 = ds_against(p_xm, s_prior, cfg.eps1);
  double ds2 = ds_against(p_xn, t_prior, cfg.eps2);
  double ds3;
  {
    std::vector<double> q(p_xmn.cells());
    for (size_t x = 0; x < xc; ++x)
      for (size_t m = 0; m < mc; ++m)
        for (size_t n = 0; n < nc; ++n)
          q[(x * mc + m) * nc + n] = p_x.at_flat(x) * s_prior.probs[m] * t_prior.probs[n];
    ds3 = ds_eps(std::span<const double>(p_xmn.table()), std::span<const double>(q), cfg.eps3);
  }

  HypothesisTestResult dh_b, dh_c;
  {
    std::vector<double> qb(p_ym.cells());
    for (size_t y = 0; y < yc; ++y)
      for (size_t m = 0; m < mc; ++m) qb[y * mc + m] = p_y.at_flat(y) * s_prior.probs[m];
    dh_b = dh_eps(std::span<const double>(p_ym.table()), std::span<const double>(qb),
                  cfg.delta1, cfg.mode);
    std::vector<double> qc(p_zn.cells());
    for (size_t z = 0; z < zc; ++z)
      for (size_t n = 0; n < nc; ++n) qc[z * nc + n] = p_z.at_flat(z) * t_prior.probs[n];
    dh_c = dh_eps(std::span<const double>(p_zn.table()), std::span<const double>(qc),
                  cfg.delta1, cfg.mode);
  }

  double ld2 = std::log2(1.0 / cfg.delta2);
  double slack = 2.0 * std::log2(5.0 / cfg.delta2);
  int r_b = cfg.r_b >= 0 ? cfg.r_b
                         : int(std::floor(std::max(dh_b.value - ld2, 0.0) + 1e-9));
  int r_c = cfg.r_c >= 0 ? cfg.r_c
                         : int(std::floor(std::max(dh_c.value - ld2, 0.0) + 1e-9));
  int R_b = cfg.R_b >= 0 ? cfg.R_b : std::max(0, int(std::ceil(ds1 + slack - double(r_b) - 1e-9)));
  int R_c = cfg.R_c >= 0 ? cfg.R_c : std::max(0, int(std::ceil(ds2 + slack - double(r_c) - 1e-9)));
  while (double(R_b + r_b + R_c + r_c) + 1e-9 < ds3 + slack) ++((R_b <= R_c) ? R_b : R_c);
  if (R_b + r_b + R_c + r_c > cfg.slot_cap_log2)
    throw ConfigError("task5: slot grid exceeds the per-trial cap");

  BinPlan plan_b{R_b, r_b}, plan_c{R_c, r_c};
  BipartiteSplitSpec spec = make_bipartite_split_spec(p_xmn, 1, 1, s_prior, t_prior,
                                                      R_b + r_b, R_c + r_c);
  DenseTest test_b{mc, dh_b.set.member};
  DenseTest test_c{nc, dh_c.set.member};
  DistSampler xyz_sampler(marginalize(p, {"X", "Y", "Z"}));

  struct Out {
    uint32_t x, y, z, m_out, n_out;
    uint8_t bottom_b, bottom_c, degenerate;
  };
  auto outs = run_trials<Out>(cfg.trials, cfg.workers, [&](size_t t) {
    Xoshiro256ss rng = trial_stream(cfg.seed, t);
    thread_local std::vector<uint32_t> mcw, ncw;
    mcw.resize(spec.slots_m());
    ncw.resize(spec.slots_n());
    size_t xyz = xyz_sampler(rng);
    size_t x = xyz / (yc * zc), y = (xyz / zc) % yc, z = xyz % zc;
    for (auto& c : mcw) c = uint32_t(spec.u_sampler(rng));
    for (auto& c : ncw) c = uint32_t(spec.v_sampler(rng));
    bool degenerate = false;
    auto [j, k] = sample_slot_pair_by_weight(spec, x, mcw, ncw, rng, &degenerate);
    size_t fb = plan_b.first_of(plan_b.bin_of(j));
    size_t fc = plan_c.first_of(plan_c.bin_of(k));
    UniDecodeResult db =
        decode_unipartite(y, std::span<const uint32_t>(mcw.data() + fb, plan_b.bin_size()),
                          test_b);
    UniDecodeResult dc =
        decode_unipartite(z, std::span<const uint32_t>(ncw.data() + fc, plan_c.bin_size()),
                          test_c);
    Out o;
    o.x = uint32_t(x);
    o.y = uint32_t(y);
    o.z = uint32_t(z);
    o.m_out = mcw[fb + db.index];
    o.n_out = ncw[fc + dc.index];
    o.bottom_b = db.bottom ? 1 : 0;
    o.bottom_c = dc.bottom ? 1 : 0;
    o.degenerate = degenerate ? 1 : 0;
    return o;
  });

  std::vector<double> emp(xc * yc * zc * mc * nc, 0.0);
  size_t bb = 0, bc = 0, dg = 0;
  for (const auto& o : outs) {
    emp[(((size_t(o.x) * yc + o.y) * zc + o.z) * mc + o.m_out) * nc + o.n_out] +=
        1.0 / double(cfg.trials);
    bb += o.bottom_b;
    bc += o.bottom_c;
    dg += o.degenerate;
  }

  ProtocolReport rep;
  rep.task = "task5";
  rep.seed = cfg.seed;
  rep.trials = cfg.trials;
  rep.empirical_error =
      tv_exact(std::span<const double>(emp), std::span<const double>(p.table()));
  rep.bias_bound = std::sqrt(double(emp.size()) / double(cfg.trials));
  rep.std_error = rep.bias_bound;
  rep.theorem_bound = cfg.eps1 + cfg.eps2 + cfg.eps3 + 2.0 * cfg.delta1 + 5.0 * cfg.delta2;
  rep.bound_display = "tv(XYZMN) <= eps + 2*delta1 + 5*delta2";
  rep.comm_bits["alice_to_bob"] = R_b;
  rep.comm_bits["alice_to_charlie"] = R_c;
  rep.rates["R_b"] = R_b;
  rep.rates["r_b"] = r_b;
  rep.rates["R_c"] = R_c;
  rep.rates["r_c"] = r_c;
  rep.values["ds_1"] = ds1;
  rep.values["ds_2"] = ds2;
  rep.values["ds_3"] = ds3;
  rep.values["dh_b"] = dh_b.value;
  rep.values["dh_c"] = dh_c.value;
  rep.abort_rates["bob_bottom"] = double(bb) / double(cfg.trials);
  rep.abort_rates["charlie_bottom"] = double(bc) / double(cfg.trials);
  rep.abort_rates["encoder_degenerate"] = double(dg) / double(cfg.trials);
  rep.premise_checks.push_back({"split_slots", double(R_b + r_b + R_c + r_c), ds3 + slack,
                                double(R_b + r_b + R_c + r_c) + 1e-9 >= ds3 + slack});
  rep.premise_violated = !rep.premise_checks.back().pass;
  rep.wall_ms = watch.ms();
  return rep;
}

// --------------------------------------------------------------------------
// Task 8: two-sender source compression (identity messages, uniform decoys)
// --------------------------------------------------------------------------

namespace {

// The rate display of the identity-message protocol with uniform decoys:
// the event {log2 1/p(x|y) >= R_a - 3 log2(3/d)} or the two partner forms.
bool choice_event(double l_x_given_y, double l_y_given_x, double l_xy, int R_a, int R_b,
                  double delta) {
  double s3 = 3.0 * std::log2(3.0 / delta);
  double s5 = 5.0 * std::log2(3.0 / delta);
  return l_x_given_y >= double(R_a) - s3 || l_y_given_x >= double(R_b) - s3 ||
         l_xy >= double(R_a + R_b) - s5;
}

}  // namespace

ProtocolReport run_task8(const Task8Config& cfg) {
  Stopwatch watch;
  if (cfg.trials == 0) throw ConfigError("task8: trials must be positive");
  if (!cfg.p_xy.has_value() && !cfg.dsbc.has_value())
    throw ConfigError("task8: provide either a dense p_xy or a dsbc source");

  ProtocolReport rep;
  rep.task = "task8";
  rep.seed = cfg.seed;
  rep.trials = cfg.trials;
  rep.bound_display =
      "Pr[(X,Y) != (Xhat,Yhat)] <= premise + 16*delta (in-proof constant; statement uses 8*delta)";

  double lq = std::log2(3.0 / cfg.delta);
  double ld = std::log2(1.0 / cfg.delta);

  size_t xc, yc;
  if (cfg.dsbc) {
    if (cfg.dsbc->bits < 1 || cfg.dsbc->bits > 20) throw ConfigError("task8: dsbc bits in [1,20]");
    if (!(cfg.dsbc->flip > 0.0 && cfg.dsbc->flip < 0.5))
      throw ConfigError("task8: dsbc flip in (0, 0.5)");
    xc = yc = size_t{1} << cfg.dsbc->bits;
  } else {
    JointDist p = reorder(*cfg.p_xy, {"X", "Y"});
    xc = p.axis_size(0);
    yc = p.axis_size(1);
  }

  int R_a = cfg.R_a >= 0 ? cfg.R_a : int(std::ceil(std::log2(double(xc))));
  int R_b = cfg.R_b >= 0 ? cfg.R_b : int(std::ceil(std::log2(double(yc))));
  // slot budget of the split step; the identity message has Ds^0 = log2|X|
  int r_a = cfg.r_a >= 0 ? cfg.r_a
                         : std::max(0, int(std::ceil(std::log2(double(xc)) + 2.0 * lq -
                                                     double(R_a) - 1e-9)));
  int r_b = cfg.r_b >= 0 ? cfg.r_b
                         : std::max(0, int(std::ceil(std::log2(double(yc)) + 2.0 * lq -
                                                     double(R_b) - 1e-9)));
  if (R_a + r_a > cfg.slot_cap_log2 || R_b + r_b > cfg.slot_cap_log2)
    throw ConfigError("task8: slot count exceeds the per-trial cap");

  Sender alice = make_identity_sender(xc, BinPlan{R_a, r_a});
  Sender bob = make_identity_sender(yc, BinPlan{R_b, r_b});
  BipartiteThresholds th = BipartiteThresholds::from_rates(r_a, r_b, cfg.delta);

  double premise_choice = 0.0, premise_triple = 0.0;
  size_t errors = 0, bottoms = 0, degenerates = 0;

  if (cfg.dsbc) {
    const int nb = cfg.dsbc->bits;
    const double q = cfg.dsbc->flip;
    const double l1 = -std::log2(1.0 - q);  // per agreeing bit
    const double l2 = -std::log2(q);        // per flipped bit
    auto loss_cond = [&](int k) { return double(nb - k) * l1 + double(k) * l2; };
    // binomial pmf over flip counts
    std::vector<double> pmf(nb + 1);
    {
      double v = std::pow(1.0 - q, nb);
      for (int k = 0; k <= nb; ++k) {
        pmf[k] = v;
        v *= double(nb - k) / double(k + 1) * (q / (1.0 - q));
      }
    }
    for (int k = 0; k <= nb; ++k) {
      double lxy = double(nb) + loss_cond(k);
      if (choice_event(loss_cond(k), loss_cond(k), lxy, R_a, R_b, cfg.delta))
        premise_choice += pmf[k];
      double lr1 = double(nb) - loss_cond(k);
      double lr12 = 2.0 * double(nb) - lxy;
      if (lr1 < th.t1 || lr1 < th.t2 || lr12 < th.t12) premise_triple += pmf[k];
    }
    // largest flip count the three tests accept
    int k_max = -1;
    for (int k = 0; k <= nb; ++k) {
      double lr1 = double(nb) - loss_cond(k);
      double lr12 = double(nb) - loss_cond(k);
      if (lr1 >= th.t1 && lr1 >= th.t2 && lr12 >= th.t12)
        k_max = k;
      else
        break;
    }

    struct Out {
      uint8_t wrong, bottom, degenerate;
    };
    auto res = run_trials<Out>(cfg.trials, cfg.workers, [&](size_t t) {
      Xoshiro256ss rng = trial_stream(cfg.seed, t);
      thread_local std::vector<uint32_t> bin_a, bin_b, scratch, positions;
      uint32_t x = uint32_t(rng.next_below(xc));
      uint32_t y = x;
      for (int b = 0; b < nb; ++b)
        if (rng.next_double() < q) y ^= (uint32_t{1} << b);
      SideDraw da = draw_side(alice, x, rng, bin_a, scratch, positions);
      SideDraw db = draw_side(bob, y, rng, bin_b, scratch, positions);
      auto accept = [&](size_t, uint32_t m, uint32_t n) {
        return k_max >= 0 && __builtin_popcount(m ^ n) <= k_max;
      };
      BiDecodeResult d = decode_bipartite(size_t{0}, std::span<const uint32_t>(bin_a),
                                          std::span<const uint32_t>(bin_b), accept);
      Out o;
      o.wrong = (bin_a[d.j] != x || bin_b[d.k] != y) ? 1 : 0;
      o.bottom = d.bottom ? 1 : 0;
      o.degenerate = (da.degenerate || db.degenerate) ? 1 : 0;
      return o;
    });
    for (const auto& o : res) {
      errors += o.wrong;
      bottoms += o.bottom;
      degenerates += o.degenerate;
    }
    rep.values["k_max"] = double(k_max);
  } else {
    JointDist p = reorder(*cfg.p_xy, {"X", "Y"});
    const auto& pt = p.table();
    JointDist p_x = marginalize(p, {"X"});
    JointDist p_y = marginalize(p, {"Y"});
    std::vector<double> lr1(xc * yc), lr2(xc * yc), lr12(xc * yc);
    for (size_t m = 0; m < xc; ++m)
      for (size_t n = 0; n < yc; ++n) {
        size_t i = m * yc + n;
        lr1[i] = log_or(pt[i], p_y.at_flat(n) / double(xc));
        lr2[i] = log_or(pt[i], p_x.at_flat(m) / double(yc));
        lr12[i] = log_or(pt[i], 1.0 / double(xc * yc));
      }
    for (size_t m = 0; m < xc; ++m)
      for (size_t n = 0; n < yc; ++n) {
        size_t i = m * yc + n;
        if (pt[i] <= 0.0) continue;
        double lxgy = -std::log2(pt[i] / p_y.at_flat(n));
        double lygx = -std::log2(pt[i] / p_x.at_flat(m));
        double lxy = -std::log2(pt[i]);
        if (choice_event(lxgy, lygx, lxy, R_a, R_b, cfg.delta)) premise_choice += pt[i];
        if (lr1[i] < th.t1 || lr2[i] < th.t2 || lr12[i] < th.t12) premise_triple += pt[i];
      }
    DenseBipartiteTest test = build_test_from_thresholds(th, lr1, lr2, lr12, 1, xc, yc);
    DistSampler xy_sampler(p);
    struct Out {
      uint8_t wrong, bottom, degenerate;
    };
    auto res = run_trials<Out>(cfg.trials, cfg.workers, [&](size_t t) {
      Xoshiro256ss rng = trial_stream(cfg.seed, t);
      thread_local std::vector<uint32_t> bin_a, bin_b, scratch, positions;
      size_t xy = xy_sampler(rng);
      size_t x = xy / yc, y = xy % yc;
      SideDraw da = draw_side(alice, x, rng, bin_a, scratch, positions);
      SideDraw db = draw_side(bob, y, rng, bin_b, scratch, positions);
      BiDecodeResult d = decode_bipartite(size_t{0}, std::span<const uint32_t>(bin_a),
                                          std::span<const uint32_t>(bin_b), test);
      Out o;
      o.wrong = (bin_a[d.j] != x || bin_b[d.k] != y) ? 1 : 0;
      o.bottom = d.bottom ? 1 : 0;
      o.degenerate = (da.degenerate || db.degenerate) ? 1 : 0;
      return o;
    });
    for (const auto& o : res) {
      errors += o.wrong;
      bottoms += o.bottom;
      degenerates += o.degenerate;
    }
  }

  rep.empirical_error = double(errors) / double(cfg.trials);
  rep.std_error = freq_std_error(rep.empirical_error, cfg.trials);
  rep.theorem_bound = std::min(1.0, premise_choice + 16.0 * cfg.delta);
  rep.values["bound_statement_8delta"] = std::min(1.0, premise_choice + 8.0 * cfg.delta);
  rep.comm_bits["alice_to_charlie"] = R_a;
  rep.comm_bits["bob_to_charlie"] = R_b;
  rep.rates["R_a"] = R_a;
  rep.rates["r_a"] = r_a;
  rep.rates["R_b"] = R_b;
  rep.rates["r_b"] = r_b;
  rep.values["premise_choice"] = premise_choice;
  rep.values["premise_triple"] = premise_triple;
  rep.abort_rates["decoder_bottom"] = double(bottoms) / double(cfg.trials);
  rep.abort_rates["encoder_no_match"] = double(degenerates) / double(cfg.trials);
  rep.premise_checks.push_back(
      {"rate_test_mass", premise_choice, cfg.eps, premise_choice <= cfg.eps});
  rep.premise_checks.push_back(
      {"pair_test_premise", premise_triple, cfg.eps, premise_triple <= cfg.eps});
  rep.premise_violated = !rep.premise_checks[0].pass || !rep.premise_checks[1].pass;
  rep.values["bin_split_feasible"] =
      find_bin_split({R_a, R_b, std::log2(double(xc)), std::log2(double(yc)),
                      0.0, 0.0, 0.0, cfg.delta, 24})
              .feasible
          ? 1.0
          : 0.0;
  rep.wall_ms = watch.ms();
  return rep;
}

std::vector<Task8SweepRow> run_task8_sweep(const Task8Config& base,
                                           const std::vector<std::pair<int, int>>& rates) {
  std::vector<Task8SweepRow> rows;
  rows.reserve(rates.size());
  for (const auto& [ra, rb] : rates) {
    Task8Config cfg = base;
    cfg.R_a = ra;
    cfg.R_b = rb;
    cfg.r_a = -1;
    cfg.r_b = -1;
    ProtocolReport rep = run_task8(cfg);
    rows.push_back({ra, rb, rep.empirical_error, rep.std_error,
                    rep.values.at("premise_choice"),
                    rep.theorem_bound, rep.values.at("bound_statement_8delta")});
  }
  return rows;
}

// --------------------------------------------------------------------------
// Task 9: source compression with coded side information
// --------------------------------------------------------------------------

ProtocolReport run_task9(const Task9Config& cfg) {
  Stopwatch watch;
  if (cfg.trials == 0) throw ConfigError("task9: trials must be positive");
  JointDist p_xy = reorder(cfg.p_xy, {"X", "Y"});
  const size_t xc = p_xy.axis_size(0), yc = p_xy.axis_size(1);
  if (cfg.n_given_y.in_size() != yc) throw ConfigError("task9: helper kernel shape mismatch");
  const size_t nc = cfg.n_given_y.out_size();

  JointDist p_xyn = chain(p_xy, "Y", cfg.n_given_y);  // X, Y, N; X-Y-N by construction
  if (!is_markov(p_xyn, {"X"}, {"Y"}, {"N"}, 1e-9))
    throw ConfigError("task9: X-Y-N does not hold");
  JointDist p_xn = reorder(marginalize(p_xyn, {"X", "N"}), {"X", "N"});
  JointDist p_yn = reorder(marginalize(p_xyn, {"Y", "N"}), {"Y", "N"});
  JointDist p_n = marginalize(p_xyn, {"N"});
  JointDist p_x = marginalize(p_xyn, {"X"});
  FiniteDist t_prior = cfg.prior_t ? *cfg.prior_t : p_n.to_finite();

  double lq = std::log2(3.0 / cfg.delta);

  Sender bob_probe = make_generic_sender(p_yn, t_prior, BinPlan{0, 0}, cfg.eta);
  double ds_b = bob_probe.ds_value;

  // receiver-side divergences over (m=x-candidate, n)
  std::vector<double> xn = p_xn.table();
  std::vector<double> q1(xn.size()), q2(xn.size()), q3(xn.size());
  for (size_t m = 0; m < xc; ++m)
    for (size_t n = 0; n < nc; ++n) {
      size_t i = m * nc + n;
      q1[i] = p_n.at_flat(n) / double(xc);
      q2[i] = p_x.at_flat(m) * t_prior.probs[n];
      q3[i] = t_prior.probs[n] / double(xc);
    }
  double dh1 = dh_eps(std::span<const double>(xn), std::span<const double>(q1), cfg.eps / 3,
                      cfg.mode).value;
  double dh2 = dh_eps(std::span<const double>(xn), std::span<const double>(q2), cfg.eps / 3,
                      cfg.mode).value;
  double dh3 = dh_eps(std::span<const double>(xn), std::span<const double>(q3), cfg.eps / 3,
                      cfg.mode).value;

  int R_a = cfg.R_a >= 0 ? cfg.R_a : int(std::ceil(std::log2(double(xc))));
  int R_b = cfg.R_b >= 0
                ? cfg.R_b
                : std::max(0, int(std::ceil(ds_b + 5.0 * std::log2(1.0 / cfg.delta) - 1e-9)));
  int r_a = cfg.r_a, r_b = cfg.r_b;
  BinSplit split =
      find_bin_split({R_a, R_b, std::log2(double(xc)), ds_b, dh1, dh2, dh3, cfg.delta, 24});
  if (r_a < 0 || r_b < 0) {
    if (split.feasible) {
      r_a = split.r_a;
      r_b = split.r_b;
    } else {
      // slot budgets from the split side; decode premise recorded below
      r_a = std::max(0, int(std::ceil(std::log2(double(xc)) + 2.0 * lq - double(R_a) - 1e-9)));
      r_b = std::max(0, int(std::ceil(ds_b + 2.0 * lq - double(R_b) - 1e-9)));
    }
  }
  if (R_a + r_a > cfg.slot_cap_log2 || R_b + r_b > cfg.slot_cap_log2)
    throw ConfigError("task9: slot count exceeds the per-trial cap");

  TwoSenderInstance inst;
  inst.alice = make_identity_sender(xc, BinPlan{R_a, r_a});
  inst.bob = make_generic_sender(p_yn, t_prior, BinPlan{R_b, r_b}, cfg.eta);
  inst.thresholds = BipartiteThresholds::from_rates(r_a, r_b, cfg.delta);
  std::vector<double> lr1(xn.size()), lr2(xn.size()), lr12(xn.size());
  for (size_t i = 0; i < xn.size(); ++i) {
    lr1[i] = log_or(xn[i], q1[i]);
    lr2[i] = log_or(xn[i], q2[i]);
    lr12[i] = log_or(xn[i], q3[i]);
  }
  inst.test = build_test_from_thresholds(inst.thresholds, lr1, lr2, lr12, 1, xc, nc);
  inst.premise_mass = bipartite_premise_mass(inst.thresholds, xn, lr1, lr2, lr12);

  // the helper-choice rate test: Pr[p(x|n) <= 2^{-R_a}/delta^3] <= eps - delta
  double premise_helper = 0.0;
  for (size_t m = 0; m < xc; ++m)
    for (size_t n = 0; n < nc; ++n) {
      double v = xn[m * nc + n];
      if (v <= 0.0) continue;
      double x_given_n = v / p_n.at_flat(n);
      if (x_given_n <= std::exp2(-double(R_a)) / std::pow(cfg.delta, 3)) premise_helper += v;
    }

  // joint source draw: (x, y) then Bob's source is y; receiver decodes x
  DistSampler xy_sampler(p_xy);
  auto outs = run_two_sender(inst, cfg.trials, cfg.workers, cfg.seed, [&](Xoshiro256ss& rng) {
    size_t xy = xy_sampler(rng);
    return std::tuple<size_t, size_t, size_t>(xy / yc, xy % yc, 0);
  });

  size_t errors = 0, bottoms = 0, degenerates = 0;
  for (const auto& o : outs) {
    errors += (o.m_out != o.src_a) ? 1 : 0;
    bottoms += o.bottom;
    degenerates += o.degenerate;
  }

  ProtocolReport rep;
  rep.task = "task9";
  rep.seed = cfg.seed;
  fill_two_sender_report(rep, inst, outs);
  rep.empirical_error = double(errors) / double(cfg.trials);
  rep.std_error = freq_std_error(rep.empirical_error, cfg.trials);
  rep.theorem_bound = cfg.eps + cfg.eta + 8.0 * cfg.delta;
  rep.bound_display = "Pr[X != Xhat] <= eps + eta + 8*delta";
  rep.values["ds_b"] = ds_b;
  rep.values["dh_1"] = dh1;
  rep.values["dh_2"] = dh2;
  rep.values["dh_3"] = dh3;
  rep.values["bin_split_feasible"] = split.feasible ? 1.0 : 0.0;
  rep.premise_checks.push_back({"helper_rate_test", premise_helper,
                                std::max(cfg.eps - cfg.delta, 0.0),
                                premise_helper <= std::max(cfg.eps - cfg.delta, 0.0) + 1e-12});
  rep.premise_checks.push_back({"pair_test_premise", inst.premise_mass, cfg.eps,
                                inst.premise_mass <= cfg.eps + 1e-12});
  rep.premise_violated = !rep.premise_checks[0].pass || !rep.premise_checks[1].pass;
  rep.wall_ms = watch.ms();
  return rep;
}

}  // namespace oscl
