#include "oscl/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace oscl {

namespace {

// Split a joint's cells into leading-axes block and trailing-axes block.
void split_shape(const JointDist& base, size_t lead_count, size_t* lead_cells,
                 size_t* trail_cells) {
  if (lead_count == 0 || lead_count >= base.rank())
    throw ConfigError("split: at least one leading and one trailing axis required");
  size_t lc = 1, tc = 1;
  for (size_t i = 0; i < base.rank(); ++i)
    (i < lead_count ? lc : tc) *= base.axis_size(i);
  *lead_cells = lc;
  *trail_cells = tc;
}

}  // namespace

SplitCore make_split_core(const JointDist& base, size_t x_axis_count, const FiniteDist& prior) {
  SplitCore core;
  split_shape(base, x_axis_count, &core.x_cells, &core.m_cells);
  if (prior.size() != core.m_cells)
    throw ConfigError("prior alphabet does not match the M part of the base");

  core.p_x.assign(core.x_cells, 0.0);
  core.cond.assign(core.x_cells * core.m_cells, 0.0);
  core.prior = prior.probs;
  const auto& t = base.table();
  for (size_t x = 0; x < core.x_cells; ++x) {
    double px = 0.0;
    for (size_t m = 0; m < core.m_cells; ++m) px += t[x * core.m_cells + m];
    core.p_x[x] = px;
    if (px > 0.0)
      for (size_t m = 0; m < core.m_cells; ++m)
        core.cond[x * core.m_cells + m] = t[x * core.m_cells + m] / px;
  }

  // prior must cover the M marginal, otherwise the construction degenerates
  for (size_t m = 0; m < core.m_cells; ++m) {
    double pm = 0.0;
    for (size_t x = 0; x < core.x_cells; ++x) pm += t[x * core.m_cells + m];
    if (pm > 0.0 && core.prior[m] <= 0.0)
      throw ConfigError("prior has a zero where the base M-marginal is positive");
  }

  core.ratio.assign(core.x_cells * core.m_cells, 0.0);
  core.dmax_bits = -kInf;
  for (size_t x = 0; x < core.x_cells; ++x) {
    for (size_t m = 0; m < core.m_cells; ++m) {
      double c = core.cond[x * core.m_cells + m];
      if (c <= 0.0) continue;
      double r = c / core.prior[m];
      core.ratio[x * core.m_cells + m] = r;
      if (core.p_x[x] > 0.0) core.dmax_bits = std::max(core.dmax_bits, std::log2(r));
    }
  }

  core.cond_samplers.reserve(core.x_cells);
  for (size_t x = 0; x < core.x_cells; ++x)
    core.cond_samplers.emplace_back(
        std::span<const double>(core.cond.data() + x * core.m_cells, core.m_cells));
  core.prior_sampler = DistSampler(std::span<const double>(core.prior));
  core.x_sampler = DistSampler(std::span<const double>(core.p_x));
  return core;
}

ConvexSplitSpec make_convex_split_spec(const JointDist& base, size_t x_axis_count,
                                       const FiniteDist& prior, int log_slots) {
  if (log_slots < 0 || log_slots > 30) throw ConfigError("log_slots out of range");
  ConvexSplitSpec spec;
  spec.core = make_split_core(base, x_axis_count, prior);
  spec.log_slots = log_slots;
  return spec;
}

double convex_split_log_density(const ConvexSplitSpec& spec, size_t x,
                                std::span<const uint32_t> codewords) {
  const SplitCore& core = spec.core;
  if (codewords.size() != spec.slots()) throw ConfigError("codeword count != slot count");
  if (core.p_x[x] <= 0.0) return -kInf;
  double log_prior = 0.0;
  double ratio_sum = 0.0;
  for (uint32_t m : codewords) {
    if (m >= core.m_cells) throw ConfigError("codeword out of alphabet");
    if (core.prior[m] <= 0.0) throw NumericError("prior vanishes at a supplied codeword");
    log_prior += std::log2(core.prior[m]);
    ratio_sum += core.ratio_at(x, m);
  }
  if (ratio_sum <= 0.0) return -kInf;
  return std::log2(core.p_x[x]) + log_prior + std::log2(ratio_sum / double(spec.slots()));
}

double product_log_density(const ConvexSplitSpec& spec, size_t x,
                           std::span<const uint32_t> codewords) {
  const SplitCore& core = spec.core;
  if (core.p_x[x] <= 0.0) return -kInf;
  double log_prior = 0.0;
  for (uint32_t m : codewords) {
    if (core.prior[m] <= 0.0) throw NumericError("prior vanishes at a supplied codeword");
    log_prior += std::log2(core.prior[m]);
  }
  return std::log2(core.p_x[x]) + log_prior;
}

CodebookDraw convex_split_sample(const ConvexSplitSpec& spec, Xoshiro256ss& rng) {
  const SplitCore& core = spec.core;
  CodebookDraw draw;
  draw.j = rng.next_below(spec.slots());
  draw.x = core.x_sampler(rng);
  draw.codewords.resize(spec.slots());
  for (size_t i = 0; i < spec.slots(); ++i) {
    draw.codewords[i] = (i == draw.j)
                            ? static_cast<uint32_t>(core.cond_samplers[draw.x](rng))
                            : static_cast<uint32_t>(core.prior_sampler(rng));
  }
  return draw;
}

size_t sample_slot_by_weight(const SplitCore& core, size_t x,
                             std::span<const uint32_t> codewords, Xoshiro256ss& rng,
                             bool* degenerate) {
  double total = 0.0;
  for (uint32_t m : codewords) total += core.ratio_at(x, m);
  if (degenerate) *degenerate = false;
  if (total <= 0.0) {
    if (degenerate) *degenerate = true;
    return rng.next_below(codewords.size());
  }
  double u = rng.next_double() * total;
  double acc = 0.0;
  for (size_t i = 0; i < codewords.size(); ++i) {
    acc += core.ratio_at(x, codewords[i]);
    if (u < acc) return i;
  }
  return codewords.size() - 1;
}

SmoothResult smooth_truncate(const JointDist& base, size_t x_axis_count, const FiniteDist& prior,
                             double c) {
  if (c < 0.0) throw ConfigError("smooth_truncate: c must be non-negative");
  SplitCore core = make_split_core(base, x_axis_count, prior);
  const double cap = std::exp2(c);
  std::vector<double> table(core.x_cells * core.m_cells, 0.0);
  double tv_cost = 0.0;
  for (size_t x = 0; x < core.x_cells; ++x) {
    if (core.p_x[x] <= 0.0) continue;
    double eps_x = 0.0;
    for (size_t m = 0; m < core.m_cells; ++m) {
      double cm = core.cond_at(x, m);
      if (cm <= 0.0) continue;
      if (core.ratio_at(x, m) > cap)
        eps_x += cm;
      else
        table[x * core.m_cells + m] = cm;
    }
    for (size_t m = 0; m < core.m_cells; ++m)
      table[x * core.m_cells + m] =
          core.p_x[x] * (table[x * core.m_cells + m] + eps_x * core.prior[m]);
    tv_cost += core.p_x[x] * eps_x;
  }
  SmoothResult out;
  out.smoothed = JointDist(base.axes(), std::move(table));
  out.tv_cost = tv_cost;
  return out;
}

BipartiteSmoothResult smooth_truncate_bipartite(const JointDist& base, size_t x_axis_count,
                                                size_t m_axis_count, const FiniteDist& prior_u,
                                                const FiniteDist& prior_v, int r1, int r2,
                                                double delta) {
  if (base.rank() < x_axis_count + m_axis_count + 1)
    throw ConfigError("smooth_truncate_bipartite: axis split out of range");
  size_t x_cells = 1, m_cells = 1, n_cells = 1;
  for (size_t i = 0; i < base.rank(); ++i) {
    if (i < x_axis_count)
      x_cells *= base.axis_size(i);
    else if (i < x_axis_count + m_axis_count)
      m_cells *= base.axis_size(i);
    else
      n_cells *= base.axis_size(i);
  }
  if (prior_u.size() != m_cells || prior_v.size() != n_cells)
    throw ConfigError("smooth_truncate_bipartite: prior alphabets do not match");
  const double base_th = delta * delta / 24.0;
  const double th1 = base_th * std::exp2(double(r1));
  const double th2 = base_th * std::exp2(double(r2));
  const double th12 = base_th * std::exp2(double(r1 + r2));
  if (!(th1 > 0.0 && th2 > 0.0 && th12 > 0.0))
    throw ConfigError("smooth_truncate_bipartite: thresholds must be positive");

  const auto& t = base.table();
  std::vector<double> p_x(x_cells, 0.0), cond(x_cells * m_cells * n_cells, 0.0);
  for (size_t x = 0; x < x_cells; ++x) {
    double px = 0.0;
    for (size_t mn = 0; mn < m_cells * n_cells; ++mn) px += t[x * m_cells * n_cells + mn];
    p_x[x] = px;
    if (px > 0.0)
      for (size_t mn = 0; mn < m_cells * n_cells; ++mn)
        cond[x * m_cells * n_cells + mn] = t[x * m_cells * n_cells + mn] / px;
  }

  std::vector<double> out_table(t.size(), 0.0);
  double tv_cost = 0.0;
  std::vector<double> cond_m(m_cells), cond_n(n_cells);
  for (size_t x = 0; x < x_cells; ++x) {
    if (p_x[x] <= 0.0) continue;
    const double* cx = cond.data() + x * m_cells * n_cells;
    std::fill(cond_m.begin(), cond_m.end(), 0.0);
    std::fill(cond_n.begin(), cond_n.end(), 0.0);
    for (size_t m = 0; m < m_cells; ++m)
      for (size_t n = 0; n < n_cells; ++n) {
        cond_m[m] += cx[m * n_cells + n];
        cond_n[n] += cx[m * n_cells + n];
      }
    double eps_x = 0.0;
    double* ox = out_table.data() + x * m_cells * n_cells;
    for (size_t m = 0; m < m_cells; ++m) {
      bool m_ok = prior_u.probs[m] > 0.0 ? (cond_m[m] / prior_u.probs[m] <= th1)
                                         : (cond_m[m] <= 0.0);
      for (size_t n = 0; n < n_cells; ++n) {
        double c = cx[m * n_cells + n];
        if (c <= 0.0) continue;
        bool n_ok = prior_v.probs[n] > 0.0 ? (cond_n[n] / prior_v.probs[n] <= th2)
                                           : (cond_n[n] <= 0.0);
        bool mn_ok = prior_u.probs[m] > 0.0 && prior_v.probs[n] > 0.0 &&
                     c / (prior_u.probs[m] * prior_v.probs[n]) <= th12;
        if (m_ok && n_ok && mn_ok)
          ox[m * n_cells + n] = c;
        else
          eps_x += c;
      }
    }
    for (size_t m = 0; m < m_cells; ++m)
      for (size_t n = 0; n < n_cells; ++n) {
        ox[m * n_cells + n] =
            p_x[x] * (ox[m * n_cells + n] + eps_x * prior_u.probs[m] * prior_v.probs[n]);
      }
    tv_cost += p_x[x] * eps_x;
  }

  BipartiteSmoothResult out;
  out.smoothed = JointDist(base.axes(), std::move(out_table));
  out.tv_cost = tv_cost;

  const auto& ot = out.smoothed.table();
  out.max_ratio_m = out.max_ratio_n = out.max_ratio_mn = 0.0;
  for (size_t x = 0; x < x_cells; ++x) {
    if (p_x[x] <= 0.0) continue;
    const double* sx = ot.data() + x * m_cells * n_cells;
    for (size_t m = 0; m < m_cells; ++m) {
      double sm = 0.0;
      for (size_t n = 0; n < n_cells; ++n) {
        double v = sx[m * n_cells + n] / p_x[x];
        sm += v;
        if (v > 0.0 && prior_u.probs[m] > 0.0 && prior_v.probs[n] > 0.0)
          out.max_ratio_mn =
              std::max(out.max_ratio_mn, v / (prior_u.probs[m] * prior_v.probs[n]));
      }
      if (prior_u.probs[m] > 0.0) out.max_ratio_m = std::max(out.max_ratio_m, sm / prior_u.probs[m]);
    }
    for (size_t n = 0; n < n_cells; ++n) {
      double sn = 0.0;
      for (size_t m = 0; m < m_cells; ++m) sn += sx[m * n_cells + n] / p_x[x];
      if (prior_v.probs[n] > 0.0) out.max_ratio_n = std::max(out.max_ratio_n, sn / prior_v.probs[n]);
    }
  }
  return out;
}

BipartiteSplitSpec make_bipartite_split_spec(const JointDist& base, size_t x_axis_count,
                                             size_t m_axis_count, const FiniteDist& prior_u,
                                             const FiniteDist& prior_v, int log_slots_m,
                                             int log_slots_n) {
  if (log_slots_m < 0 || log_slots_n < 0 || log_slots_m + log_slots_n > 26)
    throw ConfigError("bipartite split: slot grid too large");
  BipartiteSplitSpec spec;
  if (base.rank() < x_axis_count + m_axis_count + 1)
    throw ConfigError("bipartite split: axis split out of range");
  spec.x_cells = 1;
  spec.m_cells = 1;
  spec.n_cells = 1;
  for (size_t i = 0; i < base.rank(); ++i) {
    if (i < x_axis_count)
      spec.x_cells *= base.axis_size(i);
    else if (i < x_axis_count + m_axis_count)
      spec.m_cells *= base.axis_size(i);
    else
      spec.n_cells *= base.axis_size(i);
  }
  if (prior_u.size() != spec.m_cells || prior_v.size() != spec.n_cells)
    throw ConfigError("bipartite split: prior alphabets do not match");
  spec.prior_u = prior_u.probs;
  spec.prior_v = prior_v.probs;
  spec.log_slots_m = log_slots_m;
  spec.log_slots_n = log_slots_n;

  const auto& t = base.table();
  spec.p_x.assign(spec.x_cells, 0.0);
  spec.cond_mn.assign(t.size(), 0.0);
  size_t mn = spec.m_cells * spec.n_cells;
  for (size_t x = 0; x < spec.x_cells; ++x) {
    double px = 0.0;
    for (size_t i = 0; i < mn; ++i) px += t[x * mn + i];
    spec.p_x[x] = px;
    if (px > 0.0)
      for (size_t i = 0; i < mn; ++i) spec.cond_mn[x * mn + i] = t[x * mn + i] / px;
  }
  for (size_t m = 0; m < spec.m_cells; ++m) {
    double pm = 0.0;
    for (size_t x = 0; x < spec.x_cells; ++x)
      for (size_t n = 0; n < spec.n_cells; ++n) pm += t[(x * spec.m_cells + m) * spec.n_cells + n];
    if (pm > 0.0 && spec.prior_u[m] <= 0.0)
      throw ConfigError("prior_u has a zero where the M marginal is positive");
  }
  for (size_t n = 0; n < spec.n_cells; ++n) {
    double pn = 0.0;
    for (size_t x = 0; x < spec.x_cells; ++x)
      for (size_t m = 0; m < spec.m_cells; ++m) pn += t[(x * spec.m_cells + m) * spec.n_cells + n];
    if (pn > 0.0 && spec.prior_v[n] <= 0.0)
      throw ConfigError("prior_v has a zero where the N marginal is positive");
  }

  spec.cond_samplers.reserve(spec.x_cells);
  for (size_t x = 0; x < spec.x_cells; ++x)
    spec.cond_samplers.emplace_back(std::span<const double>(spec.cond_mn.data() + x * mn, mn));
  spec.u_sampler = DistSampler(std::span<const double>(spec.prior_u));
  spec.v_sampler = DistSampler(std::span<const double>(spec.prior_v));
  spec.x_sampler = DistSampler(std::span<const double>(spec.p_x));
  return spec;
}

BipartiteDraw bipartite_split_sample(const BipartiteSplitSpec& spec, Xoshiro256ss& rng) {
  BipartiteDraw draw;
  draw.j = rng.next_below(spec.slots_m());
  draw.k = rng.next_below(spec.slots_n());
  draw.x = spec.x_sampler(rng);
  size_t mn = spec.cond_samplers[draw.x](rng);
  size_t m_planted = mn / spec.n_cells;
  size_t n_planted = mn % spec.n_cells;
  draw.m_codewords.resize(spec.slots_m());
  draw.n_codewords.resize(spec.slots_n());
  for (size_t i = 0; i < spec.slots_m(); ++i)
    draw.m_codewords[i] =
        (i == draw.j) ? static_cast<uint32_t>(m_planted) : static_cast<uint32_t>(spec.u_sampler(rng));
  for (size_t i = 0; i < spec.slots_n(); ++i)
    draw.n_codewords[i] =
        (i == draw.k) ? static_cast<uint32_t>(n_planted) : static_cast<uint32_t>(spec.v_sampler(rng));
  return draw;
}

std::pair<size_t, size_t> sample_slot_pair_by_weight(const BipartiteSplitSpec& spec, size_t x,
                                                     std::span<const uint32_t> m_codewords,
                                                     std::span<const uint32_t> n_codewords,
                                                     Xoshiro256ss& rng, bool* degenerate) {
  if (degenerate) *degenerate = false;
  double total = 0.0;
  std::vector<double> weights(m_codewords.size() * n_codewords.size(), 0.0);
  for (size_t j = 0; j < m_codewords.size(); ++j) {
    uint32_t m = m_codewords[j];
    double um = spec.prior_u[m];
    for (size_t k = 0; k < n_codewords.size(); ++k) {
      uint32_t n = n_codewords[k];
      double denom = um * spec.prior_v[n];
      double w = denom > 0.0 ? spec.cond_at(x, m, n) / denom : 0.0;
      weights[j * n_codewords.size() + k] = w;
      total += w;
    }
  }
  if (total <= 0.0) {
    if (degenerate) *degenerate = true;
    return {rng.next_below(m_codewords.size()), rng.next_below(n_codewords.size())};
  }
  double u = rng.next_double() * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return {i / n_codewords.size(), i % n_codewords.size()};
  }
  return {m_codewords.size() - 1, n_codewords.size() - 1};
}

ConvexSplitReport verify_convex_split(const ConvexSplitSpec& spec, double eps, double delta,
                                      VerifyMethod method, size_t n_samples, uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw ConfigError("verify_convex_split: eps and delta must lie in (0,1)");
  const SplitCore& core = spec.core;

  ConvexSplitReport rep;
  rep.log_slots = spec.log_slots;
  rep.bound = eps + delta;

  // D_s of the base against p_X x prior, over the flattened cells
  {
    std::vector<double> p(core.x_cells * core.m_cells), q(p.size());
    for (size_t x = 0; x < core.x_cells; ++x)
      for (size_t m = 0; m < core.m_cells; ++m) {
        p[x * core.m_cells + m] = core.p_x[x] * core.cond_at(x, m);
        q[x * core.m_cells + m] = core.p_x[x] * core.prior[m];
      }
    rep.ds_value = ds_eps(p, q, eps);
  }
  rep.r_threshold = rep.ds_value + 2.0 * std::log2(3.0 / delta);

  const size_t slots = spec.slots();
  if (method == VerifyMethod::Exact) {
    double cells_log2 = std::log2(double(core.x_cells)) + double(slots) * std::log2(double(core.m_cells));
    if (cells_log2 > std::log2(double(kDefaultTableCellCap)))
      throw ConfigError("verify_convex_split: exact enumeration infeasible, use method=mc");
    double acc = 0.0;
    std::vector<uint32_t> cw(slots, 0);
    for (size_t x = 0; x < core.x_cells; ++x) {
      if (core.p_x[x] <= 0.0) continue;
      std::fill(cw.begin(), cw.end(), 0);
      while (true) {
        double prior_prod = 1.0, ratio_sum = 0.0;
        for (uint32_t m : cw) {
          prior_prod *= core.prior[m];
          ratio_sum += core.ratio_at(x, m);
        }
        double prod = core.p_x[x] * prior_prod;
        double split = prod * ratio_sum / double(slots);
        acc += std::abs(split - prod);
        size_t i = slots;
        for (; i-- > 0;) {
          if (++cw[i] < core.m_cells) break;
          cw[i] = 0;
        }
        if (i == size_t(-1)) break;
      }
    }
    rep.tv = 0.5 * acc;
    rep.std_error = 0.0;
    rep.exact = true;
    rep.pass = rep.tv <= rep.bound;
  } else {
    if (n_samples == 0) throw ConfigError("verify_convex_split: n_samples must be positive");
    // E_{x~product} |split/product - 1| / 2 with the O(slots) ratio trick
    Xoshiro256ss rng(mix64(seed ^ 0xC0FFEE5EEDULL));
    double sum = 0.0, sum_sq = 0.0;
    std::vector<uint32_t> cw(slots);
    for (size_t s = 0; s < n_samples; ++s) {
      size_t x = core.x_sampler(rng);
      double ratio_sum = 0.0;
      for (size_t i = 0; i < slots; ++i) {
        uint32_t m = static_cast<uint32_t>(core.prior_sampler(rng));
        cw[i] = m;
        ratio_sum += core.ratio_at(x, m);
      }
      double v = 0.5 * std::abs(ratio_sum / double(slots) - 1.0);
      sum += v;
      sum_sq += v * v;
    }
    rep.tv = sum / double(n_samples);
    double var = std::max(0.0, sum_sq / double(n_samples) - rep.tv * rep.tv);
    rep.std_error = std::sqrt(var / double(n_samples));
    rep.exact = false;
    rep.n_samples = n_samples;
    rep.pass = rep.tv <= rep.bound + 4.0 * rep.std_error;
  }
  return rep;
}

}  // namespace oscl
