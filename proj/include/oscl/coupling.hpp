#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oscl/divergence.hpp"
#include "oscl/prob.hpp"

namespace oscl {

// Flattened view of a base joint p_{X,M} (X axes leading) against a decoy
// prior on the M part. Everything protocols and samplers need: the
// conditional rows, the prior, and the pointwise ratios p(m|x)/prior(m).
struct SplitCore {
  size_t x_cells = 0, m_cells = 0;
  std::vector<double> p_x;     // |X|
  std::vector<double> cond;    // x * m, p(m|x); zero rows allowed for p_x = 0
  std::vector<double> prior;   // m
  std::vector<double> ratio;   // x * m
  std::vector<DistSampler> cond_samplers;
  DistSampler prior_sampler;
  DistSampler x_sampler;
  double dmax_bits = 0.0;  // max log2 ratio over supp

  double cond_at(size_t x, size_t m) const { return cond[x * m_cells + m]; }
  double ratio_at(size_t x, size_t m) const { return ratio[x * m_cells + m]; }
};

// `x_axis_count` leading axes of `base` form X; the rest form the M part.
// The prior must be positive wherever the M-marginal of `base` is.
SplitCore make_split_core(const JointDist& base, size_t x_axis_count, const FiniteDist& prior);

struct ConvexSplitSpec {
  SplitCore core;
  int log_slots = 0;  // R

  size_t slots() const { return size_t{1} << log_slots; }
};

ConvexSplitSpec make_convex_split_spec(const JointDist& base, size_t x_axis_count,
                                       const FiniteDist& prior, int log_slots);

// One sampled codebook realization of the split joint.
struct CodebookDraw {
  size_t j = 0;  // planted slot, 0-based
  size_t x = 0;
  std::vector<uint32_t> codewords;
};

// log2 density of the split joint at (x, codewords); O(slots).
double convex_split_log_density(const ConvexSplitSpec& spec, size_t x,
                                std::span<const uint32_t> codewords);
// log2 density of the all-independent reference p_X x prior^slots.
double product_log_density(const ConvexSplitSpec& spec, size_t x,
                           std::span<const uint32_t> codewords);

CodebookDraw convex_split_sample(const ConvexSplitSpec& spec, Xoshiro256ss& rng);

// Draw a slot from the conditional law of J given (X = x, codebook), i.e.
// with weights proportional to ratio(x, codeword). When every weight
// vanishes the slot is drawn uniformly and *degenerate is set.
size_t sample_slot_by_weight(const SplitCore& core, size_t x,
                             std::span<const uint32_t> codewords, Xoshiro256ss& rng,
                             bool* degenerate = nullptr);

// Truncate-and-refill smoothing: drop the conditional mass whose ratio to
// the prior exceeds 2^c, refill with eps_x * prior. Preserves the X
// marginal; the smoothed pointwise ratio is at most 2^c + 1.
struct SmoothResult {
  JointDist smoothed;
  double tv_cost = 0.0;  // sum_x p(x) eps_x, the truncation bookkeeping cost
};
SmoothResult smooth_truncate(const JointDist& base, size_t x_axis_count, const FiniteDist& prior,
                             double c);

// Bipartite form: Good_x keeps (m,n) whose three ratios stay below
// (delta^2/24) * 2^{R1}, 2^{R2} and 2^{R1+R2} respectively.
struct BipartiteSmoothResult {
  JointDist smoothed;
  double tv_cost = 0.0;
  double max_ratio_m = 0.0;   // realized max of p(x,m)/(p(x)u(m))
  double max_ratio_n = 0.0;
  double max_ratio_mn = 0.0;  // realized max of the joint ratio
};
BipartiteSmoothResult smooth_truncate_bipartite(const JointDist& base, size_t x_axis_count,
                                                size_t m_axis_count, const FiniteDist& prior_u,
                                                const FiniteDist& prior_v, int r1, int r2,
                                                double delta);

struct BipartiteSplitSpec {
  // M side and N side cores share p_x; cond_mn gives the joint conditional.
  size_t x_cells = 0, m_cells = 0, n_cells = 0;
  std::vector<double> p_x;
  std::vector<double> cond_mn;  // x * m * n
  std::vector<double> prior_u;  // m
  std::vector<double> prior_v;  // n
  int log_slots_m = 0, log_slots_n = 0;
  std::vector<DistSampler> cond_samplers;  // per x over (m,n)
  DistSampler u_sampler, v_sampler, x_sampler;

  size_t slots_m() const { return size_t{1} << log_slots_m; }
  size_t slots_n() const { return size_t{1} << log_slots_n; }
  double cond_at(size_t x, size_t m, size_t n) const {
    return cond_mn[(x * m_cells + m) * n_cells + n];
  }
};

BipartiteSplitSpec make_bipartite_split_spec(const JointDist& base, size_t x_axis_count,
                                             size_t m_axis_count, const FiniteDist& prior_u,
                                             const FiniteDist& prior_v, int log_slots_m,
                                             int log_slots_n);

struct BipartiteDraw {
  size_t j = 0, k = 0;
  size_t x = 0;
  std::vector<uint32_t> m_codewords;
  std::vector<uint32_t> n_codewords;
};

BipartiteDraw bipartite_split_sample(const BipartiteSplitSpec& spec, Xoshiro256ss& rng);

// Joint (J,K) draw by Bayes weights over the slot grid; degenerate -> uniform.
std::pair<size_t, size_t> sample_slot_pair_by_weight(const BipartiteSplitSpec& spec, size_t x,
                                                     std::span<const uint32_t> m_codewords,
                                                     std::span<const uint32_t> n_codewords,
                                                     Xoshiro256ss& rng,
                                                     bool* degenerate = nullptr);

enum class VerifyMethod { Exact, MonteCarlo };

struct ConvexSplitReport {
  double ds_value = 0.0;      // D_s^eps(base || p_X x prior)
  double r_threshold = 0.0;   // ds_value + 2 log2(3/delta)
  int log_slots = 0;
  double tv = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // eps + delta
  bool pass = false;
  bool exact = false;
  size_t n_samples = 0;
};

// Measures 1/2 || split - product || against eps + delta. Exact mode
// enumerates the full codebook table and requires
// |X| * m^{2^R} <= cell cap; otherwise use Monte Carlo.
ConvexSplitReport verify_convex_split(const ConvexSplitSpec& spec, double eps, double delta,
                                      VerifyMethod method, size_t n_samples, uint64_t seed);

}  // namespace oscl
