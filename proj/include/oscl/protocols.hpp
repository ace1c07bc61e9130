#pragma once

#include <map>
#include <optional>
#include <string>

#include "oscl/coupling.hpp"
#include "oscl/decoding.hpp"

namespace oscl {

// Index bookkeeping for binned codebooks: 2^{R+r} slots in 2^R bins of
// size 2^r; slot s lives in bin s >> r.
struct BinPlan {
  int log_bins = 0;      // R
  int log_bin_size = 0;  // r

  size_t total() const { return size_t{1} << (log_bins + log_bin_size); }
  size_t bins() const { return size_t{1} << log_bins; }
  size_t bin_size() const { return size_t{1} << log_bin_size; }
  size_t bin_of(size_t slot) const { return slot >> log_bin_size; }
  size_t first_of(size_t bin) const { return bin << log_bin_size; }
};

struct PremiseCheck {
  std::string name;
  double mass = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ProtocolReport {
  std::string task;
  double empirical_error = 0.0;
  double std_error = 0.0;
  double bias_bound = 0.0;  // sqrt(cells/trials) for plug-in tv estimates
  std::map<std::string, int> comm_bits;
  double theorem_bound = 0.0;
  std::string bound_display;
  std::vector<PremiseCheck> premise_checks;
  std::map<std::string, double> abort_rates;
  std::map<std::string, int> rates;
  std::map<std::string, double> values;
  size_t trials = 0;
  uint64_t seed = 0;
  double wall_ms = 0.0;
  bool premise_violated = false;

  Json to_json() const;
};

// Bin-size search over the five two-sender constraints: slot budgets from
// the split step, slot caps from the bipartite decoding step.
struct BinSplitConstraints {
  int R_a = 0, R_b = 0;
  double ds_a = 0.0, ds_b = 0.0;
  double dh_a = 0.0, dh_b = 0.0, dh_ab = 0.0;
  double delta = 0.1;
  int r_max = 20;
};

struct BinSplit {
  int r_a = 0, r_b = 0;
  bool feasible = false;
};

// Smallest lexicographic feasible pair; infeasibility is explicit.
BinSplit find_bin_split(const BinSplitConstraints& c);

// ---- Task 1, convex-split route ----

struct Task1Config {
  JointDist p_xym;  // axes X, Y, M (any order)
  std::optional<CondKernel> ext_kernel;  // p_{E|XM}; input flat over (X,M), X-major
  std::optional<FiniteDist> prior_t;     // over (M,E) flat, M-major; default p_ME
  double eps = 0.1;
  double delta = 0.2;
  int R = -1, r = -1;  // negative: derive from the rate displays
  DhMode mode = DhMode::Exact;
  bool fictitious = false;  // codebook drawn from the split joint instead of i.i.d.
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 20;
};

ProtocolReport run_task1_convex_split(const Task1Config& cfg);

// ---- Task 1, rejection-sampling route with hashing ----

struct BRConfig {
  JointDist p_xym;                     // axes X, Y, M
  std::optional<CondKernel> n_given_y;  // default: the M|Y marginal kernel
  double eps = 0.1;
  double delta = 0.2;
  uint64_t k_cap = uint64_t{1} << 16;  // rational-snapping denominator
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
  bool derandomize = false;
  size_t n_strings = 8;
};

ProtocolReport run_task1_br(const BRConfig& cfg);

// ---- Tasks 2/3: two senders, one receiver ----

struct Task2Config {
  JointDist p_xymn;  // axes X, Y, M, N
  std::optional<FiniteDist> prior_s;  // over M, default p_M
  std::optional<FiniteDist> prior_t;  // over N, default p_N
  double eps1 = 0.03, eps2 = 0.03, eps3 = 0.03;
  double eta1 = 0.05, eta2 = 0.05;
  double delta = 0.1;
  int R_a = -1, R_b = -1;
  int r_a = -1, r_b = -1;
  DhMode mode = DhMode::Greedy;
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 20;
};

ProtocolReport run_task2(const Task2Config& cfg);

struct Task3Config {
  JointDist p_xyzmn;  // axes X, Y, Z, M, N
  std::optional<FiniteDist> prior_s;
  std::optional<FiniteDist> prior_t;
  double eps1 = 0.03, eps2 = 0.03, eps3 = 0.03;
  double delta = 0.1;
  int R_a = -1, R_b = -1;
  int r_a = -1, r_b = -1;
  DhMode mode = DhMode::Greedy;
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 20;
};

ProtocolReport run_task3(const Task3Config& cfg);

// ---- Tasks 4/5: one sender, two receivers ----

struct Task4Config {
  JointDist p_xmn;  // axes X, M, N
  std::optional<FiniteDist> prior_s;
  std::optional<FiniteDist> prior_t;
  double eps1 = 0.03, eps2 = 0.03, eps3 = 0.03;
  double delta = 0.1;
  int R_b = -1, R_c = -1;
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 20;
};

ProtocolReport run_task4(const Task4Config& cfg);

struct Task5Config {
  JointDist p_xyzmn;  // axes X, Y, Z, M, N with (M,N)-X-(Y,Z)
  std::optional<FiniteDist> prior_s;
  std::optional<FiniteDist> prior_t;
  double eps1 = 0.03, eps2 = 0.03, eps3 = 0.03;
  double delta1 = 0.05, delta2 = 0.1;
  int R_b = -1, R_c = -1, r_b = -1, r_c = -1;
  DhMode mode = DhMode::Greedy;
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 20;
};

ProtocolReport run_task5(const Task5Config& cfg);

// ---- Task 7: lossy source compression on top of the BR route ----

struct Task7Config {
  JointDist p_xy;       // axes X, Y
  CondKernel m_given_x;  // test channel
  std::optional<CondKernel> n_given_y;
  std::vector<std::vector<double>> distortion;  // d[x][z]
  std::vector<std::vector<size_t>> reproduction;  // f[y][m] -> z index
  size_t z_cells = 0;
  double k = 0.0;  // distortion threshold
  double eps = 0.1;
  double delta1 = 0.05, delta2 = 0.1;
  uint64_t k_cap = uint64_t{1} << 16;
  bool derandomize = false;
  size_t n_strings = 8;
  size_t trials = 10000;
  uint64_t seed = 1;
  size_t workers = 1;
};

ProtocolReport run_task7(const Task7Config& cfg);

// ---- Tasks 8/9: source compression corollaries ----

struct DsbcSource {
  int bits = 8;
  double flip = 0.1;
};

struct Task8Config {
  std::optional<JointDist> p_xy;     // dense source, axes X, Y
  std::optional<DsbcSource> dsbc;    // or product-structured source
  double eps = 0.1;
  double delta = 0.2;
  int R_a = -1, R_b = -1;
  int r_a = -1, r_b = -1;  // negative: slot budget from the split constraint
  size_t trials = 2000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 22;
};

ProtocolReport run_task8(const Task8Config& cfg);

struct Task8SweepRow {
  int R_a, R_b;
  double error, std_error, premise_mass, bound_loose, bound_tight;
};

std::vector<Task8SweepRow> run_task8_sweep(const Task8Config& base,
                                           const std::vector<std::pair<int, int>>& rates);

struct Task9Config {
  JointDist p_xy;       // axes X, Y
  CondKernel n_given_y;  // helper channel, X-Y-N by construction
  std::optional<FiniteDist> prior_t;  // over N, default p_N
  double eps = 0.1;
  double eta = 0.05;
  double delta = 0.1;
  int R_a = -1, R_b = -1;
  int r_a = -1, r_b = -1;
  DhMode mode = DhMode::Greedy;
  size_t trials = 5000;
  uint64_t seed = 1;
  size_t workers = 1;
  int slot_cap_log2 = 20;
};

ProtocolReport run_task9(const Task9Config& cfg);

// Exact inverse-CDF Binomial(n, p) draw; used by the identity-message
// codebook sampler.
uint64_t binomial_sample(Xoshiro256ss& rng, uint64_t n, double p);

}  // namespace oscl
