#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oscl/coupling.hpp"
#include "oscl/divergence.hpp"

namespace oscl {

// Position-based decoders scan candidate slots in ascending index order and
// return the first slot whose pair passes the acceptance test. `bottom` is
// set when no slot passes; callers map it to a default slot and account the
// event separately.

struct UniDecodeResult {
  size_t index = 0;
  bool bottom = false;
};

// `accept(y, m)` decides membership of (side info, codeword) in the test.
template <typename Accept>
UniDecodeResult decode_unipartite(size_t y, std::span<const uint32_t> codewords,
                                  Accept&& accept) {
  for (size_t j = 0; j < codewords.size(); ++j)
    if (accept(y, codewords[j])) return {j, false};
  return {0, true};
}

struct BiDecodeResult {
  size_t j = 0, k = 0;
  bool bottom = false;
};

// Lexicographic scan over the slot grid (j outer, k inner).
template <typename Accept>
BiDecodeResult decode_bipartite(size_t y, std::span<const uint32_t> m_codewords,
                                std::span<const uint32_t> n_codewords, Accept&& accept) {
  for (size_t j = 0; j < m_codewords.size(); ++j)
    for (size_t k = 0; k < n_codewords.size(); ++k)
      if (accept(y, m_codewords[j], n_codewords[k])) return {j, k, false};
  return {0, 0, true};
}

// Dense acceptance test over (side-info, M) pairs, flat index y * m_cells + m.
struct DenseTest {
  size_t m_cells = 0;
  std::vector<uint8_t> member;

  bool operator()(size_t y, uint32_t m) const { return member[y * m_cells + m] != 0; }
};

// The optimizing set of the hypothesis-testing divergence, packaged as a
// decoder test. p_joint's leading axes are the side info; `m_cells` is the
// flat size of the trailing M block.
DenseTest build_test_from_dh(const JointDist& p_joint, const JointDist& q_reference,
                             size_t m_cells, double eps, DhMode mode,
                             HypothesisTestResult* detail = nullptr);

// The three log-ratio thresholds of the bipartite test, in bits:
// accept (y,m,n) iff lr1 >= t1 and lr2 >= t2 and lr12 >= t12.
struct BipartiteThresholds {
  double t1 = 0.0, t2 = 0.0, t12 = 0.0;

  static BipartiteThresholds from_rates(int r1, int r2, double delta) {
    double ld = std::log2(1.0 / delta);
    return {double(r1) + ld, double(r2) + ld, double(r1 + r2) + ld};
  }
};

// Dense bipartite test over (side, m, n) cells built from pointwise
// log-ratio tables. Ratio tables are indexed [side][m][n] flat.
struct DenseBipartiteTest {
  size_t m_cells = 0, n_cells = 0;
  std::vector<uint8_t> member;  // side * m * n

  bool operator()(size_t y, uint32_t m, uint32_t n) const {
    return member[(y * m_cells + m) * n_cells + n] != 0;
  }
};

DenseBipartiteTest build_test_from_thresholds(const BipartiteThresholds& th,
                                              std::span<const double> lr1,
                                              std::span<const double> lr2,
                                              std::span<const double> lr12, size_t side_cells,
                                              size_t m_cells, size_t n_cells);

// Exact probability, under p (flat over side*m*n), of failing any of the
// three threshold tests: the premise mass of the bipartite decoder.
double bipartite_premise_mass(const BipartiteThresholds& th, std::span<const double> p,
                              std::span<const double> lr1, std::span<const double> lr2,
                              std::span<const double> lr12);

// Monte Carlo benches driving the two facts directly.

struct UniBenchReport {
  int log_slots = 0;
  double dh_value = 0.0;
  double error_rate = 0.0;  // Pr[J' != J]
  double error_std_error = 0.0;
  double bottom_rate = 0.0;
  double tv_plugin = 0.0;  // plug-in 1/2||p_{Y M_{J'}} - p_YM||
  double bound_error = 0.0;
  double bound_tv = 0.0;
  size_t trials = 0;
};

UniBenchReport bench_unipartite(const JointDist& p_ym, size_t y_axis_count,
                                const FiniteDist& prior, double eps, double delta, int log_slots,
                                DhMode mode, size_t trials, uint64_t seed, size_t workers = 1);

struct BiBenchReport {
  int log_slots_m = 0, log_slots_n = 0;
  double premise_mass = 0.0;
  bool premise_ok = false;
  double pair_error_rate = 0.0;
  double pair_error_std_error = 0.0;
  double bottom_rate = 0.0;
  double bound_pair_error = 0.0;  // eps + 3 delta
  size_t trials = 0;
};

BiBenchReport bench_bipartite(const JointDist& p_ymn, size_t y_axis_count, size_t m_axis_count,
                              const FiniteDist& prior_u, const FiniteDist& prior_v, double eps,
                              double delta, int log_slots_m, int log_slots_n, size_t trials,
                              uint64_t seed, size_t workers = 1);

}  // namespace oscl
