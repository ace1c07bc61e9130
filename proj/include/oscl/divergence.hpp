#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "oscl/prob.hpp"

namespace oscl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One atom of the likelihood-ratio spectrum: log2(p/q) carrying p-mass.
struct SpectrumPoint {
  double log_ratio;
  double mass;
};

// Spectrum of log2(p(x)/q(x)) over supp(p), sorted by log_ratio descending.
// Cells with q = 0 < p appear as +inf. Equal ratios are merged.
std::vector<SpectrumPoint> log_ratio_spectrum(std::span<const double> p, std::span<const double> q);
std::vector<SpectrumPoint> log_ratio_spectrum(const JointDist& p, const JointDist& q);

// Relative entropy in bits; +inf on support violation.
double kl(std::span<const double> p, std::span<const double> q);
double kl(const JointDist& p, const JointDist& q);

// Max divergence: max log2(p/q) over supp(p); +inf on support violation.
double dmax(std::span<const double> p, std::span<const double> q);
double dmax(const JointDist& p, const JointDist& q);

// Smooth max divergence. Smoothing removes up to eps total mass from the
// largest-ratio symbols (sub-normalized p''), levelling ratios by exact
// water-filling. eps in [0,1).
double dmax_eps(std::span<const double> p, std::span<const double> q, double eps);
double dmax_eps(const JointDist& p, const JointDist& q, double eps);

// Max information spectrum divergence: min{a : Pr_p[p/q > 2^a] < eps},
// strict tail comparison. eps = 0 returns dmax. Result is one of the
// spectrum values, +inf when the q-null mass already exceeds eps, or -inf
// when eps exceeds the total p-mass (sub-normalized inputs).
double ds_eps(std::span<const double> p, std::span<const double> q, double eps);
double ds_eps(const JointDist& p, const JointDist& q, double eps);
double ds_eps_from_spectrum(const std::vector<SpectrumPoint>& spec, double eps,
                            double total_mass = 1.0);

// Spectrum quantile over rational ratios num/den (den 0 encodes +inf), kept
// exact through 128-bit cross multiplication. Returns the achieving atom in
// lowest terms; used wherever snapped-grid constructions need integral
// acceptance counts.
struct RationalQuantile {
  uint64_t num = 0, den = 1;
  double bits = 0.0;
};
RationalQuantile ds_eps_rational(std::span<const double> mass, std::span<const uint64_t> num,
                                 std::span<const uint64_t> den, double eps);

// Deterministic test set over the cells of a (possibly multi-axis) joint.
struct AcceptanceSet {
  std::vector<Axis> axes;
  std::vector<uint8_t> member;  // one flag per flat cell

  bool contains(size_t flat) const { return member[flat] != 0; }
  size_t count() const;
};

enum class DhMode { Exact, Greedy };

struct HypothesisTestResult {
  double value = 0.0;  // -log2 q(A), bits
  AcceptanceSet set;
  double p_mass = 0.0;
  double q_mass = 0.0;
  bool exact = false;
};

// Smooth hypothesis testing divergence over deterministic sets:
// max{-log2 q(A) : p(A) >= 1-eps}. Exact mode runs branch-and-bound over
// ratio-sorted symbols and requires at most kDhExactLimit active symbols;
// greedy mode returns the ratio-descending prefix set (feasible, value a
// lower bound on the optimum).
inline constexpr size_t kDhExactLimit = 24;
HypothesisTestResult dh_eps(const JointDist& p, const JointDist& q, double eps, DhMode mode);
HypothesisTestResult dh_eps(std::span<const double> p, std::span<const double> q, double eps,
                            DhMode mode);

// Shannon quantities in bits, computed as KL against the matching product
// factorization.
double entropy(const JointDist& j, const std::vector<std::string>& axes);
double mutual_info(const JointDist& j, const std::vector<std::string>& a,
                   const std::vector<std::string>& b);
double cond_mutual_info(const JointDist& j, const std::vector<std::string>& a,
                        const std::vector<std::string>& b, const std::vector<std::string>& c);
double tripartite_info(const JointDist& j, const std::vector<std::string>& a,
                       const std::vector<std::string>& b, const std::vector<std::string>& c);

struct QuantileEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of ds_eps(p^n || q^n) via the empirical tail
// quantile of i.i.d. block log-ratio sums.
QuantileEstimate ds_eps_iid_estimate(const FiniteDist& p, const FiniteDist& q, size_t n,
                                     double eps, size_t n_samples, uint64_t seed);

// Exact ds_eps(p^n || q^n) by convolving the per-symbol spectrum.
double ds_eps_iid_exact(const FiniteDist& p, const FiniteDist& q, size_t n, double eps,
                        size_t support_cap = 2'000'000);

}  // namespace oscl
