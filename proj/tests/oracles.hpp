#pragma once

// Brute-force reference implementations used as independent oracles by the
// unit and acceptance suites. These deliberately use the most naive
// algorithm available and share no code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oscl/prob.hpp"
#include "oscl/rng.hpp"

namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min{a : Pr_p[p/q > 2^a] < eps} by scanning every candidate threshold.
inline double ds_bruteforce(const std::vector<double>& p, const std::vector<double>& q,
                            double eps) {
  std::vector<double> candidates;
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    total += p[i];
    candidates.push_back(q[i] > 0.0 ? std::log2(p[i] / q[i]) : kInf);
  }
  if (eps > total) return -kInf;
  std::sort(candidates.begin(), candidates.end());
  double best = kInf;
  auto tail = [&](double a) {
    double mass = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0.0) continue;
      double lr = q[i] > 0.0 ? std::log2(p[i] / q[i]) : kInf;
      if (lr > a) mass += p[i];
    }
    return mass;
  };
  // +inf candidate: feasible iff nothing has ratio > 2^inf, i.e. never;
  // treat as fallback when every finite candidate fails
  bool any = false;
  for (double a : candidates) {
    if (!std::isfinite(a)) continue;
    if (tail(a) < eps) {
      best = std::min(best, a);
      any = true;
    }
  }
  if (!any) {
    // either +inf (q-null mass >= eps) or the largest finite is infeasible
    return kInf;
  }
  return best;
}

struct DhOracleResult {
  double value = 0.0;
  double q_mass = 0.0;
  double p_mass = 0.0;
  uint32_t best_mask = 0;
};

// Exhaustive scan over all subsets; alphabets up to ~20 symbols.
inline DhOracleResult dh_bruteforce(const std::vector<double>& p, const std::vector<double>& q,
                                    double eps) {
  const size_t n = p.size();
  DhOracleResult best;
  best.q_mass = kInf;
  for (uint32_t mask = 0; mask < (uint32_t{1} << n); ++mask) {
    double pm = 0.0, qm = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (mask & (uint32_t{1} << i)) {
        pm += p[i];
        qm += q[i];
      }
    if (pm + 1e-15 < 1.0 - eps) continue;
    if (qm < best.q_mass) {
      best.q_mass = qm;
      best.p_mass = pm;
      best.best_mask = mask;
    }
  }
  best.value = best.q_mass > 0.0 ? -std::log2(best.q_mass) : kInf;
  return best;
}

// Smooth max divergence by scanning clip levels lambda over a fine grid of
// the critical ratios.
inline double dmax_eps_bruteforce(const std::vector<double>& p, const std::vector<double>& q,
                                  double eps) {
  double inf_mass = 0.0;
  std::vector<std::pair<double, size_t>> ratios;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0)
      inf_mass += p[i];
    else
      ratios.push_back({p[i] / q[i], i});
  }
  if (inf_mass > eps) return kInf;
  double budget = eps - inf_mass;
  auto removal = [&](double lambda) {
    double r = 0.0;
    for (auto [ratio, i] : ratios) r += std::max(p[i] - lambda * q[i], 0.0);
    return r;
  };
  // bisect the smallest feasible lambda
  double hi = 0.0;
  for (auto [ratio, i] : ratios) hi = std::max(hi, ratio);
  if (removal(0.0) <= budget) return -kInf;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (removal(mid) <= budget)
      hi = mid;
    else
      lo = mid;
  }
  return std::log2(hi);
}

// --- random instance generators (test-side, deterministic) ---

inline std::vector<double> random_simplex(oscl::Xoshiro256ss& rng, size_t n,
                                          double floor_mix = 0.0) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - rng.next_double());
    sum += x;
  }
  for (double& x : v) x = (1.0 - floor_mix) * (x / sum) + floor_mix / double(n);
  return v;
}

inline oscl::FiniteDist random_dist(oscl::Xoshiro256ss& rng, size_t n, double floor_mix = 0.0) {
  return oscl::FiniteDist(
      [&] {
        std::vector<std::string> l(n);
        for (size_t i = 0; i < n; ++i) l[i] = std::to_string(i);
        return l;
      }(),
      random_simplex(rng, n, floor_mix));
}

inline oscl::JointDist random_joint(oscl::Xoshiro256ss& rng, const std::vector<size_t>& sizes,
                                    const std::vector<std::string>& names,
                                    double floor_mix = 0.0) {
  size_t cells = 1;
  std::vector<oscl::Axis> axes;
  for (size_t i = 0; i < sizes.size(); ++i) {
    cells *= sizes[i];
    oscl::Axis ax{names[i], {}};
    for (size_t s = 0; s < sizes[i]; ++s) ax.symbols.push_back(std::to_string(s));
    axes.push_back(ax);
  }
  return oscl::JointDist(axes, random_simplex(rng, cells, floor_mix));
}

// Random kernel with every row drawn from the simplex.
inline oscl::CondKernel random_kernel(oscl::Xoshiro256ss& rng, const oscl::Axis& in,
                                      const std::string& out_name, size_t out_size,
                                      double floor_mix = 0.0) {
  oscl::Axis out{out_name, {}};
  for (size_t s = 0; s < out_size; ++s) out.symbols.push_back(std::to_string(s));
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < in.size(); ++i) rows.push_back(random_simplex(rng, out_size, floor_mix));
  return oscl::CondKernel(in, out, rows);
}

// p_XYM with M-X-Y built by composition: p_X, then Y|X and M|X kernels.
inline oscl::JointDist random_markov_xym(oscl::Xoshiro256ss& rng, size_t xc, size_t yc,
                                         size_t mc, double floor_mix = 0.05) {
  oscl::JointDist p_x =
      oscl::JointDist::from_finite(random_dist(rng, xc, floor_mix), "X");
  oscl::CondKernel y_given_x = random_kernel(rng, p_x.axes()[0], "Y", yc, floor_mix);
  oscl::CondKernel m_given_x = random_kernel(rng, p_x.axes()[0], "M", mc, floor_mix);
  return chain(chain(p_x, "X", y_given_x), "X", m_given_x);
}

}  // namespace oracles
