#include "oscl/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace oscl {

namespace {

void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("divergence: alphabet size mismatch");
}

void check_pair(const JointDist& p, const JointDist& q) {
  if (p.rank() != q.rank()) throw ConfigError("divergence: rank mismatch");
  for (size_t i = 0; i < p.rank(); ++i)
    if (p.axes()[i].name != q.axes()[i].name || p.axes()[i].symbols != q.axes()[i].symbols)
      throw ConfigError("divergence: axis mismatch");
}

}  // namespace

std::vector<SpectrumPoint> log_ratio_spectrum(std::span<const double> p,
                                              std::span<const double> q) {
  check_pair(p, q);
  std::vector<SpectrumPoint> pts;
  pts.reserve(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    double lr = q[i] > 0.0 ? std::log2(p[i] / q[i]) : kInf;
    pts.push_back({lr, p[i]});
  }
  std::sort(pts.begin(), pts.end(),
            [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.log_ratio > b.log_ratio; });
  std::vector<SpectrumPoint> merged;
  for (const auto& pt : pts) {
    if (!merged.empty() && merged.back().log_ratio == pt.log_ratio)
      merged.back().mass += pt.mass;
    else
      merged.push_back(pt);
  }
  return merged;
}

std::vector<SpectrumPoint> log_ratio_spectrum(const JointDist& p, const JointDist& q) {
  check_pair(p, q);
  return log_ratio_spectrum(std::span<const double>(p.table()),
                            std::span<const double>(q.table()));
}

double kl(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  double sum = 0.0, c = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    double x = p[i] * std::log2(p[i] / q[i]) - c;
    double t = sum + x;
    c = (t - sum) - x;
    sum = t;
  }
  return sum;
}

double kl(const JointDist& p, const JointDist& q) {
  check_pair(p, q);
  return kl(std::span<const double>(p.table()), std::span<const double>(q.table()));
}

double dmax(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  double best = -kInf;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    best = std::max(best, std::log2(p[i] / q[i]));
  }
  return best;
}

double dmax(const JointDist& p, const JointDist& q) {
  check_pair(p, q);
  return dmax(std::span<const double>(p.table()), std::span<const double>(q.table()));
}

double dmax_eps(std::span<const double> p, std::span<const double> q, double eps) {
  check_pair(p, q);
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("dmax_eps: eps must lie in [0,1)");
  if (eps == 0.0) return dmax(p, q);

  // Water-filling: level the top ratios to lambda, removing
  // sum_i max(p_i - lambda q_i, 0) <= eps of mass.
  struct Cell {
    double ratio, p, q;
  };
  std::vector<Cell> cells;
  double inf_mass = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0)
      inf_mass += p[i];
    else
      cells.push_back({p[i] / q[i], p[i], q[i]});
  }
  if (inf_mass > eps) return kInf;
  double budget = eps - inf_mass;  // q-null mass must be removed outright
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.ratio > b.ratio; });
  if (cells.empty()) return -kInf;

  double p_top = 0.0, q_top = 0.0;
  for (size_t k = 0; k < cells.size(); ++k) {
    p_top += cells[k].p;
    q_top += cells[k].q;
    double next_ratio = (k + 1 < cells.size()) ? cells[k + 1].ratio : 0.0;
    // lambda solving p_top - lambda q_top = budget; the level is valid once
    // it stops undercutting the next ratio
    double lambda = (p_top - budget) / q_top;
    if (lambda >= next_ratio) return lambda > 0.0 ? std::log2(lambda) : -kInf;
  }
  return -kInf;
}

double dmax_eps(const JointDist& p, const JointDist& q, double eps) {
  check_pair(p, q);
  return dmax_eps(std::span<const double>(p.table()), std::span<const double>(q.table()), eps);
}

double ds_eps_from_spectrum(const std::vector<SpectrumPoint>& spec, double eps,
                            double total_mass) {
  if (eps > total_mass) return -kInf;
  if (spec.empty()) return -kInf;
  double above = 0.0;  // mass with log_ratio strictly greater than current
  double result = kInf;
  for (const auto& pt : spec) {
    if (above < eps)
      result = pt.log_ratio;
    else
      break;
    above += pt.mass;
  }
  return result;
}

double ds_eps(std::span<const double> p, std::span<const double> q, double eps) {
  check_pair(p, q);
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("ds_eps: eps must lie in [0,1]");
  double total = kahan_sum(p);
  if (total > 1.0 + 1e-9) throw ConfigError("ds_eps: first argument has mass > 1");
  if (eps == 0.0) return dmax(p, q);
  return ds_eps_from_spectrum(log_ratio_spectrum(p, q), eps, total);
}

double ds_eps(const JointDist& p, const JointDist& q, double eps) {
  check_pair(p, q);
  return ds_eps(std::span<const double>(p.table()), std::span<const double>(q.table()), eps);
}

RationalQuantile ds_eps_rational(std::span<const double> mass, std::span<const uint64_t> num,
                                 std::span<const uint64_t> den, double eps) {
  if (mass.size() != num.size() || mass.size() != den.size())
    throw ConfigError("ds_eps_rational: array length mismatch");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("ds_eps_rational: eps must lie in (0,1]");
  struct Atom {
    double mass;
    uint64_t num, den;
  };
  std::vector<Atom> atoms;
  for (size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0 || num[i] == 0) continue;
    atoms.push_back({mass[i], num[i], den[i]});
  }
  if (atoms.empty()) throw ConfigError("ds_eps_rational: empty spectrum");
  auto greater = [](const Atom& a, const Atom& b) {
    bool ainf = a.den == 0, binf = b.den == 0;
    if (ainf != binf) return ainf;
    if (ainf) return false;
    return (__uint128_t)a.num * b.den > (__uint128_t)b.num * a.den;
  };
  std::sort(atoms.begin(), atoms.end(), greater);
  size_t pick = atoms.size();
  double above = 0.0;
  for (size_t i = 0; i < atoms.size();) {
    size_t j = i;
    double group = 0.0;
    while (j < atoms.size() && !greater(atoms[i], atoms[j]) && !greater(atoms[j], atoms[i])) {
      group += atoms[j].mass;
      ++j;
    }
    if (above < eps)
      pick = i;
    else
      break;
    above += group;
    i = j;
  }
  if (pick == atoms.size() || atoms[pick].den == 0)
    throw ConfigError("ds_eps_rational: the achieving ratio is unbounded");
  uint64_t n = atoms[pick].num, d = atoms[pick].den;
  uint64_t g = std::gcd(n, d);
  RationalQuantile out;
  out.num = n / g;
  out.den = d / g;
  out.bits = std::log2(double(out.num) / double(out.den));
  return out;
}

size_t AcceptanceSet::count() const {
  size_t n = 0;
  for (uint8_t m : member) n += m;
  return n;
}

namespace {

struct DhItem {
  size_t index;
  double p, q, ratio;
};

// Depth-first branch and bound minimizing q-mass subject to collecting at
// least `target` p-mass. Items arrive ratio-descending; the fractional
// completion gives the pruning bound.
struct DhSearch {
  const std::vector<DhItem>& items;
  std::vector<double> p_suffix;
  double target;
  double best_q = kInf;
  std::vector<uint8_t> chosen, best;

  explicit DhSearch(const std::vector<DhItem>& it, double tgt) : items(it), target(tgt) {
    p_suffix.assign(items.size() + 1, 0.0);
    for (size_t i = items.size(); i-- > 0;) p_suffix[i] = p_suffix[i + 1] + items[i].p;
    chosen.assign(items.size(), 0);
    best.assign(items.size(), 0);
  }

  double fractional_completion(size_t i, double p_need) const {
    double q_extra = 0.0;
    for (size_t k = i; k < items.size() && p_need > 1e-15; ++k) {
      double take = std::min(p_need, items[k].p);
      q_extra += items[k].q * (take / items[k].p);
      p_need -= take;
    }
    return p_need > 1e-15 ? kInf : q_extra;
  }

  void run(size_t i, double p_have, double q_have) {
    if (p_have + 1e-15 >= target) {
      if (q_have < best_q) {
        best_q = q_have;
        best = chosen;
      }
      return;
    }
    if (i == items.size()) return;
    if (p_have + p_suffix[i] + 1e-15 < target) return;
    if (q_have + fractional_completion(i, target - p_have) >= best_q) return;
    chosen[i] = 1;
    run(i + 1, p_have + items[i].p, q_have + items[i].q);
    chosen[i] = 0;
    run(i + 1, p_have, q_have);
  }
};

}  // namespace

HypothesisTestResult dh_eps(std::span<const double> p, std::span<const double> q, double eps,
                            DhMode mode) {
  check_pair(p, q);
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("dh_eps: eps must lie in [0,1)");

  std::vector<uint8_t> member(p.size(), 0);
  double free_p = 0.0;
  std::vector<DhItem> items;
  for (size_t i = 0; i < p.size(); ++i) {
    if (q[i] <= 0.0) {
      if (p[i] > 0.0) {
        member[i] = 1;  // q-null symbols cost nothing
        free_p += p[i];
      }
      continue;
    }
    if (p[i] <= 0.0) continue;  // pure q-mass never helps
    items.push_back({i, p[i], q[i], p[i] / q[i]});
  }
  std::sort(items.begin(), items.end(), [](const DhItem& a, const DhItem& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.index < b.index;
  });

  double target = (1.0 - eps) - free_p;
  double p_mass = free_p, q_mass = 0.0;
  bool exact = false;
  if (target > 1e-15) {
    if (mode == DhMode::Exact) {
      if (items.size() > kDhExactLimit)
        throw ConfigError("dh_eps: exact mode supports at most " +
                          std::to_string(kDhExactLimit) + " active symbols");
      DhSearch search(items, target);
      search.run(0, 0.0, 0.0);
      if (search.best_q == kInf)
        throw ConfigError("dh_eps: no feasible set reaches the required p-mass");
      for (size_t k = 0; k < items.size(); ++k) {
        if (search.best[k]) {
          member[items[k].index] = 1;
          p_mass += items[k].p;
          q_mass += items[k].q;
        }
      }
      exact = true;
    } else {
      double need = target;
      for (const auto& it : items) {
        if (need <= 1e-15) break;
        member[it.index] = 1;
        p_mass += it.p;
        q_mass += it.q;
        need -= it.p;
      }
      if (need > 1e-15) throw ConfigError("dh_eps: no feasible set reaches the required p-mass");
    }
  } else {
    exact = (mode == DhMode::Exact);
  }

  HypothesisTestResult out;
  out.set.member = std::move(member);
  out.p_mass = p_mass;
  out.q_mass = q_mass;
  out.value = q_mass > 0.0 ? -std::log2(q_mass) + 0.0 : kInf;  // +0.0 folds away -0
  out.exact = exact;
  return out;
}

HypothesisTestResult dh_eps(const JointDist& p, const JointDist& q, double eps, DhMode mode) {
  check_pair(p, q);
  HypothesisTestResult r = dh_eps(std::span<const double>(p.table()),
                                  std::span<const double>(q.table()), eps, mode);
  r.set.axes = p.axes();
  return r;
}

double entropy(const JointDist& j, const std::vector<std::string>& axes) {
  JointDist m = marginalize(j, axes);
  double h = 0.0;
  for (double v : m.table())
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

namespace {

std::vector<std::string> concat(std::initializer_list<const std::vector<std::string>*> parts) {
  std::vector<std::string> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

}  // namespace

double mutual_info(const JointDist& j, const std::vector<std::string>& a,
                   const std::vector<std::string>& b) {
  JointDist pab = marginalize(j, concat({&a, &b}));
  JointDist ref = product(marginalize(j, a), marginalize(j, b));
  return kl(pab, ref);
}

double cond_mutual_info(const JointDist& j, const std::vector<std::string>& a,
                        const std::vector<std::string>& b, const std::vector<std::string>& c) {
  // I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C)
  return entropy(j, concat({&a, &c})) + entropy(j, concat({&b, &c})) -
         entropy(j, concat({&a, &b, &c})) - entropy(j, c);
}

double tripartite_info(const JointDist& j, const std::vector<std::string>& a,
                       const std::vector<std::string>& b, const std::vector<std::string>& c) {
  JointDist pabc = marginalize(j, concat({&a, &b, &c}));
  JointDist ref = product(product(marginalize(j, a), marginalize(j, b)), marginalize(j, c));
  return kl(pabc, ref);
}

QuantileEstimate ds_eps_iid_estimate(const FiniteDist& p, const FiniteDist& q, size_t n,
                                     double eps, size_t n_samples, uint64_t seed) {
  if (n == 0) throw ConfigError("ds_eps_iid_estimate: n must be positive");
  if (n_samples == 0) throw ConfigError("ds_eps_iid_estimate: n_samples must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("ds_eps_iid_estimate: eps must lie in (0,1]");
  if (p.size() != q.size()) throw ConfigError("ds_eps_iid_estimate: alphabet mismatch");

  std::vector<double> lr(p.size());
  for (size_t i = 0; i < p.size(); ++i)
    lr[i] = (p.probs[i] > 0.0) ? (q.probs[i] > 0.0 ? std::log2(p.probs[i] / q.probs[i]) : kInf)
                               : 0.0;
  DistSampler sampler(std::span<const double>(p.probs));
  Xoshiro256ss rng(mix64(seed ^ 0x5151515151515151ULL));
  std::vector<double> sums(n_samples);
  for (size_t s = 0; s < n_samples; ++s) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += lr[sampler(rng)];
    sums[s] = acc;
  }
  std::sort(sums.begin(), sums.end());
  // min{a : #(sums > a)/N < eps} over sample points
  size_t allowed = static_cast<size_t>(std::ceil(eps * double(n_samples)));
  if (allowed == 0) allowed = 1;
  size_t rank = n_samples - allowed;  // 0-based index of the estimate
  QuantileEstimate out;
  out.estimate = sums[rank];
  size_t band = static_cast<size_t>(
      std::ceil(std::sqrt(double(n_samples) * eps * (1.0 - eps))));
  size_t lo = rank > band ? rank - band : 0;
  size_t hi = std::min(n_samples - 1, rank + band);
  out.std_error = 0.5 * (sums[hi] - sums[lo]);
  return out;
}

double ds_eps_iid_exact(const FiniteDist& p, const FiniteDist& q, size_t n, double eps,
                        size_t support_cap) {
  if (n == 0) throw ConfigError("ds_eps_iid_exact: n must be positive");
  if (p.size() != q.size()) throw ConfigError("ds_eps_iid_exact: alphabet mismatch");

  // base spectrum; +inf handled as an absorbing bucket
  double inf_mass = 0.0;
  std::map<int64_t, double> acc;  // quantized log-ratio -> mass
  const double scale = 1e9;       // 1e-9 bits quantization for merging
  auto key_of = [&](double v) { return static_cast<int64_t>(std::llround(v * scale)); };
  std::vector<std::pair<double, double>> base;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p.probs[i] <= 0.0) continue;
    if (q.probs[i] <= 0.0)
      inf_mass += p.probs[i];
    else
      base.push_back({std::log2(p.probs[i] / q.probs[i]), p.probs[i]});
  }

  acc[0] = 1.0;
  double cur_inf = 0.0;
  for (size_t step = 0; step < n; ++step) {
    std::map<int64_t, double> next;
    double next_inf = cur_inf;  // inf stays inf
    for (const auto& [k, m] : acc) {
      for (const auto& [lr, pm] : base) next[key_of(double(k) / scale + lr)] += m * pm;
      next_inf += m * inf_mass;
    }
    if (next.size() > support_cap) throw ConfigError("ds_eps_iid_exact: support cap exceeded");
    acc = std::move(next);
    cur_inf = next_inf;
  }

  std::vector<SpectrumPoint> spec;
  spec.reserve(acc.size() + 1);
  if (cur_inf > 0.0) spec.push_back({kInf, cur_inf});
  for (auto it = acc.rbegin(); it != acc.rend(); ++it)
    spec.push_back({double(it->first) / scale, it->second});
  if (eps == 0.0) return spec.empty() ? -kInf : spec.front().log_ratio;
  return ds_eps_from_spectrum(spec, eps, 1.0);
}

}  // namespace oscl
