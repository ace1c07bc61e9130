#include "oscl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace oscl {

namespace {

JointDist reorder(const JointDist& j, const std::vector<std::string>& order) {
  return marginalize(j, order);
}

struct Xmy {
  size_t xc, yc, mc;
  std::vector<double> p_xy;   // x*y
  std::vector<double> p_y;    // y
  std::vector<double> m_rows;  // x*m, p(m|x)
  JointDist p_xym;            // axes X,Y,M
};

Xmy split_xmy(const JointDist& p_in) {
  Xmy s;
  s.p_xym = reorder(p_in, {"X", "Y", "M"});
  s.xc = s.p_xym.axis_size(0);
  s.yc = s.p_xym.axis_size(1);
  s.mc = s.p_xym.axis_size(2);
  if (!is_markov(s.p_xym, {"M"}, {"X"}, {"Y"}, 1e-9))
    throw ConfigError("the chain M-X-Y does not hold");
  JointDist p_xy = marginalize(s.p_xym, {"X", "Y"});
  s.p_xy = p_xy.table();
  s.p_y.assign(s.yc, 0.0);
  for (size_t x = 0; x < s.xc; ++x)
    for (size_t y = 0; y < s.yc; ++y) s.p_y[y] += s.p_xy[x * s.yc + y];
  s.m_rows.assign(s.xc * s.mc, 0.0);
  for (size_t x = 0; x < s.xc; ++x) {
    double px = 0.0;
    for (size_t y = 0; y < s.yc; ++y) px += s.p_xy[x * s.yc + y];
    if (px <= 0.0) continue;
    for (size_t m = 0; m < s.mc; ++m) {
      double v = 0.0;
      for (size_t y = 0; y < s.yc; ++y)
        v += s.p_xym.at_flat((x * s.yc + y) * s.mc + m);
      s.m_rows[x * s.mc + m] = v / px;
    }
  }
  return s;
}

std::vector<double> helper_rows(const Xmy& s, const std::optional<CondKernel>& n_given_y) {
  std::vector<double> rows(s.yc * s.mc, 0.0);
  if (n_given_y) {
    if (n_given_y->in_size() != s.yc || n_given_y->out_size() != s.mc)
      throw ConfigError("helper kernel shape mismatch");
    for (size_t y = 0; y < s.yc; ++y)
      for (size_t m = 0; m < s.mc; ++m) rows[y * s.mc + m] = n_given_y->at(y, m);
    return rows;
  }
  for (size_t y = 0; y < s.yc; ++y) {
    if (s.p_y[y] <= 0.0) continue;
    for (size_t m = 0; m < s.mc; ++m) {
      double v = 0.0;
      for (size_t x = 0; x < s.xc; ++x) v += s.p_xym.at_flat((x * s.yc + y) * s.mc + m);
      rows[y * s.mc + m] = v / s.p_y[y];
    }
  }
  return rows;
}

double ds_vs_helper(const Xmy& s, const std::vector<double>& n_rows, double eps) {
  std::vector<double> q(s.p_xym.cells());
  for (size_t x = 0; x < s.xc; ++x)
    for (size_t y = 0; y < s.yc; ++y)
      for (size_t m = 0; m < s.mc; ++m)
        q[(x * s.yc + y) * s.mc + m] = s.p_xy[x * s.yc + y] * n_rows[y * s.mc + m];
  return ds_eps(std::span<const double>(s.p_xym.table()), std::span<const double>(q), eps);
}

uint64_t gcd64(uint64_t a, uint64_t b) { return b == 0 ? a : gcd64(b, a % b); }

}  // namespace

double task1_br_bound(const JointDist& p_xym, const std::optional<CondKernel>& n_given_y,
                      double eps, double delta) {
  Xmy s = split_xmy(p_xym);
  return ds_vs_helper(s, helper_rows(s, n_given_y), eps) + 2.0 * std::log2(1.0 / delta);
}

double task1_br_bound_iid(const JointDist& p_xym_base,
                          const std::optional<CondKernel>& n_given_y, size_t n, double eps,
                          double delta) {
  if (n == 0) throw ConfigError("task1_br_bound_iid: n must be positive");
  Xmy s = split_xmy(p_xym_base);
  std::vector<double> n_rows = helper_rows(s, n_given_y);

  // per-symbol spectrum, then n-fold convolution
  double inf_mass = 0.0;
  std::vector<std::pair<double, double>> base;
  for (size_t x = 0; x < s.xc; ++x)
    for (size_t y = 0; y < s.yc; ++y)
      for (size_t m = 0; m < s.mc; ++m) {
        double mass = s.p_xym.at_flat((x * s.yc + y) * s.mc + m);
        if (mass <= 0.0) continue;
        double den = s.p_xy[x * s.yc + y] * n_rows[y * s.mc + m];
        if (den <= 0.0)
          inf_mass += mass;
        else
          base.push_back({std::log2(mass / den), mass});
      }
  const double scale = 1e9;
  auto key_of = [&](double v) { return int64_t(std::llround(v * scale)); };
  std::map<int64_t, double> acc;
  acc[0] = 1.0;
  double cur_inf = 0.0;
  for (size_t step = 0; step < n; ++step) {
    std::map<int64_t, double> next;
    double next_inf = cur_inf;
    for (const auto& [k, mass] : acc) {
      for (const auto& [lr, pm] : base) next[key_of(double(k) / scale + lr)] += mass * pm;
      next_inf += mass * inf_mass;
    }
    if (next.size() > 4'000'000) throw ConfigError("task1_br_bound_iid: spectrum too large");
    acc = std::move(next);
    cur_inf = next_inf;
  }
  std::vector<SpectrumPoint> spec;
  if (cur_inf > 0.0) spec.push_back({kInf, cur_inf});
  for (auto it = acc.rbegin(); it != acc.rend(); ++it)
    spec.push_back({double(it->first) / scale, it->second});
  return ds_eps_from_spectrum(spec, eps, 1.0) + 2.0 * std::log2(1.0 / delta);
}

ExtensionBuild build_extension(const JointDist& p_xm_in, uint64_t k_cap) {
  if (k_cap < 2 || k_cap > (uint64_t{1} << 20)) throw ConfigError("build_extension: bad k_cap");
  JointDist p_xm = reorder(p_xm_in, {"X", "M"});
  const size_t xc = p_xm.axis_size(0), mc = p_xm.axis_size(1);
  JointDist p_x = marginalize(p_xm, {"X"});

  std::vector<uint64_t> counts(xc * mc, 0);
  uint64_t g = k_cap;
  for (size_t x = 0; x < xc; ++x) {
    if (p_x.at_flat(x) <= 0.0) continue;
    std::vector<double> row(mc);
    for (size_t m = 0; m < mc; ++m) row[m] = p_xm.at_flat(x * mc + m) / p_x.at_flat(x);
    auto snapped = snap_to_grid(row, k_cap);
    for (size_t m = 0; m < mc; ++m) {
      counts[x * mc + m] = snapped[m];
      if (snapped[m] > 0) g = gcd64(g, snapped[m]);
    }
  }
  uint64_t K = k_cap / g;
  for (auto& c : counts) c /= g;

  std::vector<Axis> axes = p_xm.axes();
  Axis e_axis{"E", {}};
  e_axis.symbols.reserve(K);
  for (uint64_t e = 0; e < K; ++e) e_axis.symbols.push_back(std::to_string(e + 1));
  axes.push_back(e_axis);

  std::vector<double> table(xc * mc * K, 0.0);
  double snap_acc = 0.0;
  for (size_t x = 0; x < xc; ++x)
    for (size_t m = 0; m < mc; ++m) {
      double cell = p_x.at_flat(x) / double(K);
      for (uint64_t e = 0; e < counts[x * mc + m]; ++e) table[(x * mc + m) * K + e] = cell;
      snap_acc += std::abs(p_x.at_flat(x) * double(counts[x * mc + m]) / double(K) -
                           p_xm.at_flat(x * mc + m));
    }

  ExtensionBuild out;
  out.K = K;
  out.p_xme = JointDist(std::move(axes), std::move(table));
  out.snap_tv = 0.5 * snap_acc;

  // Ds^0 against p_X x U: every occupied cell has ratio |M| exactly
  double d0 = -kInf;
  for (size_t x = 0; x < xc; ++x) {
    if (p_x.at_flat(x) <= 0.0) continue;
    for (size_t m = 0; m < mc; ++m)
      if (counts[x * mc + m] > 0) {
        double cell = p_x.at_flat(x) / double(K);
        double ref = p_x.at_flat(x) / double(mc * K);
        d0 = std::max(d0, std::log2(cell / ref));
      }
  }
  out.d0_value = d0;
  return out;
}

ExtensionInequalityReport verify_extension_inequality(const JointDist& p_xym_in,
                             const std::optional<CondKernel>& n_given_y, double eps,
                             uint64_t k_cap) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("verify_extension_inequality: eps must lie in (0,1)");
  if (k_cap < 2 || k_cap > (uint64_t{1} << 12)) throw ConfigError("verify_extension_inequality: bad k_cap");
  Xmy s = split_xmy(p_xym_in);

  // snap both kernels onto the 1/k_cap grid
  std::vector<uint64_t> c_m(s.xc * s.mc, 0), c_n(s.yc * s.mc, 0);
  for (size_t x = 0; x < s.xc; ++x) {
    double px = 0.0;
    for (size_t y = 0; y < s.yc; ++y) px += s.p_xy[x * s.yc + y];
    if (px <= 0.0) continue;
    std::vector<double> row(s.m_rows.begin() + x * s.mc, s.m_rows.begin() + (x + 1) * s.mc);
    auto snapped = snap_to_grid(row, k_cap);
    for (size_t m = 0; m < s.mc; ++m) c_m[x * s.mc + m] = snapped[m];
  }
  std::vector<double> n_rows = helper_rows(s, n_given_y);
  for (size_t y = 0; y < s.yc; ++y) {
    if (s.p_y[y] <= 0.0) continue;
    std::vector<double> row(n_rows.begin() + y * s.mc, n_rows.begin() + (y + 1) * s.mc);
    auto snapped = snap_to_grid(row, k_cap);
    for (size_t m = 0; m < s.mc; ++m) c_n[y * s.mc + m] = snapped[m];
  }

  // lhs = Ds^eps on the snapped instance, with the achieving atom kept as
  // an exact fraction c_m/c_n
  std::vector<double> mass;
  std::vector<uint64_t> nums, dens;
  for (size_t x = 0; x < s.xc; ++x)
    for (size_t y = 0; y < s.yc; ++y) {
      double pxy = s.p_xy[x * s.yc + y];
      if (pxy <= 0.0) continue;
      for (size_t m = 0; m < s.mc; ++m) {
        uint64_t cm = c_m[x * s.mc + m];
        if (cm == 0) continue;
        mass.push_back(pxy * double(cm) / double(k_cap));
        nums.push_back(cm);
        dens.push_back(c_n[y * s.mc + m]);
      }
    }
  RationalQuantile quant = ds_eps_rational(mass, nums, dens, eps);
  uint64_t num = quant.num, den = quant.den;
  double lhs = quant.bits;

  ExtensionInequalityReport rep;
  rep.eps = eps;
  rep.lhs = lhs;
  uint64_t K_ext = k_cap * den;
  if (K_ext > (uint64_t{1} << 22)) throw ConfigError("verify_extension_inequality: extension too large");
  rep.K_ext = K_ext;
  rep.d0 = std::log2(double(s.mc));

  // acceptance counts t(y,m) = num * c_n[y][m] * (K_ext / (k_cap * den)) = num * c_n
  // capped at K_ext; extension counts c_ext(x,m) = c_m * den.
  bool capped = false;
  std::vector<uint64_t> t(s.yc * s.mc, 0);
  for (size_t i = 0; i < t.size(); ++i) {
    __uint128_t v = (__uint128_t)num * c_n[i];
    if (v >= K_ext) {
      if (v > K_ext) capped = true;
      t[i] = K_ext;
    } else {
      t[i] = uint64_t(v);
    }
  }
  rep.capped = capped;

  // hypo1: Pr_{p_Y x U}(A) vs 2^{lhs}/|M|
  double hypo1 = 0.0;
  for (size_t y = 0; y < s.yc; ++y) {
    if (s.p_y[y] <= 0.0) continue;
    double inner = 0.0;
    for (size_t m = 0; m < s.mc; ++m) inner += double(t[y * s.mc + m]);
    hypo1 += s.p_y[y] * inner / (double(s.mc) * double(K_ext));
  }
  rep.hypo1_lhs = hypo1;
  rep.hypo1_rhs = (double(num) / double(den)) / double(s.mc);
  rep.hypo1_exact = !capped && std::abs(rep.hypo1_lhs - rep.hypo1_rhs) <= 1e-12;

  // hypo2: Pr_{p_YME}(A)
  double hypo2 = 0.0;
  for (size_t x = 0; x < s.xc; ++x)
    for (size_t y = 0; y < s.yc; ++y) {
      double pxy = s.p_xy[x * s.yc + y];
      if (pxy <= 0.0) continue;
      for (size_t m = 0; m < s.mc; ++m) {
        uint64_t c_ext = c_m[x * s.mc + m] * den;
        uint64_t count = std::min(c_ext, t[y * s.mc + m]);
        hypo2 += pxy * double(count) / double(K_ext);
      }
    }
  rep.hypo2_mass = hypo2;
  rep.dh_witness = hypo1 > 0.0 ? -std::log2(hypo1) : kInf;

  // greedy Dh on the dense (Y, M, E) joint against p_Y x U
  {
    std::vector<double> p_yme(s.yc * s.mc * K_ext, 0.0);
    for (size_t x = 0; x < s.xc; ++x)
      for (size_t y = 0; y < s.yc; ++y) {
        double pxy = s.p_xy[x * s.yc + y];
        if (pxy <= 0.0) continue;
        for (size_t m = 0; m < s.mc; ++m) {
          uint64_t c_ext = c_m[x * s.mc + m] * den;
          double cell = pxy / double(K_ext);
          for (uint64_t e = 0; e < c_ext; ++e) p_yme[(y * s.mc + m) * K_ext + e] += cell;
        }
      }
    std::vector<double> q(p_yme.size());
    for (size_t y = 0; y < s.yc; ++y)
      for (size_t i = 0; i < s.mc * K_ext; ++i)
        q[y * s.mc * K_ext + i] = s.p_y[y] / double(s.mc * K_ext);
    rep.dh_greedy =
        dh_eps(std::span<const double>(p_yme), std::span<const double>(q), eps, DhMode::Greedy)
            .value;
  }
  bool witness_feasible = hypo2 >= 1.0 - eps - 1e-12;
  rep.dh_lower = witness_feasible ? std::max(rep.dh_greedy, rep.dh_witness) : rep.dh_greedy;
  rep.margin = rep.lhs - (rep.d0 - rep.dh_lower);
  return rep;
}

RouteChainReport check_route_chain(const JointDist& p_xym_in, double eps, uint64_t k_cap,
                                  int grid_points) {
  if (grid_points < 1 || grid_points > 16) throw ConfigError("check_theorem12: bad grid");
  Xmy s = split_xmy(p_xym_in);

  // all rows with denominators grid_points over the M simplex
  std::vector<std::vector<double>> simplex_rows;
  {
    std::vector<uint64_t> comp(s.mc, 0);
    std::function<void(size_t, uint64_t)> rec = [&](size_t i, uint64_t left) {
      if (i + 1 == s.mc) {
        comp[i] = left;
        std::vector<double> row(s.mc);
        for (size_t m = 0; m < s.mc; ++m) row[m] = double(comp[m]) / double(grid_points);
        simplex_rows.push_back(row);
        return;
      }
      for (uint64_t c = 0; c <= left; ++c) {
        comp[i] = c;
        rec(i + 1, left - c);
      }
    };
    rec(0, grid_points);
  }

  std::vector<double> canonical = helper_rows(s, std::nullopt);
  RouteChainReport rep;
  rep.br_at_canonical = ds_vs_helper(s, canonical, eps);
  rep.br = rep.br_at_canonical;
  std::vector<double> best_rows = canonical;

  size_t combos = 1;
  for (size_t y = 0; y < s.yc; ++y) combos *= simplex_rows.size();
  if (combos > 2'000'000) throw ConfigError("check_theorem12: kernel grid too large");
  std::vector<size_t> idx(s.yc, 0);
  std::vector<double> rows(s.yc * s.mc);
  for (size_t c = 0; c < combos; ++c) {
    size_t rem = c;
    for (size_t y = 0; y < s.yc; ++y) {
      idx[y] = rem % simplex_rows.size();
      rem /= simplex_rows.size();
      for (size_t m = 0; m < s.mc; ++m) rows[y * s.mc + m] = simplex_rows[idx[y]][m];
    }
    double v = ds_vs_helper(s, rows, eps);
    if (v < rep.br) {
      rep.br = v;
      best_rows = rows;
    }
  }
  rep.kernels_tried = combos + 1;

  // the extension route at the best helper found
  CondKernel best_kernel(Axis{"Y", s.p_xym.axes()[1].symbols},
                         Axis{"Nk", s.p_xym.axes()[2].symbols}, [&] {
                           std::vector<std::vector<double>> r(s.yc);
                           for (size_t y = 0; y < s.yc; ++y) {
                             r[y].assign(best_rows.begin() + y * s.mc,
                                         best_rows.begin() + (y + 1) * s.mc);
                             double sum = 0.0;
                             for (double v : r[y]) sum += v;
                             if (sum <= 0.0) r[y].assign(s.mc, 1.0 / double(s.mc));
                           }
                           return r;
                         }());
  ExtensionInequalityReport thm13 = verify_extension_inequality(s.p_xym, best_kernel, eps, k_cap);
  rep.ext0 = thm13.d0 - thm13.dh_lower;
  rep.item5_margin = rep.br - rep.ext0;

  // middle quantities on the thm13 extension granularity
  {
    uint64_t K = thm13.K_ext;
    std::vector<uint64_t> c_m(s.xc * s.mc, 0);
    for (size_t x = 0; x < s.xc; ++x) {
      double px = 0.0;
      for (size_t y = 0; y < s.yc; ++y) px += s.p_xy[x * s.yc + y];
      if (px <= 0.0) continue;
      std::vector<double> row(s.m_rows.begin() + x * s.mc, s.m_rows.begin() + (x + 1) * s.mc);
      auto snapped = snap_to_grid(row, K);
      for (size_t m = 0; m < s.mc; ++m) c_m[x * s.mc + m] = snapped[m];
    }
    size_t me = s.mc * K;
    std::vector<double> p4(s.xc * s.yc * me, 0.0);
    std::vector<double> p_me_given_y(s.yc * me, 0.0);
    for (size_t x = 0; x < s.xc; ++x)
      for (size_t y = 0; y < s.yc; ++y) {
        double pxy = s.p_xy[x * s.yc + y];
        if (pxy <= 0.0) continue;
        for (size_t m = 0; m < s.mc; ++m) {
          double cell = pxy / double(K);
          for (uint64_t e = 0; e < c_m[x * s.mc + m]; ++e) {
            p4[(x * s.yc + y) * me + m * K + e] = cell;
            p_me_given_y[y * me + m * K + e] += cell;
          }
        }
      }
    for (size_t y = 0; y < s.yc; ++y) {
      if (s.p_y[y] <= 0.0) continue;
      for (size_t i = 0; i < me; ++i) p_me_given_y[y * me + i] /= s.p_y[y];
    }
    std::vector<double> q4(p4.size(), 0.0);
    for (size_t x = 0; x < s.xc; ++x)
      for (size_t y = 0; y < s.yc; ++y) {
        double pxy = s.p_xy[x * s.yc + y];
        for (size_t i = 0; i < me; ++i) q4[(x * s.yc + y) * me + i] = pxy * p_me_given_y[y * me + i];
      }
    rep.ds_mid_ext = ds_eps(std::span<const double>(p4), std::span<const double>(q4), eps);

    // plain middle quantity on the same snapped M|X rows
    std::vector<double> p3(s.xc * s.yc * s.mc, 0.0), q3(p3.size(), 0.0);
    std::vector<double> m_given_y(s.yc * s.mc, 0.0);
    for (size_t x = 0; x < s.xc; ++x)
      for (size_t y = 0; y < s.yc; ++y) {
        double pxy = s.p_xy[x * s.yc + y];
        for (size_t m = 0; m < s.mc; ++m) {
          double v = pxy * double(c_m[x * s.mc + m]) / double(K);
          p3[(x * s.yc + y) * s.mc + m] = v;
          m_given_y[y * s.mc + m] += v;
        }
      }
    for (size_t y = 0; y < s.yc; ++y) {
      if (s.p_y[y] <= 0.0) continue;
      for (size_t m = 0; m < s.mc; ++m) m_given_y[y * s.mc + m] /= s.p_y[y];
    }
    for (size_t x = 0; x < s.xc; ++x)
      for (size_t y = 0; y < s.yc; ++y)
        for (size_t m = 0; m < s.mc; ++m)
          q3[(x * s.yc + y) * s.mc + m] = s.p_xy[x * s.yc + y] * m_given_y[y * s.mc + m];
    rep.ds_plain = ds_eps(std::span<const double>(p3), std::span<const double>(q3), eps);
  }
  rep.item6_mid_margin = rep.ds_mid_ext - rep.ds_plain;  // both on the snapped rows
  rep.item6_br_margin = rep.br_at_canonical - rep.br;    // both on the raw instance
  return rep;
}

std::map<std::string, double> rate_region_task3(const JointDist& p) {
  JointDist j = reorder(p, {"X", "Y", "Z", "M", "N"});
  if (!is_markov(j, {"M"}, {"X"}, {"Y", "Z", "N"}, 1e-9) ||
      !is_markov(j, {"N"}, {"Y"}, {"X", "Z", "M"}, 1e-9))
    throw ConfigError("rate_region_task3: chains do not hold");
  std::map<std::string, double> out;
  out["R_a"] = mutual_info(j, {"X"}, {"M"}) - mutual_info(j, {"M"}, {"N", "Z"});
  out["R_b"] = mutual_info(j, {"Y"}, {"N"}) - mutual_info(j, {"M", "Z"}, {"N"});
  out["sum"] = mutual_info(j, {"X"}, {"M"}) + mutual_info(j, {"Y"}, {"N"}) -
               tripartite_info(j, {"Z"}, {"M"}, {"N"});
  return out;
}

std::map<std::string, double> rate_region_task5(const JointDist& p) {
  JointDist j = reorder(p, {"X", "Y", "Z", "M", "N"});
  if (!is_markov(j, {"M", "N"}, {"X"}, {"Y", "Z"}, 1e-9))
    throw ConfigError("rate_region_task5: chain does not hold");
  std::map<std::string, double> out;
  out["R_b"] = mutual_info(j, {"X"}, {"M"}) - mutual_info(j, {"M"}, {"Y"});
  out["R_c"] = mutual_info(j, {"X"}, {"N"}) - mutual_info(j, {"N"}, {"Z"});
  out["sum"] = tripartite_info(j, {"X"}, {"M"}, {"N"}) - mutual_info(j, {"M"}, {"Y"}) -
               mutual_info(j, {"N"}, {"Z"});
  return out;
}

std::map<std::string, double> rate_region_task7(const JointDist& p_xy,
                                                const CondKernel& m_given_x) {
  JointDist j = chain(reorder(p_xy, {"X", "Y"}), "X", m_given_x);
  std::map<std::string, double> out;
  out["R"] = cond_mutual_info(j, {"X"}, {m_given_x.output.name}, {"Y"});
  return out;
}

std::map<std::string, double> rate_region_task8(const JointDist& p_xy) {
  JointDist j = reorder(p_xy, {"X", "Y"});
  std::map<std::string, double> out;
  out["R_a"] = entropy(j, {"X", "Y"}) - entropy(j, {"Y"});  // H(X|Y)
  out["R_b"] = entropy(j, {"X", "Y"}) - entropy(j, {"X"});  // H(Y|X)
  out["sum"] = entropy(j, {"X", "Y"});
  return out;
}

std::map<std::string, double> rate_region_task9(const JointDist& p_xy,
                                                const CondKernel& n_given_y) {
  JointDist j = chain(reorder(p_xy, {"X", "Y"}), "Y", n_given_y);
  const std::string nn = n_given_y.output.name;
  std::map<std::string, double> out;
  double h_x_given_n = entropy(j, {"X", nn}) - entropy(j, {nn});
  out["R_a"] = h_x_given_n;
  out["R_b"] = mutual_info(j, {"Y"}, {nn}) - mutual_info(j, {"X"}, {nn});
  out["sum"] = h_x_given_n + mutual_info(j, {"Y"}, {nn});
  // the classical helper-only inner region
  out["inner_R_a"] = h_x_given_n;
  out["inner_R_b"] = mutual_info(j, {"Y"}, {nn});
  return out;
}

std::vector<BoundRow> task6_bound_display(const JointDist& p_in, double eps, double delta) {
  JointDist p = reorder(p_in, {"X1", "X2", "M11", "M12", "M21", "M22", "Y1", "Y2"});
  if (!is_markov(p, {"M11", "M12"}, {"X1"}, {"Y1", "Y2", "X2", "M21", "M22"}, 1e-9) ||
      !is_markov(p, {"M21", "M22"}, {"X2"}, {"Y1", "Y2", "X1", "M11", "M12"}, 1e-9))
    throw ConfigError("task6: sender chains do not hold");

  auto X = [](int i) { return "X" + std::to_string(i); };
  auto M = [](int i, int jj) { return "M" + std::to_string(i) + std::to_string(jj); };
  auto Y = [](int jj) { return "Y" + std::to_string(jj); };

  auto ds_term = [&](const std::vector<std::string>& left,
                     const std::vector<std::string>& right) {
    // Ds^eps(p_{left,right} || p_left x prod of right marginals)
    std::vector<std::string> all = left;
    all.insert(all.end(), right.begin(), right.end());
    JointDist joint = marginalize(p, all);
    JointDist ref = marginalize(p, left);
    for (const auto& rname : right) ref = product(ref, marginalize(p, {rname}));
    return ds_eps(joint, ref, eps);
  };
  auto dh_term = [&](const std::vector<std::string>& ms, const std::string& y) {
    std::vector<std::string> all = ms;
    all.push_back(y);
    JointDist joint = marginalize(p, all);
    JointDist ref = marginalize(p, {ms[0]});
    for (size_t i = 1; i < ms.size(); ++i) ref = product(ref, marginalize(p, {ms[i]}));
    ref = product(ref, marginalize(p, {y}));
    DhMode mode = joint.cells() <= kDhExactLimit ? DhMode::Exact : DhMode::Greedy;
    return dh_eps(joint, ref, eps, mode).value;
  };

  const double slack = 10.0 * std::log2(1.0 / delta);
  std::vector<BoundRow> rows;
  auto single_ds = [&](int i, int jj) { return ds_term({X(i)}, {M(i, jj)}); };
  auto single_dh = [&](int i, int jj) { return dh_term({M(i, jj)}, Y(jj)); };

  for (int i = 1; i <= 2; ++i)
    for (int jj = 1; jj <= 2; ++jj) {
      BoundRow row;
      row.label = "R[" + std::to_string(i) + "][" + std::to_string(jj) + "]";
      row.ds_part = single_ds(i, jj);
      row.dh_part = single_dh(i, jj);
      row.rhs = row.ds_part - row.dh_part + slack;
      rows.push_back(row);
    }

  struct IJ {
    int i, jj;
  };
  std::vector<IJ> all = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  for (size_t a = 0; a < all.size(); ++a)
    for (size_t b = a + 1; b < all.size(); ++b) {
      BoundRow row;
      row.label = "R[" + std::to_string(all[a].i) + "][" + std::to_string(all[a].jj) + "]+R[" +
                  std::to_string(all[b].i) + "][" + std::to_string(all[b].jj) + "]";
      row.ds_part = single_ds(all[a].i, all[a].jj) + single_ds(all[b].i, all[b].jj);
      row.dh_part = single_dh(all[a].i, all[a].jj) + single_dh(all[b].i, all[b].jj);
      row.rhs = row.ds_part - row.dh_part + slack;
      rows.push_back(row);
    }

  for (int i = 1; i <= 2; ++i)
    for (int jj = 1; jj <= 2; ++jj) {
      int k = 3 - i, l = 3 - jj;
      BoundRow row;
      row.label = "R[" + std::to_string(i) + "][" + std::to_string(jj) + "]+R[" +
                  std::to_string(i) + "][" + std::to_string(l) + "]+R[" + std::to_string(k) +
                  "][" + std::to_string(jj) + "]";
      row.ds_part = ds_term({X(i)}, {M(i, jj), M(i, l)}) + single_ds(k, jj);
      row.dh_part = dh_term({M(i, jj), M(k, jj)}, Y(jj)) + single_dh(i, l);
      row.rhs = row.ds_part - row.dh_part + slack;
      rows.push_back(row);
    }

  {
    BoundRow row;
    row.label = "R[1][1]+R[1][2]+R[2][1]+R[2][2]";
    row.ds_part = ds_term({X(1)}, {M(1, 1), M(1, 2)}) + ds_term({X(2)}, {M(2, 1), M(2, 2)});
    row.dh_part = dh_term({M(1, 1), M(2, 1)}, Y(1)) + dh_term({M(1, 2), M(2, 2)}, Y(2));
    row.rhs = row.ds_part - row.dh_part + slack;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace oscl
