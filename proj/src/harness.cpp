#include "oscl/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oscl/analysis.hpp"
#include "oscl/coupling.hpp"
#include "oscl/decoding.hpp"
#include "oscl/protocols.hpp"

namespace oscl {

namespace {

double need_num(const Json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError("config: missing numeric field '" + key + "'");
  return j.at(key).get<double>();
}

double num_or(const Json& j, const std::string& key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

int int_or(const Json& j, const std::string& key, int dflt) {
  return j.contains(key) ? j.at(key).get<int>() : dflt;
}

DhMode mode_of(const Json& j, DhMode dflt) {
  if (!j.contains("mode")) return dflt;
  std::string m = j.at("mode").get<std::string>();
  if (m == "exact") return DhMode::Exact;
  if (m == "greedy") return DhMode::Greedy;
  throw ConfigError("config: mode must be 'exact' or 'greedy'");
}

JointDist dist_of(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing distribution '" + key + "'");
  return JointDist::from_json(j.at(key));
}

Json task_report_json(const ProtocolReport& rep) { return rep.to_json(); }

Json run_measure(const Json& cfg) {
  JointDist p = dist_of(cfg, "p");
  JointDist q = dist_of(cfg, "q");
  DhMode mode = mode_of(cfg, DhMode::Exact);
  std::vector<double> grid;
  if (cfg.contains("eps_grid"))
    for (const auto& v : cfg.at("eps_grid")) grid.push_back(v.get<double>());
  else
    grid = {0.01, 0.05, 0.1, 0.25};
  Json out;
  out["schema"] = "oscl-measure/1";
  out["kl"] = kl(p, q);
  out["dmax"] = dmax(p, q);
  Json ds = Json::object(), dh = Json::object(), dmx = Json::object();
  for (double e : grid) {
    std::ostringstream key;
    key << e;
    ds[key.str()] = ds_eps(p, q, e);
    HypothesisTestResult r = dh_eps(p, q, e, mode);
    dh[key.str()] = Json{{"value", r.value}, {"p_mass", r.p_mass}, {"q_mass", r.q_mass},
                         {"exact", r.exact}, {"set_size", r.set.count()}};
    dmx[key.str()] = dmax_eps(p, q, e);
  }
  out["ds_eps"] = ds;
  out["dh_eps"] = dh;
  out["dmax_eps"] = dmx;
  return out;
}

Json run_convex_split(const Json& cfg, uint64_t seed) {
  JointDist base = dist_of(cfg, "base");
  size_t x_axes = size_t(int_or(cfg, "x_axes", 1));
  FiniteDist prior = FiniteDist::from_json(cfg.at("prior"));
  int R = int_or(cfg, "R", 2);
  double eps = need_num(cfg, "eps");
  double delta = need_num(cfg, "delta");
  std::string method = cfg.value("method", "exact");
  size_t samples = size_t(num_or(cfg, "samples", 100000));
  ConvexSplitSpec spec = make_convex_split_spec(base, x_axes, prior, R);
  ConvexSplitReport rep = verify_convex_split(
      spec, eps, delta, method == "mc" ? VerifyMethod::MonteCarlo : VerifyMethod::Exact,
      samples, seed);
  Json out;
  out["schema"] = "oscl-convex-split/1";
  out["ds_eps"] = rep.ds_value;
  out["r_threshold"] = rep.r_threshold;
  out["log_slots"] = rep.log_slots;
  out["tv"] = rep.tv;
  out["std_error"] = rep.std_error;
  out["bound"] = rep.bound;
  out["pass"] = rep.pass;
  out["exact"] = rep.exact;
  out["n_samples"] = rep.n_samples;
  return out;
}

Json run_decode_bench(const Json& cfg, uint64_t seed, size_t trials, size_t workers) {
  std::string kind = cfg.value("kind", "unipartite");
  Json out;
  out["schema"] = "oscl-decode-bench/1";
  if (kind == "unipartite") {
    JointDist p_ym = dist_of(cfg, "p_ym");
    FiniteDist prior = FiniteDist::from_json(cfg.at("prior"));
    UniBenchReport rep = bench_unipartite(
        p_ym, size_t(int_or(cfg, "y_axes", 1)), prior, need_num(cfg, "eps"),
        need_num(cfg, "delta"), int_or(cfg, "R", 1), mode_of(cfg, DhMode::Exact), trials, seed,
        workers);
    out["kind"] = "unipartite";
    out["log_slots"] = rep.log_slots;
    out["dh_eps"] = rep.dh_value;
    out["error_rate"] = rep.error_rate;
    out["error_std_error"] = rep.error_std_error;
    out["bottom_rate"] = rep.bottom_rate;
    out["tv_plugin"] = rep.tv_plugin;
    out["bound_error"] = rep.bound_error;
    out["bound_tv"] = rep.bound_tv;
    out["trials"] = rep.trials;
  } else if (kind == "bipartite") {
    JointDist p_ymn = dist_of(cfg, "p_ymn");
    FiniteDist u = FiniteDist::from_json(cfg.at("prior_u"));
    FiniteDist v = FiniteDist::from_json(cfg.at("prior_v"));
    BiBenchReport rep = bench_bipartite(
        p_ymn, size_t(int_or(cfg, "y_axes", 1)), size_t(int_or(cfg, "m_axes", 1)), u, v,
        need_num(cfg, "eps"), need_num(cfg, "delta"), int_or(cfg, "R1", 1),
        int_or(cfg, "R2", 1), trials, seed, workers);
    out["kind"] = "bipartite";
    out["log_slots_m"] = rep.log_slots_m;
    out["log_slots_n"] = rep.log_slots_n;
    BipartiteThresholds th = BipartiteThresholds::from_rates(
        rep.log_slots_m, rep.log_slots_n, need_num(cfg, "delta"));
    out["thresholds"] = Json{{"t1", th.t1}, {"t2", th.t2}, {"t12", th.t12}};
    out["premise_mass"] = rep.premise_mass;
    out["premise_ok"] = rep.premise_ok;
    out["pair_error_rate"] = rep.pair_error_rate;
    out["pair_error_std_error"] = rep.pair_error_std_error;
    out["bottom_rate"] = rep.bottom_rate;
    out["bound_pair_error"] = rep.bound_pair_error;
    out["trials"] = rep.trials;
  } else {
    throw ConfigError("decode-bench: kind must be unipartite or bipartite");
  }
  return out;
}

std::optional<CondKernel> kernel_opt(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return CondKernel::from_json(cfg.at(key));
}

std::optional<FiniteDist> prior_opt(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return FiniteDist::from_json(cfg.at(key));
}

Json run_task1_cmd(const Json& cfg, uint64_t seed, size_t trials, size_t workers) {
  Task1Config c;
  c.p_xym = dist_of(cfg, "p_xym");
  c.ext_kernel = kernel_opt(cfg, "ext_kernel");
  c.prior_t = prior_opt(cfg, "prior_t");
  c.eps = need_num(cfg, "eps");
  c.delta = need_num(cfg, "delta");
  c.R = int_or(cfg, "R", -1);
  c.r = int_or(cfg, "r", -1);
  c.mode = mode_of(cfg, DhMode::Exact);
  c.fictitious = cfg.value("fictitious", false);
  c.trials = trials;
  c.seed = seed;
  c.workers = workers;
  if (cfg.contains("sweep_R")) {
    Json rows = Json::array();
    for (const auto& rv : cfg.at("sweep_R")) {
      Task1Config cc = c;
      cc.R = rv.get<int>();
      ProtocolReport rep = run_task1_convex_split(cc);
      rows.push_back(Json{{"R", cc.R},
                          {"r", rep.rates.at("r")},
                          {"empirical_error", rep.empirical_error},
                          {"std_error", rep.std_error},
                          {"theorem_bound", rep.theorem_bound}});
    }
    Json out;
    out["schema"] = "oscl-sweep/1";
    out["task"] = "task1";
    out["rows"] = rows;
    out["seed"] = seed;
    out["trials"] = trials;
    return out;
  }
  return task_report_json(run_task1_convex_split(c));
}

Json run_task8_cmd(const Json& cfg, uint64_t seed, size_t trials, size_t workers) {
  Task8Config c;
  if (cfg.contains("p_xy")) c.p_xy = dist_of(cfg, "p_xy");
  if (cfg.contains("dsbc"))
    c.dsbc = DsbcSource{cfg.at("dsbc").at("bits").get<int>(),
                        cfg.at("dsbc").at("flip").get<double>()};
  c.eps = need_num(cfg, "eps");
  c.delta = need_num(cfg, "delta");
  c.R_a = int_or(cfg, "R_a", -1);
  c.R_b = int_or(cfg, "R_b", -1);
  c.r_a = int_or(cfg, "r_a", -1);
  c.r_b = int_or(cfg, "r_b", -1);
  c.trials = trials;
  c.seed = seed;
  c.workers = workers;
  if (cfg.contains("sweep")) {
    std::vector<std::pair<int, int>> rates;
    for (const auto& rr : cfg.at("sweep"))
      rates.push_back({rr.at(0).get<int>(), rr.at(1).get<int>()});
    auto rows = run_task8_sweep(c, rates);
    Json jrows = Json::array();
    for (const auto& r : rows)
      jrows.push_back(Json{{"R_a", r.R_a},
                           {"R_b", r.R_b},
                           {"empirical_error", r.error},
                           {"std_error", r.std_error},
                           {"premise_mass", r.premise_mass},
                           {"bound_in_proof", r.bound_loose},
                           {"bound_statement", r.bound_tight}});
    Json out;
    out["schema"] = "oscl-sweep/1";
    out["task"] = "task8";
    out["rows"] = jrows;
    out["seed"] = seed;
    out["trials"] = trials;
    return out;
  }
  return task_report_json(run_task8(c));
}

// choice displays of the multi-terminal tasks, as numeric inequality rows
Json multi_bound_rows(int task, const Json& cfg) {
  Json rows = Json::array();
  auto ds_of = [](const JointDist& joint, const FiniteDist& prior, double eps) {
    // Ds^eps(p_{A,B} || p_A x prior) with A the leading axis
    size_t ac = joint.axis_size(0), bc = joint.axis_size(1);
    JointDist p_a = marginalize(joint, {joint.axes()[0].name});
    std::vector<double> q(joint.cells());
    for (size_t a = 0; a < ac; ++a)
      for (size_t b = 0; b < bc; ++b) q[a * bc + b] = p_a.at_flat(a) * prior.probs[b];
    return ds_eps(std::span<const double>(joint.table()), std::span<const double>(q), eps);
  };
  auto dh_of = [](const JointDist& p, const JointDist& q, double eps) {
    DhMode mode = p.cells() <= kDhExactLimit ? DhMode::Exact : DhMode::Greedy;
    return dh_eps(p, q, eps, mode).value;
  };
  auto row = [&](const std::string& label, double rhs, double ds_part, double dh_part) {
    rows.push_back(Json{{"label", label}, {"rhs", rhs}, {"ds_part", ds_part},
                        {"dh_part", dh_part}});
  };
  double delta = need_num(cfg, "delta");
  if (task == 2 || task == 3) {
    JointDist p = task == 2
                      ? marginalize(dist_of(cfg, "p_xymn"), {"X", "Y", "M", "N"})
                      : marginalize(dist_of(cfg, "p_xyzmn"), {"X", "Y", "Z", "M", "N"});
    FiniteDist s = cfg.contains("prior_s") ? FiniteDist::from_json(cfg.at("prior_s"))
                                           : marginalize(p, {"M"}).to_finite();
    FiniteDist t = cfg.contains("prior_t") ? FiniteDist::from_json(cfg.at("prior_t"))
                                           : marginalize(p, {"N"}).to_finite();
    double e1 = num_or(cfg, "eps1", 0.03), e2 = num_or(cfg, "eps2", 0.03),
           e3 = num_or(cfg, "eps3", 0.03);
    double eta1 = num_or(cfg, "eta1", delta), eta2 = num_or(cfg, "eta2", delta);
    double ds_a = ds_of(marginalize(p, {"X", "M"}), s, eta1);
    double ds_b = ds_of(marginalize(p, {"Y", "N"}), t, eta2);
    JointDist s_j = JointDist::from_finite(s, "M");
    JointDist t_j = JointDist::from_finite(t, "N");
    double slack = 4.0 * std::log2(3.0 / delta);
    if (task == 2) {
      JointDist p_mn = marginalize(p, {"M", "N"});
      double dh1 = dh_of(p_mn, product(s_j, marginalize(p, {"N"})), e1);
      double dh2 = dh_of(p_mn, product(marginalize(p, {"M"}), t_j), e2);
      double dh3 = dh_of(p_mn, product(s_j, t_j), e3);
      row("R_a", ds_a - dh1 + slack, ds_a, dh1);
      row("R_b", ds_b - dh2 + slack, ds_b, dh2);
      row("R_a+R_b", ds_a + ds_b - dh3 + 6.0 * std::log2(3.0 / delta), ds_a + ds_b, dh3);
    } else {
      JointDist p_mnz = marginalize(p, {"M", "N", "Z"});
      JointDist p_mzn = marginalize(p, {"M", "Z", "N"});
      double dh1 = dh_of(p_mnz, product(s_j, marginalize(p, {"N", "Z"})), e1);
      double dh2 = dh_of(p_mzn, product(marginalize(p, {"M", "Z"}), t_j), e2);
      double dh3 = dh_of(p_mnz, product(product(s_j, t_j), marginalize(p, {"Z"})), e3);
      row("R_a", ds_a - dh1 + slack, ds_a, dh1);
      row("R_b", ds_b - dh2 + slack, ds_b, dh2);
      row("R_a+R_b", ds_a + ds_b - dh3 + 6.0 * std::log2(3.0 / delta), ds_a + ds_b, dh3);
    }
  } else if (task == 4 || task == 5) {
    JointDist p = task == 4
                      ? marginalize(dist_of(cfg, "p_xmn"), {"X", "M", "N"})
                      : marginalize(dist_of(cfg, "p_xyzmn"), {"X", "Y", "Z", "M", "N"});
    FiniteDist s = cfg.contains("prior_s") ? FiniteDist::from_json(cfg.at("prior_s"))
                                           : marginalize(p, {"M"}).to_finite();
    FiniteDist t = cfg.contains("prior_t") ? FiniteDist::from_json(cfg.at("prior_t"))
                                           : marginalize(p, {"N"}).to_finite();
    double e1 = num_or(cfg, "eps1", 0.03), e2 = num_or(cfg, "eps2", 0.03),
           e3 = num_or(cfg, "eps3", 0.03);
    double d2 = task == 5 ? num_or(cfg, "delta2", delta) : delta;
    double slack = 2.0 * std::log2(5.0 / d2);
    double ds1 = ds_of(marginalize(p, {"X", "M"}), s, e1);
    double ds2 = ds_of(marginalize(p, {"X", "N"}), t, e2);
    double ds3;
    {
      JointDist p_xmn = marginalize(p, {"X", "M", "N"});
      JointDist p_x = marginalize(p, {"X"});
      size_t xc = p_x.cells(), mc = s.size(), nc = t.size();
      std::vector<double> q(p_xmn.cells());
      for (size_t x = 0; x < xc; ++x)
        for (size_t m = 0; m < mc; ++m)
          for (size_t n = 0; n < nc; ++n)
            q[(x * mc + m) * nc + n] = p_x.at_flat(x) * s.probs[m] * t.probs[n];
      ds3 = ds_eps(std::span<const double>(p_xmn.table()), std::span<const double>(q), e3);
    }
    if (task == 4) {
      row("R_b", ds1 + slack, ds1, 0.0);
      row("R_c", ds2 + slack, ds2, 0.0);
      row("R_b+R_c", ds3 + slack, ds3, 0.0);
    } else {
      double d1 = num_or(cfg, "delta1", delta);
      double dh_b = dh_of(marginalize(p, {"Y", "M"}),
                          product(marginalize(p, {"Y"}), JointDist::from_finite(s, "M")), d1);
      double dh_c = dh_of(marginalize(p, {"Z", "N"}),
                          product(marginalize(p, {"Z"}), JointDist::from_finite(t, "N")), d1);
      row("R_b", ds1 - dh_b + slack, ds1, dh_b);
      row("R_c", ds2 - dh_c + slack, ds2, dh_c);
      row("R_b+R_c", ds3 - dh_b - dh_c + slack, ds3, dh_b + dh_c);
    }
  } else {
    throw ConfigError("bounds: task must be one of 1..6");
  }
  return rows;
}

Json run_bounds(const Json& cfg) {
  int task = int_or(cfg, "task", 1);
  Json out;
  out["schema"] = "oscl-bounds/1";
  out["task"] = task;
  if (task == 1) {
    JointDist p = dist_of(cfg, "p_xym");
    auto kernel = kernel_opt(cfg, "n_given_y");
    double eps = need_num(cfg, "eps");
    double delta = need_num(cfg, "delta");
    out["br_bound"] = task1_br_bound(p, kernel, eps, delta);
    if (cfg.contains("iid_n"))
      out["br_bound_iid"] =
          task1_br_bound_iid(p, kernel, size_t(cfg.at("iid_n").get<int>()), eps, delta);
  } else if (task == 6) {
    JointDist p = dist_of(cfg, "p");
    auto rows = task6_bound_display(p, need_num(cfg, "eps"), need_num(cfg, "delta"));
    Json jrows = Json::array();
    for (const auto& r : rows)
      jrows.push_back(Json{{"label", r.label}, {"rhs", r.rhs}, {"ds_part", r.ds_part},
                           {"dh_part", r.dh_part}});
    out["rows"] = jrows;
  } else {
    out["rows"] = multi_bound_rows(task, cfg);
  }
  return out;
}

Json run_rates(const Json& cfg) {
  int task = int_or(cfg, "task", 8);
  std::map<std::string, double> region;
  if (task == 3)
    region = rate_region_task3(dist_of(cfg, "p"));
  else if (task == 5)
    region = rate_region_task5(dist_of(cfg, "p"));
  else if (task == 7)
    region = rate_region_task7(dist_of(cfg, "p_xy"), CondKernel::from_json(cfg.at("m_given_x")));
  else if (task == 8)
    region = rate_region_task8(dist_of(cfg, "p_xy"));
  else if (task == 9)
    region = rate_region_task9(dist_of(cfg, "p_xy"), CondKernel::from_json(cfg.at("n_given_y")));
  else
    throw ConfigError("rates: task must be one of 3,5,7,8,9");
  Json out;
  out["schema"] = "oscl-rates/1";
  out["task"] = task;
  out["region"] = region;
  Json rows = Json::array();
  for (const auto& [name, value] : region)
    rows.push_back(Json{{"rate", name}, {"bits_per_symbol", value}});
  out["rows"] = rows;
  return out;
}

Json run_thm13(const Json& cfg) {
  ExtensionInequalityReport rep = verify_extension_inequality(dist_of(cfg, "p_xym"), kernel_opt(cfg, "n_given_y"),
                                     need_num(cfg, "eps"),
                                     uint64_t(num_or(cfg, "k_cap", 64)));
  Json out;
  out["schema"] = "oscl-thm13/1";
  out["lhs"] = rep.lhs;
  out["d0"] = rep.d0;
  out["dh_greedy"] = rep.dh_greedy;
  out["dh_witness"] = rep.dh_witness;
  out["dh_lower"] = rep.dh_lower;
  out["margin"] = rep.margin;
  out["hypo1_lhs"] = rep.hypo1_lhs;
  out["hypo1_rhs"] = rep.hypo1_rhs;
  out["hypo1_exact"] = rep.hypo1_exact;
  out["hypo2_mass"] = rep.hypo2_mass;
  out["capped"] = rep.capped;
  out["K_ext"] = rep.K_ext;
  return out;
}

Json run_thm12(const Json& cfg) {
  RouteChainReport rep = check_route_chain(dist_of(cfg, "p_xym"), need_num(cfg, "eps"),
                                          uint64_t(num_or(cfg, "k_cap", 64)),
                                          int_or(cfg, "grid", 4));
  Json out;
  out["schema"] = "oscl-thm12/1";
  out["br"] = rep.br;
  out["br_at_canonical"] = rep.br_at_canonical;
  out["ext0"] = rep.ext0;
  out["ds_mid_ext"] = rep.ds_mid_ext;
  out["ds_plain"] = rep.ds_plain;
  out["item5_margin"] = rep.item5_margin;
  out["item6_mid_margin"] = rep.item6_mid_margin;
  out["item6_br_margin"] = rep.item6_br_margin;
  out["kernels_tried"] = rep.kernels_tried;
  return out;
}

Json golden_json(const std::string& dir) {
  GoldenResult g = golden_check(dir);
  Json out;
  out["schema"] = "oscl-golden/1";
  out["checked"] = g.checked;
  out["failures"] = g.failures;
  out["pass"] = g.pass;
  out["empty"] = g.empty;
  return out;
}

}  // namespace

Json strip_volatile(Json report) {
  if (report.is_object()) {
    report.erase("wall_ms");
    for (auto& [k, v] : report.items()) v = strip_volatile(v);
  } else if (report.is_array()) {
    for (auto& v : report) v = strip_volatile(v);
  }
  return report;
}

RunResult run_experiment(const std::string& subcommand, const Json& config,
                         std::optional<uint64_t> seed_in, std::optional<size_t> trials_in,
                         std::optional<size_t> workers_in, bool strict) {
  RunResult res;
  try {
    uint64_t seed = seed_in ? *seed_in : uint64_t(config.value("seed", 1));
    size_t trials = trials_in ? *trials_in : size_t(config.value("trials", 10000));
    size_t workers = workers_in ? *workers_in : size_t(config.value("workers", 1));
    if (trials < 1) throw ConfigError("trials must be >= 1");

    if (subcommand == "measure") {
      res.report = run_measure(config);
    } else if (subcommand == "convex-split") {
      res.report = run_convex_split(config, seed);
    } else if (subcommand == "decode-bench") {
      res.report = run_decode_bench(config, seed, trials, workers);
    } else if (subcommand == "task1") {
      res.report = run_task1_cmd(config, seed, trials, workers);
    } else if (subcommand == "task1-br") {
      BRConfig c;
      c.p_xym = dist_of(config, "p_xym");
      c.n_given_y = kernel_opt(config, "n_given_y");
      c.eps = need_num(config, "eps");
      c.delta = need_num(config, "delta");
      c.k_cap = uint64_t(num_or(config, "k_cap", double(uint64_t{1} << 16)));
      c.derandomize = config.value("derandomize", false);
      c.n_strings = size_t(num_or(config, "n_strings", 8));
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task1_br(c));
    } else if (subcommand == "task2") {
      Task2Config c;
      c.p_xymn = dist_of(config, "p_xymn");
      c.prior_s = prior_opt(config, "prior_s");
      c.prior_t = prior_opt(config, "prior_t");
      c.eps1 = num_or(config, "eps1", 0.03);
      c.eps2 = num_or(config, "eps2", 0.03);
      c.eps3 = num_or(config, "eps3", 0.03);
      c.eta1 = num_or(config, "eta1", 0.05);
      c.eta2 = num_or(config, "eta2", 0.05);
      c.delta = need_num(config, "delta");
      c.R_a = int_or(config, "R_a", -1);
      c.R_b = int_or(config, "R_b", -1);
      c.r_a = int_or(config, "r_a", -1);
      c.r_b = int_or(config, "r_b", -1);
      c.mode = mode_of(config, DhMode::Greedy);
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task2(c));
    } else if (subcommand == "task3") {
      Task3Config c;
      c.p_xyzmn = dist_of(config, "p_xyzmn");
      c.prior_s = prior_opt(config, "prior_s");
      c.prior_t = prior_opt(config, "prior_t");
      c.eps1 = num_or(config, "eps1", 0.03);
      c.eps2 = num_or(config, "eps2", 0.03);
      c.eps3 = num_or(config, "eps3", 0.03);
      c.delta = need_num(config, "delta");
      c.R_a = int_or(config, "R_a", -1);
      c.R_b = int_or(config, "R_b", -1);
      c.r_a = int_or(config, "r_a", -1);
      c.r_b = int_or(config, "r_b", -1);
      c.mode = mode_of(config, DhMode::Greedy);
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task3(c));
    } else if (subcommand == "task4") {
      Task4Config c;
      c.p_xmn = dist_of(config, "p_xmn");
      c.prior_s = prior_opt(config, "prior_s");
      c.prior_t = prior_opt(config, "prior_t");
      c.eps1 = num_or(config, "eps1", 0.03);
      c.eps2 = num_or(config, "eps2", 0.03);
      c.eps3 = num_or(config, "eps3", 0.03);
      c.delta = need_num(config, "delta");
      c.R_b = int_or(config, "R_b", -1);
      c.R_c = int_or(config, "R_c", -1);
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task4(c));
    } else if (subcommand == "task5") {
      Task5Config c;
      c.p_xyzmn = dist_of(config, "p_xyzmn");
      c.prior_s = prior_opt(config, "prior_s");
      c.prior_t = prior_opt(config, "prior_t");
      c.eps1 = num_or(config, "eps1", 0.03);
      c.eps2 = num_or(config, "eps2", 0.03);
      c.eps3 = num_or(config, "eps3", 0.03);
      c.delta1 = num_or(config, "delta1", 0.05);
      c.delta2 = num_or(config, "delta2", 0.1);
      c.R_b = int_or(config, "R_b", -1);
      c.R_c = int_or(config, "R_c", -1);
      c.r_b = int_or(config, "r_b", -1);
      c.r_c = int_or(config, "r_c", -1);
      c.mode = mode_of(config, DhMode::Greedy);
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task5(c));
    } else if (subcommand == "task7") {
      Task7Config c;
      c.p_xy = dist_of(config, "p_xy");
      c.m_given_x = CondKernel::from_json(config.at("m_given_x"));
      c.n_given_y = kernel_opt(config, "n_given_y");
      for (const auto& row : config.at("distortion"))
        c.distortion.push_back(row.get<std::vector<double>>());
      for (const auto& row : config.at("reproduction"))
        c.reproduction.push_back(row.get<std::vector<size_t>>());
      c.z_cells = size_t(num_or(config, "z_cells", 0));
      c.k = need_num(config, "k");
      c.eps = need_num(config, "eps");
      c.delta1 = num_or(config, "delta1", 0.05);
      c.delta2 = num_or(config, "delta2", 0.1);
      c.k_cap = uint64_t(num_or(config, "k_cap", double(uint64_t{1} << 16)));
      c.derandomize = config.value("derandomize", false);
      c.n_strings = size_t(num_or(config, "n_strings", 8));
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task7(c));
    } else if (subcommand == "task8") {
      res.report = run_task8_cmd(config, seed, trials, workers);
    } else if (subcommand == "task9") {
      Task9Config c;
      c.p_xy = dist_of(config, "p_xy");
      c.n_given_y = CondKernel::from_json(config.at("n_given_y"));
      c.prior_t = prior_opt(config, "prior_t");
      c.eps = need_num(config, "eps");
      c.eta = num_or(config, "eta", 0.05);
      c.delta = need_num(config, "delta");
      c.R_a = int_or(config, "R_a", -1);
      c.R_b = int_or(config, "R_b", -1);
      c.r_a = int_or(config, "r_a", -1);
      c.r_b = int_or(config, "r_b", -1);
      c.mode = mode_of(config, DhMode::Greedy);
      c.trials = trials;
      c.seed = seed;
      c.workers = workers;
      res.report = task_report_json(run_task9(c));
    } else if (subcommand == "bounds") {
      res.report = run_bounds(config);
    } else if (subcommand == "rates") {
      res.report = run_rates(config);
    } else if (subcommand == "thm13") {
      res.report = run_thm13(config);
    } else if (subcommand == "thm12") {
      res.report = run_thm12(config);
    } else if (subcommand == "golden-check") {
      res.report = golden_json(config.at("dir").get<std::string>());
      if (!res.report["pass"].get<bool>()) res.exit_code = 1;
      return res;
    } else {
      throw ConfigError("unknown subcommand '" + subcommand + "'");
    }

    if (strict && res.report.is_object() && res.report.value("premise_violated", false))
      res.exit_code = 2;
    return res;
  } catch (const Json::exception& e) {
    res.exit_code = 1;
    res.report = Json{{"error", std::string("config: ") + e.what()}};
    return res;
  } catch (const ConfigError& e) {
    res.exit_code = 1;
    res.report = Json{{"error", e.what()}};
    return res;
  } catch (const DomainError& e) {
    res.exit_code = 1;
    res.report = Json{{"error", e.what()}};
    return res;
  } catch (const NumericError& e) {
    res.exit_code = 1;
    res.report = Json{{"error", e.what()}};
    return res;
  }
}

std::string report_csv(const Json& report) {
  if (!report.is_object() || !report.contains("rows")) return {};
  const Json& rows = report.at("rows");
  if (!rows.is_array() || rows.empty()) return {};
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : rows.front().items()) {
    if (!first) out << ',';
    out << k;
    first = false;
    (void)v;
  }
  out << '\n';
  for (const auto& row : rows) {
    first = true;
    for (const auto& [k, v] : row.items()) {
      if (!first) out << ',';
      out << v.dump();
      first = false;
      (void)k;
    }
    out << '\n';
  }
  return out.str();
}

GoldenResult golden_check(const std::string& dir) {
  GoldenResult out;
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) {
    out.empty = true;
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    out.empty = true;
    return out;
  }
  for (const auto& f : files) {
    std::ifstream in(f);
    Json spec;
    try {
      spec = Json::parse(in);
    } catch (...) {
      out.failures.push_back(f.filename().string() + ": unparsable");
      continue;
    }
    ++out.checked;
    RunResult rr = run_experiment(spec.at("subcommand").get<std::string>(), spec.at("config"),
                                  uint64_t(spec.value("seed", 1)),
                                  size_t(spec.value("trials", 1000)),
                                  size_t(spec.value("workers", 1)), false);
    if (rr.exit_code != 0) {
      out.failures.push_back(f.filename().string() + ": run failed");
      continue;
    }
    if (strip_volatile(rr.report).dump() != strip_volatile(spec.at("report")).dump())
      out.failures.push_back(f.filename().string() + ": report drift");
  }
  out.pass = out.failures.empty();
  return out;
}

}  // namespace oscl
