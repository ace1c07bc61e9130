#include "oscl/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace oscl {

namespace {

void check_axis(const Axis& ax) {
  if (ax.name.empty()) throw ConfigError("axis name must be non-empty");
  if (ax.symbols.empty()) throw ConfigError("axis '" + ax.name + "' has an empty alphabet");
  std::set<std::string> seen;
  for (const auto& s : ax.symbols) {
    if (!seen.insert(s).second)
      throw ConfigError("axis '" + ax.name + "' has duplicate symbol '" + s + "'");
  }
}

std::vector<std::string> default_labels(size_t n, const std::string& prefix) {
  std::vector<std::string> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = prefix + std::to_string(i);
  return out;
}

}  // namespace

double kahan_sum(std::span<const double> xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// --- FiniteDist ---

FiniteDist::FiniteDist(std::vector<std::string> l, std::vector<double> p)
    : labels(std::move(l)), probs(std::move(p)) {
  if (labels.size() != probs.size())
    throw ConfigError("FiniteDist: labels and probs differ in length");
  Axis ax{"_", labels};
  check_axis(ax);
  double sum = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0)) throw ConfigError("FiniteDist: negative or NaN probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("FiniteDist: probabilities do not sum to 1");
  for (double& v : probs) v /= sum;
}

FiniteDist FiniteDist::uniform(size_t n, const std::string& prefix) {
  return FiniteDist(default_labels(n, prefix), std::vector<double>(n, 1.0 / double(n)));
}

FiniteDist FiniteDist::point_mass(size_t n, size_t at, const std::string& prefix) {
  std::vector<double> p(n, 0.0);
  p.at(at) = 1.0;
  return FiniteDist(default_labels(n, prefix), std::move(p));
}

Json FiniteDist::to_json(const std::string& axis_name) const {
  Json j;
  j["axes"] = Json::array({Json{{"name", axis_name}, {"symbols", labels}}});
  j["probs"] = probs;
  return j;
}

FiniteDist FiniteDist::from_json(const Json& j) {
  JointDist d = JointDist::from_json(j);
  if (d.rank() != 1) throw ConfigError("expected a single-axis distribution");
  return d.to_finite();
}

// --- JointDist ---

JointDist::JointDist(std::vector<Axis> axes, std::vector<double> table, bool subnormalized,
                     double input_tol, size_t cell_cap)
    : axes_(std::move(axes)), table_(std::move(table)), subnormalized_(subnormalized) {
  std::set<std::string> names;
  size_t cells = 1;
  for (const auto& ax : axes_) {
    check_axis(ax);
    if (!names.insert(ax.name).second) throw ConfigError("duplicate axis name '" + ax.name + "'");
    if (ax.size() == 0 || cells > cell_cap / ax.size())
      throw ConfigError("joint table exceeds the configured cell cap");
    cells *= ax.size();
  }
  if (table_.size() != cells) throw ConfigError("table size does not match the product alphabet");
  for (double v : table_)
    if (!(v >= 0.0)) throw ConfigError("negative or NaN probability in table");
  double sum = kahan_sum(table_);
  if (subnormalized_) {
    if (sum > 1.0 + input_tol) throw ConfigError("sub-normalized table has mass > 1");
  } else {
    if (std::abs(sum - 1.0) > input_tol)
      throw ConfigError("table mass " + std::to_string(sum) + " is not 1");
    if (sum != 1.0 && sum > 0.0)
      for (double& v : table_) v /= sum;
  }
  strides_.assign(axes_.size(), 1);
  for (size_t i = axes_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * axes_[i].size();
}

JointDist JointDist::from_finite(const FiniteDist& d, const std::string& axis_name) {
  return JointDist({Axis{axis_name, d.labels}}, d.probs);
}

JointDist JointDist::scalar(double mass) {
  JointDist j;
  j.table_ = {mass};
  j.subnormalized_ = true;
  return j;
}

double JointDist::total_mass() const { return kahan_sum(table_); }

size_t JointDist::axis_index(const std::string& name) const {
  auto i = find_axis(name);
  if (!i) throw ConfigError("unknown axis '" + name + "'");
  return *i;
}

std::optional<size_t> JointDist::find_axis(const std::string& name) const {
  for (size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].name == name) return i;
  return std::nullopt;
}

size_t JointDist::flat_index(std::span<const size_t> coords) const {
  if (coords.size() != axes_.size()) throw ConfigError("coordinate rank mismatch");
  size_t f = 0;
  for (size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= axes_[i].size()) throw ConfigError("coordinate out of range");
    f += coords[i] * strides_[i];
  }
  return f;
}

void JointDist::unflatten(size_t flat, std::span<size_t> coords_out) const {
  for (size_t i = 0; i < axes_.size(); ++i) {
    coords_out[i] = flat / strides_[i];
    flat %= strides_[i];
  }
}

FiniteDist JointDist::to_finite() const {
  if (rank() != 1) throw ConfigError("to_finite requires a single-axis distribution");
  return FiniteDist(axes_[0].symbols, table_);
}

FiniteDist JointDist::to_finite_flat() const {
  if (rank() == 1) return to_finite();
  std::vector<std::string> labels(cells());
  std::vector<size_t> coords(rank());
  for (size_t f = 0; f < cells(); ++f) {
    unflatten(f, coords);
    std::string l;
    for (size_t i = 0; i < rank(); ++i) {
      if (i) l += '|';
      l += axes_[i].symbols[coords[i]];
    }
    labels[f] = std::move(l);
  }
  return FiniteDist(std::move(labels), table_);
}

Json JointDist::to_json() const {
  Json j;
  j["axes"] = Json::array();
  for (const auto& ax : axes_) j["axes"].push_back(Json{{"name", ax.name}, {"symbols", ax.symbols}});
  j["probs"] = table_;
  if (subnormalized_) j["subnormalized"] = true;
  return j;
}

JointDist JointDist::from_json(const Json& j, size_t cell_cap) {
  if (!j.is_object() || !j.contains("axes") || !j.contains("probs"))
    throw ConfigError("distribution JSON must contain 'axes' and 'probs'");
  std::vector<Axis> axes;
  for (const auto& aj : j.at("axes")) {
    Axis ax;
    ax.name = aj.at("name").get<std::string>();
    for (const auto& s : aj.at("symbols")) {
      if (s.is_string())
        ax.symbols.push_back(s.get<std::string>());
      else
        ax.symbols.push_back(s.dump());
    }
    axes.push_back(std::move(ax));
  }
  std::vector<double> table;
  for (const auto& v : j.at("probs")) table.push_back(v.get<double>());
  bool sub = j.value("subnormalized", false);
  return JointDist(std::move(axes), std::move(table), sub, 1e-9, cell_cap);
}

// --- CondKernel ---

CondKernel::CondKernel(Axis in, Axis out, std::vector<std::vector<double>> r)
    : input(std::move(in)), output(std::move(out)), rows(std::move(r)) {
  check_axis(input);
  check_axis(output);
  if (rows.size() != input.size()) throw ConfigError("kernel row count != input alphabet");
  for (auto& row : rows) {
    if (row.size() != output.size()) throw ConfigError("kernel row width != output alphabet");
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw ConfigError("kernel has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("kernel row does not sum to 1");
    for (double& v : row) v /= sum;
  }
}

CondKernel CondKernel::trivial(const Axis& in, const std::string& out_name) {
  Axis out{out_name, {"0"}};
  return CondKernel(in, out, std::vector<std::vector<double>>(in.size(), {1.0}));
}

Json CondKernel::to_json() const {
  Json j;
  j["input"] = Json{{"name", input.name}, {"symbols", input.symbols}};
  j["output"] = Json{{"name", output.name}, {"symbols", output.symbols}};
  j["rows"] = rows;
  return j;
}

CondKernel CondKernel::from_json(const Json& j) {
  auto parse_axis = [](const Json& aj) {
    Axis ax;
    ax.name = aj.at("name").get<std::string>();
    for (const auto& s : aj.at("symbols"))
      ax.symbols.push_back(s.is_string() ? s.get<std::string>() : s.dump());
    return ax;
  };
  std::vector<std::vector<double>> rows;
  for (const auto& r : j.at("rows")) rows.push_back(r.get<std::vector<double>>());
  return CondKernel(parse_axis(j.at("input")), parse_axis(j.at("output")), std::move(rows));
}

// --- operations ---

JointDist marginalize(const JointDist& j, const std::vector<std::string>& keep) {
  std::vector<size_t> keep_idx;
  keep_idx.reserve(keep.size());
  std::set<size_t> seen;
  for (const auto& name : keep) {
    size_t i = j.axis_index(name);
    if (!seen.insert(i).second) throw ConfigError("axis '" + name + "' repeated in keep set");
    keep_idx.push_back(i);
  }
  if (keep_idx.empty()) return JointDist::scalar(j.total_mass());

  std::vector<Axis> out_axes;
  for (size_t i : keep_idx) out_axes.push_back(j.axes()[i]);
  size_t out_cells = 1;
  for (const auto& ax : out_axes) out_cells *= ax.size();

  std::vector<size_t> out_strides(keep_idx.size(), 1);
  for (size_t i = keep_idx.size(); i-- > 1;) out_strides[i - 1] = out_strides[i] * out_axes[i].size();

  // per-source-axis contribution to the output flat index
  std::vector<size_t> contrib(j.rank(), 0);
  std::vector<bool> kept(j.rank(), false);
  for (size_t k = 0; k < keep_idx.size(); ++k) {
    kept[keep_idx[k]] = true;
    contrib[keep_idx[k]] = out_strides[k];
  }

  std::vector<double> out(out_cells, 0.0);
  std::vector<size_t> coords(j.rank(), 0);
  const auto& table = j.table();
  size_t out_f = 0;
  for (size_t f = 0; f < table.size(); ++f) {
    out[out_f] += table[f];
    // odometer increment
    for (size_t i = j.rank(); i-- > 0;) {
      coords[i]++;
      out_f += contrib[i];
      if (coords[i] < j.axis_size(i)) break;
      out_f -= contrib[i] * j.axis_size(i);
      coords[i] = 0;
    }
  }
  return JointDist(std::move(out_axes), std::move(out), j.subnormalized());
}

JointDist condition_at(const JointDist& j, size_t ai, size_t v) {
  if (ai >= j.rank()) throw ConfigError("condition: axis index out of range");
  if (v >= j.axis_size(ai)) throw ConfigError("condition: symbol index out of range");
  std::vector<Axis> out_axes;
  for (size_t i = 0; i < j.rank(); ++i)
    if (i != ai) out_axes.push_back(j.axes()[i]);
  size_t out_cells = j.cells() / j.axis_size(ai);
  std::vector<double> out;
  out.reserve(out_cells);
  const size_t stride = j.stride(ai);
  const size_t block = stride * j.axis_size(ai);
  const auto& t = j.table();
  for (size_t base = 0; base < t.size(); base += block)
    for (size_t off = 0; off < stride; ++off) out.push_back(t[base + v * stride + off]);
  double mass = kahan_sum(out);
  if (mass <= 0.0)
    throw DomainError("conditioning on a zero-probability value of axis '" + j.axes()[ai].name +
                      "'");
  for (double& x : out) x /= mass;
  if (out_axes.empty()) return JointDist::scalar(1.0);
  return JointDist(std::move(out_axes), std::move(out));
}

JointDist condition(const JointDist& j, const std::string& axis, const std::string& value) {
  size_t ai = j.axis_index(axis);
  const auto& syms = j.axes()[ai].symbols;
  auto it = std::find(syms.begin(), syms.end(), value);
  if (it == syms.end())
    throw ConfigError("axis '" + axis + "' has no symbol '" + value + "'");
  return condition_at(j, ai, static_cast<size_t>(it - syms.begin()));
}

JointDist product(const JointDist& a, const JointDist& b) {
  for (const auto& ax : b.axes())
    if (a.find_axis(ax.name)) throw ConfigError("product: axis '" + ax.name + "' on both sides");
  std::vector<Axis> axes = a.axes();
  axes.insert(axes.end(), b.axes().begin(), b.axes().end());
  std::vector<double> out;
  out.reserve(a.cells() * b.cells());
  for (double va : a.table())
    for (double vb : b.table()) out.push_back(va * vb);
  return JointDist(std::move(axes), std::move(out), a.subnormalized() || b.subnormalized());
}

JointDist chain(const JointDist& j, const std::string& input_axis, const CondKernel& k) {
  return chain_multi(j, {input_axis}, k);
}

JointDist chain_multi(const JointDist& j, const std::vector<std::string>& input_axes,
                      const CondKernel& k) {
  std::vector<size_t> in_idx;
  size_t in_cells = 1;
  for (const auto& name : input_axes) {
    size_t i = j.axis_index(name);
    in_idx.push_back(i);
    in_cells *= j.axis_size(i);
  }
  if (k.in_size() != in_cells)
    throw ConfigError("kernel input alphabet does not match the product of the named axes");
  if (j.find_axis(k.output.name)) throw ConfigError("kernel output axis already present");

  std::vector<Axis> axes = j.axes();
  axes.push_back(k.output);
  std::vector<double> out;
  out.reserve(j.cells() * k.out_size());
  std::vector<size_t> coords(j.rank(), 0);
  for (size_t f = 0; f < j.cells(); ++f) {
    j.unflatten(f, coords);
    size_t row = 0;
    for (size_t i : in_idx) row = row * j.axis_size(i) + coords[i];
    for (size_t e = 0; e < k.out_size(); ++e) out.push_back(j.at_flat(f) * k.at(row, e));
  }
  return JointDist(std::move(axes), std::move(out), j.subnormalized());
}

bool is_markov(const JointDist& j, const std::vector<std::string>& left,
               const std::vector<std::string>& mid, const std::vector<std::string>& right,
               double tol) {
  std::set<std::string> all;
  for (const auto& g : {left, mid, right})
    for (const auto& n : g)
      if (!all.insert(n).second) throw ConfigError("is_markov: axis '" + n + "' repeated");
  if (all.size() != j.rank())
    throw ConfigError("is_markov: the three sets must partition the axes");
  for (const auto& n : all) j.axis_index(n);

  JointDist mid_marg = marginalize(j, mid);
  std::vector<std::string> lm = left;
  lm.insert(lm.end(), mid.begin(), mid.end());
  std::vector<std::string> rm = right;
  rm.insert(rm.end(), mid.begin(), mid.end());
  std::vector<std::string> lrm = left;
  lrm.insert(lrm.end(), right.begin(), right.end());
  lrm.insert(lrm.end(), mid.begin(), mid.end());
  JointDist p_lm = marginalize(j, lm);
  JointDist p_rm = marginalize(j, rm);
  JointDist p_lrm = marginalize(j, lrm);

  // iterate mid cells (the last axes of each reordered marginal)
  size_t mid_cells = mid_marg.cells();
  size_t l_cells = p_lrm.cells() / mid_cells / (p_rm.cells() / mid_cells);
  size_t r_cells = p_rm.cells() / mid_cells;
  for (size_t mc = 0; mc < mid_cells; ++mc) {
    double pm = mid_marg.at_flat(mc);
    if (pm <= 0.0) continue;
    for (size_t lc = 0; lc < l_cells; ++lc) {
      double pl = p_lm.at_flat(lc * mid_cells + mc) / pm;
      for (size_t rc = 0; rc < r_cells; ++rc) {
        double pr = p_rm.at_flat(rc * mid_cells + mc) / pm;
        double plr = p_lrm.at_flat((lc * r_cells + rc) * mid_cells + mc) / pm;
        if (std::abs(plr - pl * pr) > tol) return false;
      }
    }
  }
  return true;
}

double tv_exact(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("tv_exact: shape mismatch");
  double sum = 0.0, c = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double x = std::abs(a[i] - b[i]) - c;
    double t = sum + x;
    c = (t - sum) - x;
    sum = t;
  }
  return 0.5 * sum;
}

double tv_exact(const JointDist& a, const JointDist& b) {
  if (a.rank() != b.rank()) throw ConfigError("tv_exact: rank mismatch");
  for (size_t i = 0; i < a.rank(); ++i) {
    if (a.axes()[i].name != b.axes()[i].name || a.axes()[i].symbols != b.axes()[i].symbols)
      throw ConfigError("tv_exact: axis mismatch at position " + std::to_string(i));
  }
  return tv_exact(std::span<const double>(a.table()), std::span<const double>(b.table()));
}

MonteCarloTv tv_monte_carlo(const std::function<double(uint64_t)>& density_a,
                            const std::function<double(uint64_t)>& density_b,
                            const std::function<uint64_t(Xoshiro256ss&)>& sampler_b,
                            size_t n_samples, uint64_t seed) {
  if (n_samples == 0) throw ConfigError("tv_monte_carlo: n_samples must be positive");
  Xoshiro256ss rng(mix64(seed));
  double sum = 0.0, sum_sq = 0.0;
  for (size_t i = 0; i < n_samples; ++i) {
    uint64_t x = sampler_b(rng);
    double b = density_b(x);
    if (!(b > 0.0)) throw NumericError("tv_monte_carlo: zero reference density at a sample");
    double v = 0.5 * std::abs(density_a(x) / b - 1.0);
    sum += v;
    sum_sq += v * v;
  }
  MonteCarloTv out;
  out.n_samples = n_samples;
  out.estimate = sum / double(n_samples);
  double var = std::max(0.0, sum_sq / double(n_samples) - out.estimate * out.estimate);
  out.std_error = std::sqrt(var / double(n_samples));
  return out;
}

DistSampler::DistSampler(const JointDist& j) : DistSampler(std::span<const double>(j.table())) {}

DistSampler::DistSampler(std::span<const double> probs) {
  cdf_.reserve(probs.size());
  double acc = 0.0;
  for (double p : probs) {
    acc += p;
    cdf_.push_back(acc);
  }
  if (!cdf_.empty()) cdf_.back() = std::max(cdf_.back(), 1.0);
}

size_t DistSampler::operator()(Xoshiro256ss& rng) const {
  double u = rng.next_double();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<size_t>(it - cdf_.begin());
}

std::vector<size_t> sample(const JointDist& j, const DistSampler& sampler, Xoshiro256ss& rng) {
  std::vector<size_t> coords(j.rank());
  j.unflatten(sampler(rng), coords);
  return coords;
}

std::vector<uint64_t> snap_to_grid(std::span<const double> probs, uint64_t denom) {
  std::vector<uint64_t> out(probs.size());
  std::vector<std::pair<double, size_t>> rema(probs.size());
  uint64_t assigned = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    double scaled = probs[i] * double(denom);
    out[i] = static_cast<uint64_t>(std::floor(scaled + 1e-12));
    rema[i] = {scaled - double(out[i]), i};
    assigned += out[i];
  }
  if (assigned > denom) throw NumericError("snap_to_grid: rounding overflow");
  uint64_t left = denom - assigned;
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (uint64_t i = 0; i < left; ++i) out[rema[i % rema.size()].second] += 1;
  return out;
}

}  // namespace oscl
