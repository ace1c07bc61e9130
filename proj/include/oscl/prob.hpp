#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscl/errors.hpp"
#include "oscl/rng.hpp"

#include <json.hpp>

namespace oscl {

using Json = nlohmann::ordered_json;

inline constexpr double kNormTol = 1e-12;
inline constexpr size_t kDefaultTableCellCap = size_t{1} << 22;

struct Axis {
  std::string name;
  std::vector<std::string> symbols;

  size_t size() const { return symbols.size(); }
};

// Probability vector over one labeled finite alphabet.
struct FiniteDist {
  std::vector<std::string> labels;
  std::vector<double> probs;

  FiniteDist() = default;
  FiniteDist(std::vector<std::string> l, std::vector<double> p);

  static FiniteDist uniform(size_t n, const std::string& prefix = "");
  static FiniteDist point_mass(size_t n, size_t at, const std::string& prefix = "");

  size_t size() const { return probs.size(); }
  double operator[](size_t i) const { return probs[i]; }

  Json to_json(const std::string& axis_name = "X") const;
  static FiniteDist from_json(const Json& j);
};

// Dense multi-axis distribution. Immutable after construction; tables are
// row-major with the last axis fastest. Sum is renormalized to exactly 1
// at construction when it lands within `input_tol` of 1 (fp drift from
// upstream arithmetic), rejected otherwise. Sub-normalized tables keep
// their raw mass.
class JointDist {
 public:
  JointDist() = default;
  JointDist(std::vector<Axis> axes, std::vector<double> table, bool subnormalized = false,
            double input_tol = 1e-9, size_t cell_cap = kDefaultTableCellCap);

  static JointDist from_finite(const FiniteDist& d, const std::string& axis_name);
  static JointDist scalar(double mass);

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& table() const { return table_; }
  size_t rank() const { return axes_.size(); }
  size_t cells() const { return table_.size(); }
  bool subnormalized() const { return subnormalized_; }
  double total_mass() const;

  size_t axis_index(const std::string& name) const;
  std::optional<size_t> find_axis(const std::string& name) const;
  size_t axis_size(size_t ai) const { return axes_[ai].size(); }
  size_t stride(size_t ai) const { return strides_[ai]; }

  size_t flat_index(std::span<const size_t> coords) const;
  void unflatten(size_t flat, std::span<size_t> coords_out) const;
  double at(std::span<const size_t> coords) const { return table_[flat_index(coords)]; }
  double at_flat(size_t flat) const { return table_[flat]; }

  FiniteDist to_finite() const;  // rank-1 only
  // Flatten any rank to a single composite alphabet (labels joined by '|').
  FiniteDist to_finite_flat() const;

  Json to_json() const;
  static JointDist from_json(const Json& j, size_t cell_cap = kDefaultTableCellCap);

 private:
  std::vector<Axis> axes_;
  std::vector<size_t> strides_;
  std::vector<double> table_;
  bool subnormalized_ = false;
};

// Conditional kernel: one output row per input symbol, each row a
// distribution over the output alphabet.
struct CondKernel {
  Axis input;
  Axis output;
  std::vector<std::vector<double>> rows;  // rows[input][output]

  CondKernel() = default;
  CondKernel(Axis in, Axis out, std::vector<std::vector<double>> r);

  static CondKernel trivial(const Axis& in, const std::string& out_name = "E");

  size_t in_size() const { return input.size(); }
  size_t out_size() const { return output.size(); }
  double at(size_t in, size_t out) const { return rows[in][out]; }

  Json to_json() const;
  static CondKernel from_json(const Json& j);
};

// --- operations ---

// Sum out all axes not named in `keep`, preserving the order of `keep`.
// keep may be empty: the result is the 0-axis scalar total.
JointDist marginalize(const JointDist& j, const std::vector<std::string>& keep);

// Renormalized slice at axis=value; the axis is removed from the result.
JointDist condition(const JointDist& j, const std::string& axis, const std::string& value);
JointDist condition_at(const JointDist& j, size_t axis_idx, size_t value_idx);

// Outer product; axis names must be disjoint.
JointDist product(const JointDist& a, const JointDist& b);

// Append an axis distributed by `k` applied to existing axis `input_axis`.
JointDist chain(const JointDist& j, const std::string& input_axis, const CondKernel& k);
// Append an axis drawn by kernel indexed by the product of several axes
// (row index = flat index over those axes in the given order).
JointDist chain_multi(const JointDist& j, const std::vector<std::string>& input_axes,
                      const CondKernel& k);

// Markov test: given every positive-probability value of `mid`, the joint
// over (left, right) factorizes within `tol` (max-abs deviation).
bool is_markov(const JointDist& j, const std::vector<std::string>& left,
               const std::vector<std::string>& mid, const std::vector<std::string>& right,
               double tol);

// Total variation (1/2 l1). Shapes must match.
double tv_exact(const JointDist& a, const JointDist& b);
double tv_exact(std::span<const double> a, std::span<const double> b);

struct MonteCarloTv {
  double estimate = 0.0;
  double std_error = 0.0;
  size_t n_samples = 0;
};

// TV(a,b) = (1/2) E_{x~b} |a(x)/b(x) - 1| from pointwise density callbacks.
// `density_*` return plain (not log) densities; `sampler_b` draws a point
// identifier consumed by the callbacks.
MonteCarloTv tv_monte_carlo(const std::function<double(uint64_t)>& density_a,
                            const std::function<double(uint64_t)>& density_b,
                            const std::function<uint64_t(Xoshiro256ss&)>& sampler_b,
                            size_t n_samples, uint64_t seed);

// Exact inverse-CDF sampler over the cells of a joint. Immutable; safe to
// share across workers, each with its own RNG stream.
class DistSampler {
 public:
  DistSampler() = default;
  explicit DistSampler(const JointDist& j);
  explicit DistSampler(std::span<const double> probs);
  size_t operator()(Xoshiro256ss& rng) const;

 private:
  std::vector<double> cdf_;
};

std::vector<size_t> sample(const JointDist& j, const DistSampler& sampler, Xoshiro256ss& rng);

// Deterministic largest-remainder rounding of `probs` to integers summing
// to `denom`. Used to snap kernels to rational grids.
std::vector<uint64_t> snap_to_grid(std::span<const double> probs, uint64_t denom);

double kahan_sum(std::span<const double> xs);

}  // namespace oscl
