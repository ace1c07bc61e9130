#pragma once

#include <map>
#include <optional>
#include <string>

#include "oscl/divergence.hpp"
#include "oscl/prob.hpp"

namespace oscl {

// Communication bound of the rejection-sampling route:
// Ds^eps(p_XMY || p_Y (p_{X|Y} x p_{N|Y})) + 2 log2(1/delta).
// The default helper kernel is the M|Y marginal; support violations yield
// +inf.
double task1_br_bound(const JointDist& p_xym, const std::optional<CondKernel>& n_given_y,
                      double eps, double delta);

// Same bound for the n-fold i.i.d. product, via spectrum convolution.
double task1_br_bound_iid(const JointDist& p_xym_base,
                          const std::optional<CondKernel>& n_given_y, size_t n, double eps,
                          double delta);

// Uniform-granularity message extension: E over {1..K} flattening each
// conditional row into equal-mass cells.
struct ExtensionBuild {
  uint64_t K = 0;
  JointDist p_xme;       // axes X, M, E
  double snap_tv = 0.0;  // tv between the snapped and input X,M joints
  double d0_value = 0.0;  // Ds^0(p_XME || p_X x U); equals log2|M|
};

ExtensionBuild build_extension(const JointDist& p_xm, uint64_t k_cap);

struct ExtensionInequalityReport {
  double lhs = 0.0;        // Ds^eps(p_XMY || p_Y(p_{X|Y} x p_{N|Y})), snapped instance
  double d0 = 0.0;          // Ds^0(p_XME || p_X x U) = log2|M|
  double dh_greedy = 0.0;   // greedy lower bound on Dh^eps(p_YME || p_Y x U)
  double dh_witness = 0.0;  // -log2 Pr_{p_Y x U}(A) of the constructed set
  double dh_lower = 0.0;    // max of the two
  double margin = 0.0;      // lhs - (d0 - dh_lower)
  double hypo1_lhs = 0.0;   // exact Pr_{p_Y x U}(A)
  double hypo1_rhs = 0.0;   // 2^{-(log2|M| - lhs)}
  double hypo2_mass = 0.0;  // Pr_{p_YME}(A)
  bool hypo1_exact = false;  // no cap or floor disturbed the identity
  bool capped = false;       // some acceptance count hit the E range
  uint64_t K_ext = 0;
  double eps = 0.0;
};

// Builds the extension at granularity K_ext = K * denom(2^l) so every
// acceptance count is an exact integer, then verifies the extension
// inequality and the two set identities.
ExtensionInequalityReport verify_extension_inequality(const JointDist& p_xym,
                             const std::optional<CondKernel>& n_given_y, double eps,
                             uint64_t k_cap);

struct RouteChainReport {
  double br = 0.0;           // grid minimum over helper kernels
  double br_at_canonical = 0.0;  // value at the M|Y kernel
  double ext0 = 0.0;         // log2|M| - Dh lower bound (canonical extension)
  double ds_mid_ext = 0.0;   // Ds^eps(p_XMEY || p_Y(p_{X|Y} x p_{ME|Y}))
  double ds_plain = 0.0;     // Ds^eps(p_XMY || p_Y(p_{X|Y} x p_{M|Y}))
  double item5_margin = 0.0;  // br - ext0
  double item6_mid_margin = 0.0;  // ds_mid_ext - ds_plain
  double item6_br_margin = 0.0;   // ds_plain - br
  size_t kernels_tried = 0;
};

RouteChainReport check_route_chain(const JointDist& p_xym, double eps, uint64_t k_cap,
                                  int grid_points);

// Closed-form asymptotic rate regions, in bits per symbol.
std::map<std::string, double> rate_region_task3(const JointDist& p_xyzmn);
std::map<std::string, double> rate_region_task5(const JointDist& p_xyzmn);
std::map<std::string, double> rate_region_task7(const JointDist& p_xy,
                                                const CondKernel& m_given_x);
std::map<std::string, double> rate_region_task8(const JointDist& p_xy);
std::map<std::string, double> rate_region_task9(const JointDist& p_xy,
                                                const CondKernel& n_given_y);

struct BoundRow {
  std::string label;      // e.g. "R[1][1]" or "R[1][1]+R[2][2]"
  double rhs = 0.0;       // numeric right-hand side in bits
  double ds_part = 0.0;   // sum of spectrum terms
  double dh_part = 0.0;   // sum of subtracted test terms
};

// Numeric display of the four-party rate constraints; no simulation.
// Axes: X1, X2, M11, M12, M21, M22, Y1, Y2.
std::vector<BoundRow> task6_bound_display(const JointDist& p, double eps, double delta);

}  // namespace oscl
