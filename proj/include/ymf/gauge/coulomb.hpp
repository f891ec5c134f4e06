#pragma once

// Coulomb gauge fixing d^* a = 0 by the fixed-point iteration
//
//   -d^* d u^k = d^*[ (e^{u})^{-1} d e^{u} - du ]
//              + ( d^*[ e^{-u} (A + lambda) e^{u} ]  -  e^{-u} d^*(A + lambda) e^{u} )
//              + e^{-u} d^*(A + lambda) e^{u},          u = u^{k-1},
//
// whose three terms are the series remainder, the product-rule correction
// and the conjugated divergence. Their sum is d^*(a^{k-1} - du^{k-1}) with
// a^{k-1} = apply_gauge(e^{u^{k-1}}, A), so a fixed point has d^* a = 0.

#include <cstddef>
#include <optional>
#include <vector>

#include "ymf/errors.hpp"
#include "ymf/field/form.hpp"
#include "ymf/gauge/poisson.hpp"

namespace ymf::gauge {

using field::Connection;
using field::GaugeTransform;

struct GaugeFixConfig
{
  Domain domain = Domain::torus();
  std::size_t max_iters = 200;
  double tol = 1e-10;
  double damping = 1.0;
  /// epsilon_1: refuse when lp(A, n) on the domain exceeds this.
  double small_field_guard = 0.1;
  /// epsilon_2: largest admissible w12 drift between consecutive samples.
  double drift_guard = 0.05;
  double solver_tol = 1e-13;
};

/// Throws ContractError when the configuration is inconsistent.
void validate(const GaugeFixConfig &config);

struct GaugeFixReport
{
  std::size_t iterations = 0;
  double initial_residual = 0.0;
  std::vector<double> residual_history;   ///< ||d^* a^k||_{l2} on the domain
  std::vector<double> u_norm_history;     ///< w12(u^k)
  std::vector<double> contraction_ratios; ///< w12(u^k - u^{k-1}) / w12(u^{k-1} - u^{k-2})
  double uhlenbeck_ratio = 0.0;           ///< w12(a) / l2(F_a) on the domain
  bool uhlenbeck_degenerate = false;      ///< 0/0 reported as 0
  bool converged = false;
  double final_residual() const { return residual_history.empty() ? initial_residual : residual_history.back(); }
};

struct GaugeFixResult
{
  Section u;
  GaugeTransform s;
  Connection a;
  GaugeFixReport report;
};

/// Raised when the iteration does not reach `tol` within `max_iters`.
class GaugeFixFailure : public ContractError
{
public:
  GaugeFixFailure(const std::string &what, GaugeFixReport report)
    : ContractError("gauge", "coulomb_fix", what), report_(std::move(report))
  {}
  const GaugeFixReport &report() const noexcept { return report_; }

private:
  GaugeFixReport report_;
};

/// lp(A, n) over the torus or over the patch interior.
double small_field_norm(const Connection &a, const Domain &domain);

/// ||d^* a||_{l2} over the torus or the patch interior.
double coulomb_residual(const Connection &a, const Domain &domain);

/// a = apply_gauge(exp(u), A) on the domain. For the Neumann patch variant
/// the edges crossing boundary faces carry the ghost-gauge value 0.
Connection gauge_on_domain(const Section &u, const Connection &a, const Domain &domain);

GaugeFixResult coulomb_fix(const Connection &a, const GaugeFixConfig &config);

/// Warm-started variant: the iteration starts from `u0`.
GaugeFixResult coulomb_fix(const Connection &a, const GaugeFixConfig &config, const Section &u0);

struct TimeFamilyResult
{
  std::vector<GaugeFixResult> samples;
  /// s_j = log(S_j^{-1} S_{j+1}) / dt_j, one per interval.
  std::vector<Section> velocities;
  double velocity_sum = 0.0;  ///< sum_j dt_j (||s_j||^2 + ||D_a s_j||^2)
  double curvature_sum = 0.0; ///< sum_j dt_j ||nabla_a F_a||^2
  double ratio = 0.0;         ///< velocity_sum / curvature_sum, 0/0 -> 0
  double max_residual = 0.0;
};

/// Gauge fixes the family A(t_j). The first sample is fixed directly; every
/// later one is written as A~ = a(t_0) + lambda with A~ = apply_gauge(S_0, A(t_j))
/// and fixed warm-started from the previous sample, so S_j = S_0 exp(u_j).
/// Throws when consecutive samples drift by more than drift_guard in w12.
TimeFamilyResult coulomb_fix_time_family(const std::vector<Connection> &samples,
                                         const std::vector<double> &times,
                                         const GaugeFixConfig &config);

} // namespace ymf::gauge
