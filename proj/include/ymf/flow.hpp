#pragma once

// Explicit time integration of the Yang-Mills gradient flow
//     dA/dt = -D_A^* F_A
// and of the gauge-equivalent strictly parabolic flow
//     da/dt = -D_a^* F_a - D_a (D_a^* a),   dS/dt = -S (D_a^* a),  S(0) = I,
// from which the raw solution is recovered as A = apply_gauge(S^{-1}, a).

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ymf/errors.hpp"
#include "ymf/field/form.hpp"

namespace ymf::flow {

using field::Connection;
using field::GaugeTransform;
using field::Lattice;
using field::OneForm;
using field::Section;
using field::TwoForm;

/// Threshold on max |F| above which a step is treated as a singular stop.
inline constexpr double blowup_guard = 1e12;

/// a_mu(x) = log(S(x)^{-1} S(x+e_mu))/h + adjoint(Smid, A_mu(x)), where Smid is
/// the geodesic midpoint of the edge. Site-constant S gives adjoint(S, A)
/// exactly; in the abelian case a = A + du exactly.
Connection apply_gauge(const GaugeTransform &s, const Connection &a);

/// 1/2 ||F_A||^2.
double energy(const Connection &a);

OneForm rhs_raw(const Connection &a);
OneForm rhs_deturck(const Connection &a);

/// -S(x) (D_a^* a)(x) per site.
std::vector<lie::Matrix> rhs_gauge_ode(const GaugeTransform &s, const Connection &a);

enum class Variant { raw, deturck };
enum class Scheme { euler, rk4 };

struct FlowConfig
{
  Variant variant = Variant::raw;
  Scheme scheme = Scheme::euler;
  std::optional<double> dt; ///< empty means "auto"
  double cfl_safety = 0.5;
  double t_end = 0.0;
  int reproject_every = 1;
  std::size_t history_capacity = 1u << 20;
};

/// h^2 / (2n): explicit stability bound of the discrete Laplacian.
double cfl_bound(const Lattice &lattice);

/// Resolved step size; throws ContractError when an explicit dt exceeds the
/// bound or the config is otherwise invalid.
double resolve_dt(const FlowConfig &config, const Lattice &lattice);

struct DiagnosticRow
{
  std::size_t step;
  double t;
  double ym_energy;
  double grad_norm_sq;
  double energy_identity_residual;
  double max_point_curvature;
  double dstar_a_residual;
  double dt;
};

inline constexpr const char *diagnostic_csv_header =
  "step,t,ym_energy,grad_norm_sq,energy_identity_residual,max_point_curvature,dstar_a_residual,dt";

void write_csv_row(std::ostream &out, const DiagnosticRow &row);

class FlowState
{
public:
  FlowState(Connection initial, const FlowConfig &config);

  const Connection &connection() const noexcept { return a_; }
  double time() const noexcept { return t_; }
  std::size_t steps() const noexcept { return step_; }
  double energy_integral() const noexcept { return energy_integral_; }
  double initial_energy() const noexcept { return initial_energy_; }
  const std::deque<DiagnosticRow> &history() const noexcept { return history_; }
  /// Companion gauge transformation (identity for the raw variant).
  const GaugeTransform &gauge() const noexcept { return s_; }

private:
  friend FlowState step(FlowState state, const FlowConfig &config);
  friend FlowState step(FlowState state, const FlowConfig &config, double dt);

  Connection a_;
  GaugeTransform s_;
  double t_ = 0.0;
  std::size_t step_ = 0;
  double energy_integral_ = 0.0;
  double initial_energy_;
  std::optional<OneForm> rhs_cache_;
  std::deque<DiagnosticRow> history_;
};

/// Raised when max |F| exceeds blowup_guard or becomes non-finite.
class SingularStop : public ContractError
{
public:
  SingularStop(double t, std::size_t step, double max_curvature, field::Site where);

  double time() const noexcept { return t_; }
  std::size_t step() const noexcept { return step_; }
  double max_curvature() const noexcept { return max_curvature_; }
  /// Site of the largest pointwise curvature: the candidate singular point.
  field::Site site() const noexcept { return site_; }

private:
  double t_;
  std::size_t step_;
  double max_curvature_;
  field::Site site_;
};

/// Advances by the resolved dt.
FlowState step(FlowState state, const FlowConfig &config);
/// Advances by an explicit dt (used to land exactly on t_end).
FlowState step(FlowState state, const FlowConfig &config, double dt);

/// |energy(A(t)) + energy_integral - energy(A(0))|.
double energy_identity_residual(const FlowState &state);

/// Integrates until t_end, invoking `observe` after each step if given.
template <typename Observer>
FlowState integrate(FlowState state, const FlowConfig &config, Observer &&observe);
FlowState integrate(FlowState state, const FlowConfig &config);

/// A(t_k) = apply_gauge(S(t_k)^{-1}, a(t_k)).
std::vector<Connection> reconstruct_raw(const std::vector<Connection> &a_trajectory,
                                        const std::vector<GaugeTransform> &s_trajectory);

// ---------------------------------------------------------------- inline

template <typename Observer>
FlowState integrate(FlowState state, const FlowConfig &config, Observer &&observe)
{
  const double dt = resolve_dt(config, state.connection().lattice());
  while (state.time() < config.t_end * (1.0 - 1e-14))
  {
    const double remaining = config.t_end - state.time();
    state = remaining < dt * (1.0 + 1e-12) ? step(std::move(state), config, remaining)
                                            : step(std::move(state), config, dt);
    observe(state);
  }
  return state;
}

} // namespace ymf::flow
