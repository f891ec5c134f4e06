#include "ymf/flow.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"

namespace ymf::flow {

using field::Site;
using lie::AlgebraElement;
using lie::GroupElement;
using lie::Matrix;

Connection apply_gauge(const GaugeTransform &s, const Connection &a)
{
  if (!(s.lattice() == a.lattice()) || s.rank() != a.rank())
    throw ContractError("flow", "apply_gauge", "gauge transform and connection are incompatible");
  const Lattice &lat = a.lattice();
  const int n = lat.dimension();
  const double inv_h = 1.0 / lat.spacing();
  Connection out(lat, a.rank());
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    for (int mu = 0; mu < n; ++mu)
    {
      const Site y = lat.forward(x, mu);
      if (s(x) == s(y))
      {
        out(x, mu) = lie::adjoint(s(x), a(x, mu));
        continue;
      }
      AlgebraElement step(a.rank());
      try
      {
        step = lie::log(s(x).inverse() * s(y));
      }
      catch (const ContractError &e)
      {
        std::ostringstream msg;
        msg << "edge (site " << x << ", axis " << mu + 1 << "): " << e.what();
        throw ContractError("flow", "apply_gauge", msg.str());
      }
      const GroupElement mid = s(x) * lie::exp(step * 0.5);
      out(x, mu) = lie::project_algebra((step * inv_h + lie::adjoint(mid, a(x, mu))).matrix());
    }
  }
  return out;
}

double energy(const Connection &a)
{
  const TwoForm f = field::curvature(a);
  return 0.5 * field::inner_product(f, f);
}

OneForm rhs_raw(const Connection &a)
{
  OneForm g = field::cov_d_star(a, field::curvature(a));
  g *= -1.0;
  return g;
}

OneForm rhs_deturck(const Connection &a)
{
  OneForm g = field::cov_d_star(a, field::curvature(a));
  g += field::cov_d(a, field::cov_d_star(a, a));
  g *= -1.0;
  return g;
}

std::vector<Matrix> rhs_gauge_ode(const GaugeTransform &s, const Connection &a)
{
  if (!(s.lattice() == a.lattice()) || s.rank() != a.rank())
    throw ContractError("flow", "rhs_gauge_ode", "gauge transform and connection are incompatible");
  const Section div = field::cov_d_star(a, a);
  std::vector<Matrix> out;
  out.reserve(a.lattice().site_count());
  for (Site x = 0; x < a.lattice().site_count(); ++x)
    out.push_back(-(s(x).matrix() * div(x, 0).matrix()));
  return out;
}

double cfl_bound(const Lattice &lattice)
{
  const double h = lattice.spacing();
  return h * h / (2.0 * lattice.dimension());
}

double resolve_dt(const FlowConfig &config, const Lattice &lattice)
{
  if (!(config.cfl_safety > 0.0 && config.cfl_safety <= 1.0))
    throw ContractError("flow", "FlowConfig", "cfl_safety must lie in (0, 1]");
  if (config.reproject_every < 1)
    throw ContractError("flow", "FlowConfig", "reproject_every must be >= 1");
  const double bound = cfl_bound(lattice);
  if (!config.dt)
    return config.cfl_safety * bound;
  const double dt = *config.dt;
  if (!(dt > 0.0))
    throw ContractError("flow", "FlowConfig", "dt must be positive");
  if (dt > bound * (1.0 + 1e-12))
  {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the explicit stability bound h^2/(2n) = " << bound;
    throw ContractError("flow", "FlowConfig", msg.str());
  }
  return dt;
}

void write_csv_row(std::ostream &out, const DiagnosticRow &r)
{
  const auto old = out.precision(17);
  out << r.step << ',' << r.t << ',' << r.ym_energy << ',' << r.grad_norm_sq << ','
      << r.energy_identity_residual << ',' << r.max_point_curvature << ',' << r.dstar_a_residual
      << ',' << r.dt << '\n';
  out.precision(old);
}

SingularStop::SingularStop(double t, std::size_t step, double max_curvature, field::Site where)
  : ContractError("flow", "step",
                  "singular stop at t = " + std::to_string(t) + " (step " + std::to_string(step)
                    + "): max |F| = " + std::to_string(max_curvature) + " at site "
                    + std::to_string(where))
  , t_(t)
  , step_(step)
  , max_curvature_(max_curvature)
  , site_(where)
{}

namespace {

OneForm evaluate_rhs(Variant v, const Connection &a)
{
  return v == Variant::raw ? rhs_raw(a) : rhs_deturck(a);
}

struct CurvatureSummary
{
  double energy;
  double max_norm;
  Site argmax;
};

CurvatureSummary summarize(const Connection &a)
{
  const TwoForm f = field::curvature(a);
  CurvatureSummary s{0.5 * field::inner_product(f, f), 0.0, 0};
  for (Site x = 0; x < a.lattice().site_count(); ++x)
  {
    const double v = field::pointwise_norm(f, x);
    if (!(v <= s.max_norm))
    {
      s.max_norm = v;
      s.argmax = x;
      if (std::isnan(v))
        break;
    }
  }
  return s;
}

std::vector<Matrix> as_matrices(const GaugeTransform &s)
{
  std::vector<Matrix> m;
  m.reserve(s.values().size());
  for (const auto &g : s.values())
    m.push_back(g.matrix());
  return m;
}

GaugeTransform from_matrices(const Lattice &lat, int rank, const std::vector<Matrix> &m, bool project)
{
  GaugeTransform s(lat, rank);
  for (Site x = 0; x < m.size(); ++x)
    s(x) = project ? lie::project_group(m[x]) : GroupElement::from_matrix(m[x]);
  return s;
}

std::vector<Matrix> gauge_rhs_matrices(const std::vector<Matrix> &s, const Connection &a)
{
  const Section div = field::cov_d_star(a, a);
  std::vector<Matrix> out(s.size(), Matrix(a.rank()));
  for (Site x = 0; x < s.size(); ++x)
    out[x] = -(s[x] * div(x, 0).matrix());
  return out;
}

std::vector<Matrix> combine(const std::vector<Matrix> &base, double c, const std::vector<Matrix> &k)
{
  std::vector<Matrix> out = base;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += k[i] * c;
  return out;
}

} // namespace

FlowState::FlowState(Connection initial, const FlowConfig &config)
  : a_(std::move(initial)), s_(a_.lattice(), a_.rank())
{
  const CurvatureSummary cs = summarize(a_);
  initial_energy_ = cs.energy;
  const OneForm g = evaluate_rhs(config.variant, a_);
  const double g2 = field::inner_product(g, g);
  rhs_cache_ = g;
  history_.push_back({0, 0.0, cs.energy, g2, 0.0, cs.max_norm, field::l2(field::d_star(a_)), 0.0});
}

FlowState step(FlowState state, const FlowConfig &config)
{
  const double dt = resolve_dt(config, state.a_.lattice());
  return step(std::move(state), config, dt);
}

FlowState step(FlowState state, const FlowConfig &config, double dt)
{
  const Lattice &lat = state.a_.lattice();
  const int rank = state.a_.rank();
  const bool deturck = config.variant == Variant::deturck;

  OneForm g0 = state.rhs_cache_ ? std::move(*state.rhs_cache_) : evaluate_rhs(config.variant, state.a_);
  const double g0_sq = field::inner_product(g0, g0);

  Connection next = state.a_;
  std::vector<Matrix> s_next;
  if (config.scheme == Scheme::euler)
  {
    next.axpy(dt, g0);
    if (deturck)
      s_next = combine(as_matrices(state.s_), dt, gauge_rhs_matrices(as_matrices(state.s_), state.a_));
  }
  else
  {
    const std::vector<Matrix> s0 = as_matrices(state.s_);
    std::vector<Matrix> l1, l2, l3, l4;
    if (deturck)
      l1 = gauge_rhs_matrices(s0, state.a_);

    Connection a2 = state.a_;
    a2.axpy(0.5 * dt, g0);
    const OneForm k2 = evaluate_rhs(config.variant, a2);
    std::vector<Matrix> s2;
    if (deturck)
    {
      s2 = combine(s0, 0.5 * dt, l1);
      l2 = gauge_rhs_matrices(s2, a2);
    }

    Connection a3 = state.a_;
    a3.axpy(0.5 * dt, k2);
    const OneForm k3 = evaluate_rhs(config.variant, a3);
    if (deturck)
      l3 = gauge_rhs_matrices(combine(s0, 0.5 * dt, l2), a3);

    Connection a4 = state.a_;
    a4.axpy(dt, k3);
    const OneForm k4 = evaluate_rhs(config.variant, a4);
    if (deturck)
      l4 = gauge_rhs_matrices(combine(s0, dt, l3), a4);

    next.axpy(dt / 6.0, g0);
    next.axpy(dt / 3.0, k2);
    next.axpy(dt / 3.0, k3);
    next.axpy(dt / 6.0, k4);
    if (deturck)
    {
      s_next = combine(s0, dt / 6.0, l1);
      s_next = combine(s_next, dt / 3.0, l2);
      s_next = combine(s_next, dt / 3.0, l3);
      s_next = combine(s_next, dt / 6.0, l4);
    }
  }

  state.a_ = std::move(next);
  state.t_ += dt;
  ++state.step_;
  if (deturck)
  {
    const bool project = state.step_ % static_cast<std::size_t>(config.reproject_every) == 0;
    state.s_ = from_matrices(lat, rank, s_next, project);
  }

  const CurvatureSummary cs = summarize(state.a_);
  if (!std::isfinite(cs.max_norm) || cs.max_norm > blowup_guard)
    throw SingularStop(state.t_, state.step_, cs.max_norm, cs.argmax);

  OneForm g1 = evaluate_rhs(config.variant, state.a_);
  const double g1_sq = field::inner_product(g1, g1);
  state.energy_integral_ += 0.5 * dt * (g0_sq + g1_sq);
  state.rhs_cache_ = std::move(g1);

  DiagnosticRow row{state.step_,
                    state.t_,
                    cs.energy,
                    g1_sq,
                    std::abs(cs.energy + state.energy_integral_ - state.initial_energy_),
                    cs.max_norm,
                    field::l2(field::d_star(state.a_)),
                    dt};
  state.history_.push_back(row);
  while (state.history_.size() > config.history_capacity)
    state.history_.pop_front();
  return state;
}

double energy_identity_residual(const FlowState &state)
{
  return std::abs(energy(state.connection()) + state.energy_integral() - state.initial_energy());
}

FlowState integrate(FlowState state, const FlowConfig &config)
{
  return integrate(std::move(state), config, [](const FlowState &) {});
}

std::vector<Connection> reconstruct_raw(const std::vector<Connection> &a_trajectory,
                                        const std::vector<GaugeTransform> &s_trajectory)
{
  if (a_trajectory.size() != s_trajectory.size())
    throw ContractError("flow", "reconstruct_raw", "trajectories are not time-aligned");
  std::vector<Connection> out;
  out.reserve(a_trajectory.size());
  for (std::size_t k = 0; k < a_trajectory.size(); ++k)
    out.push_back(apply_gauge(s_trajectory[k].inverse(), a_trajectory[k]));
  return out;
}

} // namespace ymf::flow
