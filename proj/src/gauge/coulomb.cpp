#include "ymf/gauge/coulomb.hpp"

#include <cmath>
#include <sstream>

#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"
#include "ymf/flow.hpp"

namespace ymf::gauge {

using field::OneForm;
using field::Site;
using lie::AlgebraElement;
using lie::GroupElement;

namespace {

double domain_l2(const field::Form<0> &w, const Domain &domain)
{
  return domain.is_torus() ? field::l2(w) : field::l2_on(w, domain.patch->interior());
}

double domain_l2(const field::Form<1> &w, const Domain &domain)
{
  return domain.is_torus() ? field::l2(w) : field::l2_on(w, domain.patch->interior());
}

double domain_l2(const field::Form<2> &w, const Domain &domain)
{
  return domain.is_torus() ? field::l2(w) : field::l2_on(w, domain.patch->interior());
}

template <int K>
double domain_w12(const field::Form<K> &w, const Domain &domain)
{
  return domain.is_torus() ? field::w12(w) : field::w12_on(w, domain.patch->interior());
}

bool neumann_patch(const Domain &domain)
{
  return !domain.is_torus() && domain.bc == BoundaryCondition::neumann_mean_zero;
}

void zero_faces(OneForm &w, const Domain &domain)
{
  if (!neumann_patch(domain))
    return;
  for (const auto &f : domain.patch->faces())
    w(f.edge_base, f.axis) = AlgebraElement(w.rank());
}

/// Section that vanishes away from the domain.
Section confine(Section u, const Domain &domain)
{
  if (domain.is_torus())
    return u;
  for (Site x = 0; x < u.lattice().site_count(); ++x)
    if (!domain.patch->is_interior(x))
      u(x, 0) = AlgebraElement(u.rank());
  return u;
}

/// The three terms of the iteration right-hand side at u = u^{k-1}.
struct RhsTerms
{
  Section remainder;   ///< d^*[(e^u)^{-1} d e^u - du]
  Section product;     ///< d^*[e^{-u} A e^{u}] - e^{-u} (d^* A) e^{u}
  Section conjugated;  ///< e^{-u} (d^* A) e^{u}
};

RhsTerms rhs_terms(const Section &u, const Connection &a, const Domain &domain)
{
  const field::Lattice &lat = a.lattice();
  const int n = lat.dimension();
  const double inv_h = 1.0 / lat.spacing();
  const GaugeTransform s = GaugeTransform::exp(u);

  OneForm maurer_cartan(lat, a.rank());
  OneForm conj(lat, a.rank());
  for (Site x = 0; x < lat.site_count(); ++x)
    for (int mu = 0; mu < n; ++mu)
    {
      const Site y = lat.forward(x, mu);
      if (s(x) == s(y))
      {
        conj(x, mu) = lie::adjoint(s(x), a(x, mu));
        continue;
      }
      const AlgebraElement step = lie::log(s(x).inverse() * s(y));
      maurer_cartan(x, mu) = step * inv_h;
      conj(x, mu) = lie::adjoint(s(x) * lie::exp(step * 0.5), a(x, mu));
    }
  zero_faces(maurer_cartan, domain);
  zero_faces(conj, domain);

  const Section div_a = field::d_star(a);
  Section rotated(lat, a.rank());
  for (Site x = 0; x < lat.site_count(); ++x)
    rotated(x, 0) = lie::adjoint(s(x), div_a(x, 0));

  RhsTerms t{field::d_star(maurer_cartan) - domain_laplacian(u, domain),
             field::d_star(conj) - rotated,
             rotated};
  t.remainder = confine(std::move(t.remainder), domain);
  t.product = confine(std::move(t.product), domain);
  t.conjugated = confine(std::move(t.conjugated), domain);
  return t;
}

double uhlenbeck(const Connection &a, const Domain &domain, bool &degenerate)
{
  const double num = domain_w12(a, domain);
  const double den = domain_l2(field::curvature(a), domain);
  degenerate = den == 0.0;
  if (den == 0.0)
    return 0.0;
  return num / den;
}

void require_guard(const Connection &a, const GaugeFixConfig &config)
{
  const double norm = small_field_norm(a, config.domain);
  if (!(norm <= config.small_field_guard))
  {
    std::ostringstream msg;
    msg << "small-field guard violated: lp(A, n) = " << norm << " exceeds " << config.small_field_guard;
    throw ContractError("gauge", "coulomb_fix", msg.str());
  }
}

/// The iteration proper, without the small-field check.
GaugeFixResult iterate(const Connection &a, const GaugeFixConfig &config, Section u)
{
  const Domain &domain = config.domain;
  GaugeFixResult out{u, GaugeTransform::exp(u), gauge_on_domain(u, a, domain), {}};
  GaugeFixReport &rep = out.report;
  rep.initial_residual = coulomb_residual(out.a, domain);

  std::optional<Section> previous_step;
  double residual = rep.initial_residual;
  while (!(residual <= config.tol))
  {
    if (rep.iterations >= config.max_iters)
    {
      std::ostringstream msg;
      msg << "no convergence in " << config.max_iters << " iterations, residual " << residual;
      rep.uhlenbeck_ratio = uhlenbeck(out.a, domain, rep.uhlenbeck_degenerate);
      throw GaugeFixFailure(msg.str(), rep);
    }
    const RhsTerms t = rhs_terms(out.u, a, domain);
    Section f = t.remainder;
    f += t.product;
    f += t.conjugated;
    Section next = poisson_solve(f, domain, config.solver_tol);
    if (config.damping != 1.0)
    {
      next *= config.damping;
      next.axpy(1.0 - config.damping, out.u);
    }
    Section delta = next - out.u;
    const double step_norm = domain_w12(delta, domain);
    if (previous_step)
    {
      const double prev = domain_w12(*previous_step, domain);
      rep.contraction_ratios.push_back(prev > 0.0 ? step_norm / prev : 0.0);
    }
    previous_step = std::move(delta);

    out.u = std::move(next);
    out.s = GaugeTransform::exp(out.u);
    if (!(out.s.max_unitarity_defect() <= lie::unitarity_tolerance))
      throw ContractError("gauge", "coulomb_fix", "iterate left the group beyond the unitarity tolerance");
    out.a = gauge_on_domain(out.u, a, domain);
    residual = coulomb_residual(out.a, domain);
    ++rep.iterations;
    rep.residual_history.push_back(residual);
    rep.u_norm_history.push_back(domain_w12(out.u, domain));
    if (!std::isfinite(residual))
      throw GaugeFixFailure("iteration diverged (non-finite residual)", rep);
  }
  rep.converged = true;
  rep.uhlenbeck_ratio = uhlenbeck(out.a, domain, rep.uhlenbeck_degenerate);
  return out;
}

} // namespace

void validate(const GaugeFixConfig &c)
{
  if (!(c.tol > 0.0))
    throw ContractError("gauge", "GaugeFixConfig", "tol must be positive");
  if (!(c.damping > 0.0 && c.damping <= 1.0))
    throw ContractError("gauge", "GaugeFixConfig", "damping must lie in (0, 1]");
  if (c.max_iters < 1)
    throw ContractError("gauge", "GaugeFixConfig", "max_iters must be >= 1");
  if (!(c.small_field_guard > 0.0))
    throw ContractError("gauge", "GaugeFixConfig", "small_field_guard must be positive");
  if (!(c.drift_guard > 0.0))
    throw ContractError("gauge", "GaugeFixConfig", "drift_guard must be positive");
  if (c.domain.is_torus() && c.domain.bc == BoundaryCondition::dirichlet_zero)
    throw ContractError("gauge", "GaugeFixConfig", "dirichlet_zero is only available on a patch domain");
}

double small_field_norm(const Connection &a, const Domain &domain)
{
  const double n = a.lattice().dimension();
  return domain.is_torus() ? field::lp(a, n) : field::local_lp(a, *domain.patch, n);
}

double coulomb_residual(const Connection &a, const Domain &domain)
{
  return domain_l2(field::d_star(a), domain);
}

Connection gauge_on_domain(const Section &u, const Connection &a, const Domain &domain)
{
  Connection out = flow::apply_gauge(GaugeTransform::exp(u), a);
  zero_faces(out, domain);
  return out;
}

GaugeFixResult coulomb_fix(const Connection &a, const GaugeFixConfig &config)
{
  return coulomb_fix(a, config, Section(a.lattice(), a.rank()));
}

GaugeFixResult coulomb_fix(const Connection &a, const GaugeFixConfig &config, const Section &u0)
{
  validate(config);
  if (!config.domain.is_torus() && !(config.domain.patch->lattice() == a.lattice()))
    throw ContractError("gauge", "coulomb_fix", "patch and connection live on different lattices");
  if (!(u0.lattice() == a.lattice()) || u0.rank() != a.rank())
    throw ContractError("gauge", "coulomb_fix", "initial guess is incompatible with the connection");
  require_guard(a, config);
  return iterate(a, config, confine(u0, config.domain));
}

TimeFamilyResult coulomb_fix_time_family(const std::vector<Connection> &samples,
                                         const std::vector<double> &times,
                                         const GaugeFixConfig &config)
{
  validate(config);
  if (samples.empty() || samples.size() != times.size())
    throw ContractError("gauge", "coulomb_fix_time_family", "need one time per sample and at least one sample");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1]))
      throw ContractError("gauge", "coulomb_fix_time_family", "sample times must be strictly increasing");
  const Domain &domain = config.domain;
  for (std::size_t j = 0; j + 1 < samples.size(); ++j)
  {
    const double drift = domain_w12(samples[j + 1] - samples[j], domain);
    if (!(drift <= config.drift_guard))
    {
      std::ostringstream msg;
      msg << "w12 drift " << drift << " between samples " << j << " and " << j + 1 << " exceeds "
          << config.drift_guard << "; sample the family more finely";
      throw ContractError("gauge", "coulomb_fix_time_family", msg.str());
    }
  }
  for (const auto &a : samples)
    require_guard(a, config);

  TimeFamilyResult out;
  out.samples.push_back(coulomb_fix(samples[0], config));
  const GaugeTransform s0 = out.samples[0].s;
  const Section u0 = out.samples[0].u;

  std::vector<Section> relative{Section(samples[0].lattice(), samples[0].rank())};
  for (std::size_t j = 1; j < samples.size(); ++j)
  {
    // A~ = a(t_0) + lambda(t_j).
    const Connection tilde = gauge_on_domain(u0, samples[j], domain);
    GaugeFixResult r = iterate(tilde, config, relative.back());
    relative.push_back(r.u);
    r.s = s0 * r.s;
    out.samples.push_back(std::move(r));
  }

  for (const auto &r : out.samples)
    out.max_residual = std::max(out.max_residual, r.report.final_residual());

  for (std::size_t j = 0; j + 1 < samples.size(); ++j)
  {
    const double dt = times[j + 1] - times[j];
    const field::Lattice &lat = samples[j].lattice();
    Section s(lat, samples[j].rank());
    for (Site x = 0; x < lat.site_count(); ++x)
    {
      const GroupElement g = lie::exp(-relative[j](x, 0)) * lie::exp(relative[j + 1](x, 0));
      s(x, 0) = lie::log(g) * (1.0 / dt);
    }
    const Connection &a = out.samples[j].a;
    const double s2 = std::pow(domain_l2(s, domain), 2);
    const double ds2 = std::pow(domain_l2(field::cov_d(a, s), domain), 2);
    double grad2 = 0.0;
    for (const auto &g : field::cov_gradient(a, field::curvature(a)))
      grad2 += std::pow(domain_l2(g, domain), 2);
    out.velocity_sum += dt * (s2 + ds2);
    out.curvature_sum += dt * grad2;
    out.velocities.push_back(std::move(s));
  }
  out.ratio = out.curvature_sum > 0.0 ? out.velocity_sum / out.curvature_sum : 0.0;
  return out;
}

} // namespace ymf::gauge
