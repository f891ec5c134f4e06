#include "ymf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ymf/errors.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"

namespace ymf::analysis {

using field::Coordinates;
using field::CompensatedSum;
using field::Lattice;

namespace {

/// Integer offsets v with |v| h <= r.
std::vector<Coordinates> ball_offsets(const Lattice &lat, double r, const char *op)
{
  const int n = lat.dimension();
  const double rs = r / lat.spacing();
  const int m = static_cast<int>(std::floor(rs * (1.0 + 1e-12)));
  if (!(r > 0.0) || 2 * m + 1 > lat.min_extent())
  {
    std::ostringstream msg;
    msg << "radius " << r << " must be positive and the ball must not wrap the torus";
    throw ContractError("analysis", op, msg.str());
  }
  std::vector<Coordinates> out;
  Coordinates v{};
  const int side = 2 * m + 1;
  int total = 1;
  for (int mu = 0; mu < n; ++mu)
    total *= side;
  for (int k = 0; k < total; ++k)
  {
    int rest = k;
    double d2 = 0.0;
    for (int mu = 0; mu < n; ++mu)
    {
      v[mu] = rest % side - m;
      rest /= side;
      d2 += static_cast<double>(v[mu]) * v[mu];
    }
    if (std::sqrt(d2) <= rs * (1.0 + 1e-12))
      out.push_back(v);
  }
  return out;
}

/// |w(x)|^p at every site.
std::vector<double> density(const TwoForm &f, double p)
{
  std::vector<double> out(f.lattice().site_count());
  for (Site x = 0; x < out.size(); ++x)
    out[x] = std::pow(field::pointwise_norm(f, x), p);
  return out;
}

/// h^n sum over B_r(x) of `rho`, for every center x.
std::vector<double> ball_sums(const Lattice &lat, const std::vector<double> &rho, const std::vector<Coordinates> &offsets)
{
  const int n = lat.dimension();
  std::vector<double> out(lat.site_count());
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    const Coordinates c = lat.coordinates(x);
    CompensatedSum s;
    for (const auto &v : offsets)
    {
      Coordinates q = c;
      for (int mu = 0; mu < n; ++mu)
        q[mu] += v[mu];
      s.add(rho[lat.site(q)]);
    }
    out[x] = lat.volume_element() * s.value();
  }
  return out;
}

double patch_sum(const Lattice &lat, const std::vector<double> &rho, const std::vector<Site> &sites)
{
  CompensatedSum s;
  for (Site x : sites)
    s.add(rho[x]);
  return lat.volume_element() * s.value();
}

std::vector<TwoForm> curvatures(const RunHistory &h)
{
  std::vector<TwoForm> out;
  out.reserve(h.fields.size());
  for (const auto &a : h.fields)
    out.push_back(field::curvature(a));
  return out;
}

void settle(MonitorReport &r)
{
  r.pass = !r.bound || r.constant <= *r.bound;
}

/// Sum over the pointwise squared norms of every component of nabla_A F.
std::vector<double> gradient_density(const Connection &a, const TwoForm &f)
{
  std::vector<double> out(a.lattice().site_count(), 0.0);
  for (const auto &g : field::cov_gradient(a, f))
    for (Site x = 0; x < out.size(); ++x)
    {
      const double v = field::pointwise_norm(g, x);
      out[x] += v * v;
    }
  return out;
}

} // namespace

void RunHistory::validate() const
{
  if (fields.empty() || fields.size() != times.size())
    throw ContractError("analysis", "RunHistory", "need one time per field and at least one field");
  for (std::size_t k = 0; k < times.size(); ++k)
  {
    if (!std::isfinite(times[k]) || times[k] < 0.0)
      throw ContractError("analysis", "RunHistory", "times must be finite and non-negative");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw ContractError("analysis", "RunHistory", "times must be strictly increasing");
    if (!(fields[k].lattice() == fields[0].lattice()) || fields[k].rank() != fields[0].rank())
      throw ContractError("analysis", "RunHistory", "fields live on different lattices or groups");
  }
}

void write_csv(std::ostream &out, const MonitorReport &report)
{
  const auto precision = out.precision(17);
  out << monitor_csv_header << '\n';
  for (const auto &r : report.rows)
    out << r.time << ',' << r.patch << ',' << r.quantity << ',' << r.running_constant << '\n';
  out.precision(precision);
}

PatchPair make_patch_pair(const Lattice &lattice, Site center, double radius)
{
  ball_offsets(lattice, 2.0 * radius, "make_patch_pair");
  return {BallPatch(lattice, center, radius), BallPatch(lattice, center, 2.0 * radius)};
}

MonitorReport local_energy_monitor(const RunHistory &history, const std::vector<PatchPair> &pairs,
                                   std::optional<double> bound)
{
  history.validate();
  const Lattice &lat = history.fields[0].lattice();
  const int n = lat.dimension();
  const double p = 0.5 * n;
  for (const auto &pp : pairs)
  {
    if (!(pp.inner.lattice() == lat) || !(pp.outer.lattice() == lat))
      throw ContractError("analysis", "local_energy_monitor", "patch lives on a different lattice");
    if (pp.inner.center() != pp.outer.center() || std::abs(pp.outer.radius() - 2.0 * pp.inner.radius()) > 1e-12 * pp.outer.radius())
      throw ContractError("analysis", "local_energy_monitor", "outer patch must be the concentric ball of twice the radius");
    ball_offsets(lat, pp.outer.radius(), "local_energy_monitor");
  }

  MonitorReport rep;
  rep.name = "local_energy";
  rep.bound = bound;
  if (n != 4)
    rep.notes.push_back("gradient term omitted: its weight |F|^((n-4)/2) is singular for n < 4");

  const std::vector<TwoForm> f = curvatures(history);
  std::vector<std::vector<double>> rho, grad;
  for (std::size_t k = 0; k < f.size(); ++k)
  {
    rho.push_back(density(f[k], p));
    if (n == 4)
      grad.push_back(gradient_density(history.fields[k], f[k]));
  }

  for (std::size_t i = 0; i < pairs.size(); ++i)
  {
    const auto &in = pairs[i].inner.interior();
    const auto &out = pairs[i].outer.interior();
    const double r2 = pairs[i].inner.radius() * pairs[i].inner.radius();
    const double rhs0 = patch_sum(lat, rho[0], out);
    double outer_integral = 0.0, gradient_integral = 0.0;
    double prev_outer = rhs0, prev_grad = n == 4 ? patch_sum(lat, grad[0], in) : 0.0;
    double running = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
    {
      const double e_out = patch_sum(lat, rho[k], out);
      const double g_in = n == 4 ? patch_sum(lat, grad[k], in) : 0.0;
      if (k > 0)
      {
        const double dt = history.times[k] - history.times[k - 1];
        outer_integral += 0.5 * dt * (prev_outer + e_out);
        gradient_integral += 0.5 * dt * (prev_grad + g_in);
      }
      prev_outer = e_out;
      prev_grad = g_in;

      const double lhs = patch_sum(lat, rho[k], in) + gradient_integral;
      const double excess = lhs - rhs0;
      const double rhs1 = outer_integral / r2;
      double c = 0.0;
      if (excess > 1e-12 * std::max(rhs0, lhs))
      {
        if (rhs1 > 0.0)
          c = excess / rhs1;
        else
          c = std::numeric_limits<double>::infinity();
      }
      else if (rhs1 == 0.0 && lhs == 0.0)
        rep.degenerate = true;
      running = std::max(running, c);
      rep.rows.push_back({history.times[k], i, lhs, running});
      rep.constant = std::max(rep.constant, c);
    }
  }
  settle(rep);
  return rep;
}

MonitorReport eps_regularity_monitor(const RunHistory &history, const BallPatch &centers, double r0,
                                     std::optional<double> bound)
{
  history.validate();
  const Lattice &lat = history.fields[0].lattice();
  if (!(centers.lattice() == lat))
    throw ContractError("analysis", "eps_regularity_monitor", "patch lives on a different lattice");
  const auto offsets = ball_offsets(lat, r0, "eps_regularity_monitor");
  const double window = r0 * r0;
  const double t_first = history.times.front();
  const double slack = 1e-12 * std::max(1.0, history.times.back());
  std::size_t first_k = history.times.size();
  for (std::size_t k = 0; k < history.times.size(); ++k)
    if (history.times[k] - window >= t_first - slack)
    {
      first_k = k;
      break;
    }
  if (first_k == history.times.size())
  {
    std::ostringstream msg;
    msg << "window of length r0^2 = " << window << " precedes the start of the run at every sample";
    throw ContractError("analysis", "eps_regularity_monitor", msg.str());
  }

  const int n = lat.dimension();
  const std::vector<TwoForm> f = curvatures(history);
  std::vector<std::vector<double>> energy, concentration, point;
  for (const auto &fk : f)
  {
    const auto rho2 = density(fk, 2.0);
    energy.push_back(ball_sums(lat, rho2, offsets));
    concentration.push_back(ball_sums(lat, density(fk, 0.5 * n), offsets));
    point.push_back(rho2);
  }

  MonitorReport rep;
  rep.name = "eps_regularity";
  rep.bound = bound;
  double hyp = 0.0, running = 0.0;
  for (std::size_t k = first_k; k < history.times.size(); ++k)
  {
    const double t0 = history.times[k];
    const double start = std::max(t_first, t0 - window);
    // Samples strictly inside the window plus the interpolated start.
    std::size_t j0 = 0;
    while (history.times[j0 + 1] <= start)
      ++j0;
    const double theta = (start - history.times[j0]) / (history.times[j0 + 1] - history.times[j0]);
    double best = 0.0;
    for (Site x : centers.interior())
    {
      auto value = [&](std::size_t j) { return energy[j][x]; };
      const double at_start = (1.0 - theta) * value(j0) + theta * value(j0 + 1);
      double integral = 0.0;
      double t_prev = start, v_prev = at_start;
      for (std::size_t j = j0 + 1; j <= k; ++j)
      {
        integral += 0.5 * (history.times[j] - t_prev) * (v_prev + value(j));
        t_prev = history.times[j];
        v_prev = value(j);
      }
      for (std::size_t j = j0; j <= k; ++j)
        hyp = std::max(hyp, concentration[j][x]);
      const double num = point[k][x] * window;
      double ratio = 0.0;
      if (integral > 0.0)
        ratio = num / integral;
      else if (num == 0.0)
        rep.degenerate = true;
      else
        ratio = std::numeric_limits<double>::infinity();
      best = std::max(best, ratio);
    }
    running = std::max(running, best);
    rep.rows.push_back({t0, 0, best, running});
  }
  rep.constant = running;
  rep.hypothesis = hyp;
  settle(rep);
  return rep;
}

std::vector<SingularFlag> singular_detector(const RunHistory &history, double eps0, const std::vector<double> &radii,
                                            double late_fraction)
{
  history.validate();
  return singular_detector(history.times, curvatures(history), eps0, radii, late_fraction);
}

std::vector<SingularFlag> singular_detector(const std::vector<double> &times, const std::vector<TwoForm> &curvature,
                                            double eps0, const std::vector<double> &radii, double late_fraction)
{
  if (!(eps0 > 0.0))
    throw ContractError("analysis", "singular_detector", "eps0 must be positive");
  if (!(late_fraction >= 0.0 && late_fraction <= 1.0))
    throw ContractError("analysis", "singular_detector", "late_fraction must lie in [0, 1]");
  if (curvature.empty() || curvature.size() != times.size() || radii.empty())
    throw ContractError("analysis", "singular_detector", "need one time per field, at least one field and one radius");
  const Lattice &lat = curvature[0].lattice();
  const double cutoff = times.front() + (1.0 - late_fraction) * (times.back() - times.front());

  std::vector<std::vector<Coordinates>> offsets;
  for (double r : radii)
    offsets.push_back(ball_offsets(lat, r, "singular_detector"));

  std::vector<std::vector<double>> late_max(radii.size(), std::vector<double>(lat.site_count(), 0.0));
  for (std::size_t k = 0; k < curvature.size(); ++k)
  {
    if (times[k] < cutoff)
      continue;
    const auto rho = density(curvature[k], 0.5 * lat.dimension());
    for (std::size_t i = 0; i < radii.size(); ++i)
    {
      const auto sums = ball_sums(lat, rho, offsets[i]);
      for (Site x = 0; x < lat.site_count(); ++x)
        late_max[i][x] = std::max(late_max[i][x], sums[x]);
    }
  }

  std::vector<SingularFlag> out;
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    bool all = true;
    for (std::size_t i = 0; i < radii.size() && all; ++i)
      all = late_max[i][x] >= eps0;
    if (!all)
      continue;
    SingularFlag flag{x, {}};
    for (std::size_t i = 0; i < radii.size(); ++i)
      flag.concentration.push_back(late_max[i][x]);
    out.push_back(std::move(flag));
  }
  return out;
}

double bianchi_residual(const Connection &a)
{
  if (a.lattice().dimension() < 3)
    return 0.0;
  return field::l2(field::cov_d(a, field::curvature(a)));
}

double weitzenboeck_residual_abelian(const Connection &a)
{
  if (a.rank() != 1)
    throw ContractError("analysis", "weitzenboeck_residual_abelian",
                        "unsupported for SU(2): the quadratic curvature terms have no fixed constants");
  const TwoForm f = field::curvature(a);
  TwoForm r = field::d(field::d_star(f));
  if (a.lattice().dimension() >= 3)
    r += field::d_star(field::d(f));
  r -= field::rough_laplacian(f);
  return field::l2(r);
}

MonitorReport bianchi_monitor(const RunHistory &history)
{
  history.validate();
  MonitorReport rep;
  rep.name = "bianchi";
  for (std::size_t k = 0; k < history.fields.size(); ++k)
  {
    const double v = bianchi_residual(history.fields[k]);
    rep.constant = std::max(rep.constant, v);
    rep.rows.push_back({history.times[k], 0, v, rep.constant});
  }
  settle(rep);
  return rep;
}

MonitorReport weitzenboeck_monitor(const RunHistory &history)
{
  history.validate();
  MonitorReport rep;
  rep.name = "weitzenboeck";
  for (std::size_t k = 0; k < history.fields.size(); ++k)
  {
    const double v = weitzenboeck_residual_abelian(history.fields[k]);
    rep.constant = std::max(rep.constant, v);
    rep.rows.push_back({history.times[k], 0, v, rep.constant});
  }
  settle(rep);
  return rep;
}

} // namespace ymf::analysis
