#include "ymf/gauge/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "ymf/errors.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"

namespace ymf::gauge {

using field::Lattice;
using field::Site;
using lie::AlgebraElement;

namespace {

int coordinate_count(int rank)
{
  return AlgebraElement::dimension(rank);
}

std::vector<double> coordinate_plane(const Section &f, int a)
{
  std::vector<double> v(f.lattice().site_count());
  for (Site x = 0; x < v.size(); ++x)
    v[x] = f(x, 0).coordinates()[a];
  return v;
}

void store_planes(Section &u, const std::vector<std::vector<double>> &planes, const std::vector<Site> *sites)
{
  const int rank = u.rank();
  if (sites)
  {
    for (std::size_t i = 0; i < sites->size(); ++i)
    {
      std::array<double, 3> c{};
      for (std::size_t a = 0; a < planes.size(); ++a)
        c[a] = planes[a][i];
      u((*sites)[i], 0) = AlgebraElement::from_coordinates(rank, c);
    }
    return;
  }
  for (Site x = 0; x < u.lattice().site_count(); ++x)
  {
    std::array<double, 3> c{};
    for (std::size_t a = 0; a < planes.size(); ++a)
      c[a] = planes[a][x];
    u(x, 0) = AlgebraElement::from_coordinates(rank, c);
  }
}

double max_abs_coordinate(const Section &f)
{
  double m = 0.0;
  for (const auto &v : f.values())
    for (double c : v.coordinates())
      m = std::max(m, std::abs(c));
  return m;
}

void require_mean_zero(const Section &f, const Domain &domain)
{
  const auto mean = domain_mean(f, domain);
  const double scale = std::max(1.0, max_abs_coordinate(f));
  for (double m : mean)
    if (std::abs(m) > 1e-12 * scale)
    {
      std::ostringstream msg;
      msg << "right-hand side has mean " << m << " but the problem is only solvable for mean zero";
      throw ContractError("gauge", "poisson_solve", msg.str());
    }
}

// ------------------------------------------------------------------ torus

struct FftwPlane
{
  FftwPlane(std::size_t real, std::size_t spectral)
    : r(fftw_alloc_real(real)), c(fftw_alloc_complex(spectral))
  {}
  ~FftwPlane()
  {
    fftw_free(r);
    fftw_free(c);
  }
  FftwPlane(const FftwPlane &) = delete;
  FftwPlane &operator=(const FftwPlane &) = delete;

  double *r;
  fftw_complex *c;
};

Section solve_torus(const Section &f)
{
  const Lattice &lat = f.lattice();
  const int n = lat.dimension();
  const double h = lat.spacing();

  // FFTW is row-major with the last index fastest; our axis 0 is fastest.
  int dims[4];
  for (int k = 0; k < n; ++k)
    dims[k] = lat.extent(n - 1 - k);
  const int half = lat.extent(0) / 2 + 1;
  std::size_t spectral = static_cast<std::size_t>(half);
  for (int mu = 1; mu < n; ++mu)
    spectral *= static_cast<std::size_t>(lat.extent(mu));

  // Symbol of d^*d at every retained frequency.
  std::vector<double> sigma(spectral);
  std::vector<double> axis_term[4];
  for (int mu = 0; mu < n; ++mu)
  {
    const int l = lat.extent(mu);
    axis_term[mu].resize(static_cast<std::size_t>(l));
    for (int k = 0; k < l; ++k)
    {
      const double s = std::sin(std::numbers::pi * k / l);
      axis_term[mu][k] = 4.0 / (h * h) * s * s;
    }
  }
  for (std::size_t o = 0; o < spectral; ++o)
  {
    std::size_t rest = o;
    double s = axis_term[0][rest % half];
    rest /= half;
    for (int mu = 1; mu < n; ++mu)
    {
      const std::size_t l = static_cast<std::size_t>(lat.extent(mu));
      s += axis_term[mu][rest % l];
      rest /= l;
    }
    sigma[o] = s;
  }

  const std::size_t sites = lat.site_count();
  FftwPlane buf(sites, spectral);
  const fftw_plan forward = fftw_plan_dft_r2c(n, dims, buf.r, buf.c, FFTW_ESTIMATE);
  const fftw_plan backward = fftw_plan_dft_c2r(n, dims, buf.c, buf.r, FFTW_ESTIMATE);

  const int ncoord = coordinate_count(f.rank());
  std::vector<std::vector<double>> planes;
  for (int a = 0; a < ncoord; ++a)
  {
    const std::vector<double> src = coordinate_plane(f, a);
    std::copy(src.begin(), src.end(), buf.r);
    fftw_execute(forward);
    const double norm = 1.0 / static_cast<double>(sites);
    for (std::size_t o = 0; o < spectral; ++o)
    {
      const double scale = sigma[o] > 0.0 ? -norm / sigma[o] : 0.0;
      buf.c[o][0] *= scale;
      buf.c[o][1] *= scale;
    }
    fftw_execute(backward);
    planes.emplace_back(buf.r, buf.r + sites);
  }
  fftw_destroy_plan(forward);
  fftw_destroy_plan(backward);

  Section u(lat, f.rank());
  store_planes(u, planes, nullptr);
  return u;
}

// ------------------------------------------------------------------ patch

/// Positive semidefinite patch Laplacian on interior sites.
class PatchLaplacian
{
public:
  PatchLaplacian(const BallPatch &patch, BoundaryCondition bc)
    : bc_(bc), index_(patch.lattice().site_count(), -1)
  {
    const auto &in = patch.interior();
    for (std::size_t i = 0; i < in.size(); ++i)
      index_[in[i]] = static_cast<long>(i);
    const Lattice &lat = patch.lattice();
    const double inv_h2 = 1.0 / (lat.spacing() * lat.spacing());
    neighbors_.resize(in.size());
    diagonal_.assign(in.size(), 0.0);
    for (std::size_t i = 0; i < in.size(); ++i)
      for (int mu = 0; mu < lat.dimension(); ++mu)
        for (Site y : {lat.forward(in[i], mu), lat.backward(in[i], mu)})
        {
          const long j = index_[y];
          if (j >= 0)
          {
            neighbors_[i].push_back(j);
            diagonal_[i] += inv_h2;
          }
          else if (bc == BoundaryCondition::dirichlet_zero)
            diagonal_[i] += inv_h2;
        }
    inv_h2_ = inv_h2;
  }

  std::size_t size() const noexcept { return diagonal_.size(); }
  bool singular() const noexcept { return bc_ == BoundaryCondition::neumann_mean_zero; }

  void apply(const std::vector<double> &u, std::vector<double> &out) const
  {
    out.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
    {
      double s = diagonal_[i] * u[i];
      for (long j : neighbors_[i])
        s -= inv_h2_ * u[static_cast<std::size_t>(j)];
      out[i] = s;
    }
  }

private:
  BoundaryCondition bc_;
  std::vector<long> index_;
  std::vector<std::vector<long>> neighbors_;
  std::vector<double> diagonal_;
  double inv_h2_ = 0.0;
};

double dot(const std::vector<double> &a, const std::vector<double> &b)
{
  field::CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i)
    s.add(a[i] * b[i]);
  return s.value();
}

void remove_mean(std::vector<double> &v)
{
  if (v.empty())
    return;
  field::CompensatedSum s;
  for (double x : v)
    s.add(x);
  const double m = s.value() / static_cast<double>(v.size());
  for (double &x : v)
    x -= m;
}

std::vector<double> conjugate_gradient(const PatchLaplacian &op, std::vector<double> b, double rel_tol)
{
  const std::size_t n = op.size();
  if (op.singular())
    remove_mean(b);
  std::vector<double> x(n, 0.0), r = b, p = b, q;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0)
    return x;
  double rr = dot(r, r);
  const std::size_t max_iters = 20 * n + 100;
  for (std::size_t it = 0; it < max_iters; ++it)
  {
    if (std::sqrt(rr) <= rel_tol * bnorm)
    {
      // Recompute the true residual once to guard against drift.
      op.apply(x, q);
      double t = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        t += (b[i] - q[i]) * (b[i] - q[i]);
      if (std::sqrt(t) <= 10.0 * rel_tol * bnorm)
      {
        if (op.singular())
          remove_mean(x);
        return x;
      }
      for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - q[i];
      p = r;
      rr = dot(r, r);
      continue;
    }
    op.apply(p, q);
    const double alpha = rr / dot(p, q);
    for (std::size_t i = 0; i < n; ++i)
    {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (op.singular())
      remove_mean(r);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i)
      p[i] = r[i] + beta * p[i];
  }
  std::ostringstream msg;
  msg << "conjugate gradient stalled after " << max_iters << " iterations, relative residual "
      << std::sqrt(rr) / bnorm;
  throw ContractError("gauge", "poisson_solve", msg.str());
}

Section solve_patch(const Section &f, const BallPatch &patch, BoundaryCondition bc, double rel_tol)
{
  const PatchLaplacian op(patch, bc);
  const auto &in = patch.interior();
  std::vector<std::vector<double>> planes;
  for (int a = 0; a < coordinate_count(f.rank()); ++a)
  {
    std::vector<double> b(in.size());
    for (std::size_t i = 0; i < in.size(); ++i)
      b[i] = -f(in[i], 0).coordinates()[a];
    planes.push_back(conjugate_gradient(op, std::move(b), rel_tol));
  }
  Section u(f.lattice(), f.rank());
  store_planes(u, planes, &in);
  return u;
}

} // namespace

std::array<double, 3> domain_mean(const Section &f, const Domain &domain)
{
  std::array<field::CompensatedSum, 3> s;
  std::size_t count = 0;
  const auto add = [&](Site x) {
    const auto c = f(x, 0).coordinates();
    for (int a = 0; a < 3; ++a)
      s[a].add(c[a]);
    ++count;
  };
  if (domain.is_torus())
    for (Site x = 0; x < f.lattice().site_count(); ++x)
      add(x);
  else
    for (Site x : domain.patch->interior())
      add(x);
  std::array<double, 3> m{};
  for (int a = 0; a < 3; ++a)
    m[a] = count ? s[a].value() / static_cast<double>(count) : 0.0;
  return m;
}

Section poisson_solve(const Section &f, const Domain &domain, double rel_tol)
{
  if (!domain.is_torus() && !(domain.patch->lattice() == f.lattice()))
    throw ContractError("gauge", "poisson_solve", "patch and right-hand side live on different lattices");
  if (domain.is_torus() && domain.bc == BoundaryCondition::dirichlet_zero)
    throw ContractError("gauge", "poisson_solve", "dirichlet_zero requires a patch domain");
  if (domain.is_torus() || domain.bc == BoundaryCondition::neumann_mean_zero)
    require_mean_zero(f, domain);
  if (domain.is_torus())
    return solve_torus(f);
  return solve_patch(f, *domain.patch, domain.bc, rel_tol);
}

Section domain_laplacian(const Section &u, const Domain &domain)
{
  if (domain.is_torus())
    return field::d_star(field::d(u));
  const BallPatch &patch = *domain.patch;
  const PatchLaplacian op(patch, domain.bc);
  const auto &in = patch.interior();
  std::vector<std::vector<double>> planes;
  for (int a = 0; a < coordinate_count(u.rank()); ++a)
  {
    std::vector<double> v(in.size()), out;
    for (std::size_t i = 0; i < in.size(); ++i)
      v[i] = u(in[i], 0).coordinates()[a];
    op.apply(v, out);
    planes.push_back(std::move(out));
  }
  Section r(u.lattice(), u.rank());
  store_planes(r, planes, &in);
  return r;
}

double poisson_residual(const Section &u, const Section &f, const Domain &domain)
{
  Section r = domain_laplacian(u, domain);
  r += f;
  const double fn = domain.is_torus() ? field::l2(f) : field::l2_on(f, domain.patch->interior());
  if (fn == 0.0)
    return domain.is_torus() ? field::l2(r) : field::l2_on(r, domain.patch->interior());
  return (domain.is_torus() ? field::l2(r) : field::l2_on(r, domain.patch->interior())) / fn;
}

} // namespace ymf::gauge
