#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"
#include "ymf/flow.hpp"

using namespace ymf;
using namespace ymf::field;
using namespace ymf::flow;
using namespace ymf::testing;

namespace {

constexpr double pi = std::numbers::pi;

/// A_2(x) = amp sin(2 pi k x_1 / L) tau_3: divergence free, eigenvector of
/// the Hodge Laplacian with symbol 4/h^2 sin^2(pi k / L).
Connection transverse_mode(const Lattice &lat, int rank, int k, double amp)
{
  Connection a(lat, rank);
  const AlgebraElement t = rank == 1 ? AlgebraElement::generator(1, 0) : AlgebraElement::generator(2, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
    a(x, 1) = t * (amp * std::sin(2.0 * pi * k * lat.coordinates(x)[0] / lat.extent(0)));
  return a;
}

double symbol(const Lattice &lat, int k)
{
  const double s = std::sin(pi * k / lat.extent(0));
  return 4.0 / (lat.spacing() * lat.spacing()) * s * s;
}

} // namespace

TEST_CASE("rhs_raw")
{
  const Lattice lat = Lattice::cubic(2, 16, 0.125);
  CHECK(l2(rhs_raw(Connection(lat, 2))) == 0.0);

  const Connection m = transverse_mode(lat, 1, 2, 0.3);
  const OneForm g = rhs_raw(m);
  const double lam = symbol(lat, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
    CHECK(std::abs(g(x, 1).coordinates()[0] + lam * m(x, 1).coordinates()[0]) <= 1e-12 * lam * 0.3);

  // Constant nonabelian connection: only bracket terms survive.
  Connection c(lat, 2);
  const lie::Matrix a1 = tau(0) * 0.4;
  const lie::Matrix a2 = tau(1) * 0.9;
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    c(x, 0) = AlgebraElement::from_matrix(a1);
    c(x, 1) = AlgebraElement::from_matrix(a2);
  }
  const auto br = [](const lie::Matrix &p, const lie::Matrix &q) { return p * q - q * p; };
  const lie::Matrix f12 = br(a1, a2);
  const lie::Matrix r1 = -br(a2, f12);
  const lie::Matrix r2 = br(a1, f12);
  const OneForm gc = rhs_raw(c);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    CHECK(max_entry_diff(gc(x, 0).matrix(), r1) < 1e-15);
    CHECK(max_entry_diff(gc(x, 1).matrix(), r2) < 1e-15);
  }
}

TEST_CASE("rhs_deturck")
{
  const Lattice lat = Lattice::cubic(2, 16, 0.125);
  CHECK(l2(rhs_deturck(Connection(lat, 2))) == 0.0);

  const Connection m = transverse_mode(lat, 1, 3, 0.2);
  CHECK(rhs_deturck(m) == rhs_raw(m));

  // Pure gradient: rhs = -d d^* a.
  std::mt19937_64 rng(41);
  const Section s = random_form<0>(lat, 1, rng);
  const Connection a = d(s);
  CHECK(max_diff(rhs_deturck(a), d(d_star(a)) * -1.0) < 1e-9);
  CHECK(l2(rhs_raw(a)) < 1e-9);
}

TEST_CASE("rhs_gauge_ode")
{
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  const GaugeTransform id(lat, 2);
  std::mt19937_64 rng(42);
  const Connection a = random_form<1>(lat, 2, rng);
  const auto g = rhs_gauge_ode(id, a);
  const Section div = d_star(a);
  for (Site x = 0; x < lat.site_count(); ++x)
    CHECK(max_entry_diff(g[x], (div(x, 0) * -1.0).matrix()) < 1e-15);

  const Connection m = transverse_mode(lat, 1, 1, 0.5);
  for (const auto &v : rhs_gauge_ode(GaugeTransform(lat, 1), m))
    CHECK(v.frobenius_norm() < 1e-14);

  // One Euler step against the exact scalar ODE solution.
  for (double dt : {1e-3, 5e-4})
  {
    const auto rhs = rhs_gauge_ode(id, a);
    double worst = 0.0;
    for (Site x = 0; x < lat.site_count(); ++x)
    {
      const lie::Matrix euler = lie::Matrix::identity(2) + rhs[x] * dt;
      const lie::Matrix exact = lie::exp(div(x, 0) * -dt).matrix();
      worst = std::max(worst, max_entry_diff(euler, exact) / (dt * dt * std::pow(div(x, 0).norm() + 1.0, 2)));
    }
    CHECK(worst < 1.0);
  }

  CHECK_THROWS_AS(rhs_gauge_ode(GaugeTransform(Lattice::cubic(2, 4, 0.25), 2), a), ContractError);
}

TEST_CASE("config and CFL bound")
{
  const Lattice lat = Lattice::cubic(2, 16, 0.1);
  FlowConfig cfg;
  CHECK(resolve_dt(cfg, lat) == doctest::Approx(0.5 * 0.01 / 4.0));
  cfg.dt = 0.01;
  try
  {
    resolve_dt(cfg, lat);
    FAIL("expected CFL violation");
  }
  catch (const ContractError &e)
  {
    CHECK(std::string(e.what()).find("h^2/(2n)") != std::string::npos);
  }
  cfg.dt = -1.0;
  CHECK_THROWS_AS(resolve_dt(cfg, lat), ContractError);
  cfg.dt.reset();
  cfg.cfl_safety = 1.5;
  CHECK_THROWS_AS(resolve_dt(cfg, lat), ContractError);
  cfg.cfl_safety = 0.5;
  cfg.reproject_every = 0;
  CHECK_THROWS_AS(resolve_dt(cfg, lat), ContractError);
}

TEST_CASE("step from zero stays at zero")
{
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  FlowConfig cfg;
  FlowState s(Connection(lat, 2), cfg);
  CHECK(energy_identity_residual(s) == 0.0);
  s = step(std::move(s), cfg);
  CHECK(l2(s.connection()) == 0.0);
  CHECK(s.energy_integral() == 0.0);
  CHECK(s.steps() == 1u);
  CHECK(s.history().size() == 2u);
}

TEST_CASE("Euler step on an abelian mode")
{
  const Lattice lat = Lattice::cubic(2, 32, 1.0 / 32.0);
  FlowConfig cfg;
  const double dt = resolve_dt(cfg, lat);
  const Connection m = transverse_mode(lat, 1, 3, 0.1);
  FlowState s(m, cfg);
  s = step(std::move(s), cfg);
  const double factor = 1.0 - dt * symbol(lat, 3);
  for (Site x = 0; x < lat.site_count(); ++x)
    CHECK(std::abs(s.connection()(x, 1).coordinates()[0] - factor * m(x, 1).coordinates()[0]) <= 1e-13 * 0.1);
}

TEST_CASE("energy is monotone and the identity residual converges")
{
  const Lattice lat = Lattice::cubic(2, 8, 1.0 / 8.0);
  const Connection a0 = smooth_su2(lat, 1.0, 43);
  FlowConfig cfg;
  cfg.t_end = 0.02;
  double prev = energy(a0);
  FlowState s(a0, cfg);
  s = integrate(std::move(s), cfg, [&](const FlowState &st) {
    const double e = st.history().back().ym_energy;
    CHECK(e <= prev + 1e-12);
    prev = e;
  });
  CHECK(s.time() == doctest::Approx(0.02).epsilon(1e-14));

  std::vector<double> res;
  for (double dt : {2e-4, 1e-4, 5e-5})
  {
    FlowConfig c = cfg;
    c.dt = dt;
    res.push_back(energy_identity_residual(integrate(FlowState(a0, c), c)));
  }
  CHECK(std::log2(res[0] / res[1]) >= 0.9);
  CHECK(std::log2(res[1] / res[2]) >= 0.9);

  FlowConfig rk = cfg;
  rk.scheme = Scheme::rk4;
  std::vector<double> rres;
  for (double dt : {2e-4, 1e-4})
  {
    rk.dt = dt;
    rres.push_back(energy_identity_residual(integrate(FlowState(a0, rk), rk)));
  }
  CHECK(std::log2(rres[0] / rres[1]) >= 1.8);
}

TEST_CASE("stationary connections")
{
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  Connection c(lat, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    c(x, 0) = AlgebraElement::generator(2, 2) * 0.3;
    c(x, 1) = AlgebraElement::generator(2, 2) * -0.5;
  }
  FlowConfig cfg;
  FlowState s(c, cfg);
  s = step(std::move(s), cfg);
  CHECK(max_diff(s.connection(), c) <= 1e-13);
}

TEST_CASE("apply_gauge")
{
  std::mt19937_64 rng(44);
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  const Connection a = random_form<1>(lat, 2, rng);
  CHECK(apply_gauge(GaugeTransform(lat, 2), a) == a);

  GaugeTransform s1(lat, 2), s2(lat, 2);
  const lie::GroupElement g1 = lie::exp(random_algebra(rng, 2));
  const lie::GroupElement g2 = lie::exp(random_algebra(rng, 2));
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    s1(x) = g1;
    s2(x) = g2;
  }
  CHECK(l2(apply_gauge(s1, Connection(lat, 2))) == 0.0);
  const Connection lhs = apply_gauge(s2, apply_gauge(s1, a));
  const Connection rhs = apply_gauge(s1 * s2, a);
  CHECK(max_diff(lhs, rhs) < 1e-12);
  CHECK(std::abs(energy(apply_gauge(s1, a)) - energy(a)) <= 1e-13 * energy(a));

  // Abelian: a = A + du.
  const Connection ab = random_form<1>(lat, 1, rng);
  const Section u = random_form<0>(lat, 1, rng, 0.3);
  CHECK(max_diff(apply_gauge(GaugeTransform::exp(u), ab), ab + d(u)) < 1e-13);

  // Branch failure names the edge.
  GaugeTransform bad(lat, 2);
  bad(5) = lie::GroupElement::from_matrix(lie::Matrix::identity(2) * -1.0);
  try
  {
    apply_gauge(bad, a);
    FAIL("expected branch error");
  }
  catch (const ContractError &e)
  {
    CHECK(std::string(e.what()).find("edge") != std::string::npos);
  }
}

TEST_CASE("gauge covariance of curvature converges for smooth gauges")
{
  std::vector<double> err;
  for (int L : {8, 16, 32})
  {
    const Lattice lat = Lattice::cubic(2, L, 1.0 / L);
    const Connection a = smooth_su2(lat, 1.0, 45);
    Section u(lat, 2);
    for (Site x = 0; x < lat.site_count(); ++x)
    {
      const auto q = lat.coordinates(x);
      const double p0 = 2.0 * pi * q[0] / L, p1 = 2.0 * pi * q[1] / L;
      u(x, 0) = AlgebraElement::from_coordinates(2, {0.5 * std::sin(p0), 0.3 * std::cos(p1), 0.2 * std::sin(p0 + p1)});
    }
    const GaugeTransform s = GaugeTransform::exp(u);
    const TwoForm fa = curvature(a);
    TwoForm conj(lat, 2);
    for (Site x = 0; x < lat.site_count(); ++x)
      conj(x, 0) = lie::adjoint(s(x), fa(x, 0));
    err.push_back(l2(curvature(apply_gauge(s, a)) - conj) / l2(fa));
  }
  // First order: S sits at sites, F at plaquettes.
  CHECK(std::log2(err[0] / err[1]) >= 0.95);
  CHECK(std::log2(err[1] / err[2]) >= 0.95);
}

TEST_CASE("reconstruct_raw")
{
  std::mt19937_64 rng(46);
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  const Connection a = random_form<1>(lat, 2, rng);
  const auto out = reconstruct_raw({a, a}, {GaugeTransform(lat, 2), GaugeTransform(lat, 2)});
  CHECK(out[0] == a);
  CHECK_THROWS_AS(reconstruct_raw({a}, {}), ContractError);
}

TEST_CASE("DeTurck flow reconstructs the raw flow")
{
  const Lattice lat = Lattice::cubic(2, 8, 1.0 / 8.0);
  const Connection a0 = smooth_su2(lat, 0.5, 47);
  FlowConfig raw;
  raw.t_end = 0.01;
  FlowConfig dt = raw;
  dt.variant = Variant::deturck;
  const FlowState r = integrate(FlowState(a0, raw), raw);
  const FlowState q = integrate(FlowState(a0, dt), dt);
  CHECK(q.gauge().max_unitarity_defect() < lie::unitarity_tolerance);
  const Connection back = reconstruct_raw({q.connection()}, {q.gauge()})[0];
  CHECK(l2(back - r.connection()) / l2(r.connection()) < 0.05);
}

TEST_CASE("singular stop")
{
  std::mt19937_64 rng(48);
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  const Connection a = random_form<1>(lat, 2, rng, 1e3);
  FlowConfig cfg;
  cfg.t_end = 1.0;
  try
  {
    integrate(FlowState(a, cfg), cfg);
    FAIL("expected singular stop");
  }
  catch (const SingularStop &e)
  {
    CHECK(e.step() >= 1u);
    CHECK(e.site() < lat.site_count());
    CHECK(!(e.max_curvature() <= blowup_guard));
  }
}

TEST_CASE("diagnostic CSV")
{
  std::ostringstream out;
  write_csv_row(out, {3, 0.5, 1.25, 2.0, 0.0, 4.0, 0.0, 0.125});
  CHECK(out.str() == "3,0.5,1.25,2,0,4,0,0.125\n");
  CHECK(std::string(diagnostic_csv_header).find("step,t,ym_energy") == 0);
}
