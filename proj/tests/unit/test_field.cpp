#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"
#include "ymf/field/patch.hpp"
#include "ymf/field/snapshot.hpp"

using namespace ymf;
using namespace ymf::field;
using namespace ymf::testing;

namespace {

constexpr double pi = std::numbers::pi;

AlgebraElement tau3()
{
  return AlgebraElement::generator(2, 2);
}

template <int K>
bool all_zero(const Form<K> &w)
{
  for (const auto &v : w.values())
    if (!(v == AlgebraElement(w.rank())))
      return false;
  return true;
}

} // namespace

TEST_CASE("lattice validation and wrapping")
{
  CHECK_THROWS_AS(Lattice(1, {8}, 1.0), ContractError);
  CHECK_THROWS_AS(Lattice(5, {4, 4, 4, 4, 4}, 1.0), ContractError);
  CHECK_THROWS_AS(Lattice(2, {8, 7}, 1.0), ContractError);
  CHECK_THROWS_AS(Lattice(2, {2, 8}, 1.0), ContractError);
  CHECK_THROWS_AS(Lattice(2, {8, 8}, 0.0), ContractError);
  CHECK_THROWS_AS(Lattice(2, {8, 8, 8}, 1.0), ContractError);

  const Lattice lat(3, {4, 6, 8}, 0.5);
  CHECK(lat.site_count() == 4u * 6u * 8u);
  CHECK(lat.volume_element() == 0.125);
  CHECK(lat.min_extent() == 4);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    CHECK(lat.site(lat.coordinates(x)) == x);
    for (int mu = 0; mu < 3; ++mu)
    {
      CHECK(lat.backward(lat.forward(x, mu), mu) == x);
      Site y = x;
      for (int k = 0; k < lat.extent(mu); ++k)
        y = lat.forward(y, mu);
      CHECK(y == x);
    }
  }
  // Axis 0 fastest.
  CHECK(lat.coordinates(1)[0] == 1);
  CHECK(lat.coordinates(4)[1] == 1);
  const Coordinates d = lat.displacement(lat.site({0, 0, 0, 0}), lat.site({3, 5, 4, 0}));
  CHECK(d[0] == -1);
  CHECK(d[1] == -1);
  CHECK(std::abs(d[2]) == 4);
}

TEST_CASE("form layout is lexicographic")
{
  const FormLayout &l = form_layout(4, 2);
  REQUIRE(l.size() == 6);
  const unsigned expect[] = {0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100};
  for (int c = 0; c < 6; ++c)
  {
    CHECK(l.masks[c] == expect[c]);
    CHECK(l.index_of_mask[expect[c]] == c);
  }
  CHECK(form_layout(3, 3).size() == 1);
  CHECK(form_layout(2, 0).size() == 1);
}

TEST_CASE("d of a constant section vanishes")
{
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  Section s(lat, 2);
  for (auto &v : s.values())
    v = tau3() * 0.7;
  CHECK(all_zero(d(s)));
}

TEST_CASE("d o d = 0 bit-exactly")
{
  std::mt19937_64 rng(21);
  for (int n : {2, 3, 4})
  {
    const Lattice lat = Lattice::cubic(n, n == 4 ? 4 : 6, 0.125);
    for (int rank : {1, 2})
    {
      CHECK(all_zero(d(d(dyadic_form<0>(lat, rank, rng)))));
      CHECK(all_zero(d(d(dyadic_form<1>(lat, rank, rng)))));
      if (n >= 4)
        CHECK(all_zero(d(d(dyadic_form<2>(lat, rank, rng)))));
      CHECK(all_zero(d_star(d_star(dyadic_form<2>(lat, rank, rng)))));
    }
  }
}

TEST_CASE("d on a single Fourier mode")
{
  const int L = 16;
  const double h = 0.1;
  const Lattice lat = Lattice::cubic(2, L, h);
  const double theta = 2.0 * pi / L;
  Section s(lat, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
    s(x, 0) = tau3() * std::sin(theta * lat.coordinates(x)[0]);
  const OneForm ds = d(s);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    const int j = lat.coordinates(x)[0];
    const std::complex<double> e = std::exp(std::complex<double>(0.0, theta * j));
    const double expect = (e * (std::exp(std::complex<double>(0.0, theta)) - 1.0) / h).imag();
    CHECK(ds(x, 0).coordinates()[2] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(ds(x, 1).norm() == 0.0);
  }
}

TEST_CASE("d_star d on a Fourier mode is the Laplacian symbol")
{
  const Lattice lat(3, {8, 6, 4}, 0.3);
  const std::array<int, 3> k{1, 2, 1};
  double lambda = 0.0;
  for (int mu = 0; mu < 3; ++mu)
  {
    const double s = std::sin(pi * k[mu] / lat.extent(mu));
    lambda += 4.0 / (0.09) * s * s;
  }
  Section s(lat, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    const auto c = lat.coordinates(x);
    double phase = 0.0;
    for (int mu = 0; mu < 3; ++mu)
      phase += 2.0 * pi * k[mu] * c[mu] / lat.extent(mu);
    s(x, 0) = tau3() * std::cos(phase);
  }
  const Section r = d_star(d(s));
  for (Site x = 0; x < lat.site_count(); ++x)
    CHECK(std::abs(r(x, 0).coordinates()[2] - lambda * s(x, 0).coordinates()[2]) < 1e-11 * lambda);
}

TEST_CASE("d_star of a constant one-form vanishes")
{
  const Lattice lat = Lattice::cubic(3, 4, 0.5);
  OneForm w(lat, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
    for (int mu = 0; mu < 3; ++mu)
      w(x, mu) = AlgebraElement::generator(2, mu) * (mu + 1.0);
  CHECK(all_zero(d_star(w)));
}

TEST_CASE("adjointness of d and d_star")
{
  std::mt19937_64 rng(22);
  for (int n : {2, 3, 4})
  {
    const Lattice lat = Lattice::cubic(n, n == 4 ? 4 : 8, 0.37);
    for (int trial = 0; trial < 5; ++trial)
    {
      const Section s = random_form<0>(lat, 2, rng);
      const OneForm w = random_form<1>(lat, 2, rng);
      const TwoForm f = random_form<2>(lat, 2, rng);
      const double a1 = naive_inner(d(s), w);
      const double b1 = naive_inner(s, d_star(w));
      CHECK(std::abs(a1 - b1) <= 1e-13 * l2(d(s)) * l2(w));
      const double a2 = naive_inner(d(w), f);
      const double b2 = naive_inner(w, d_star(f));
      CHECK(std::abs(a2 - b2) <= 1e-13 * l2(d(w)) * l2(f));
    }
  }
}

TEST_CASE("adjointness of the covariant operators")
{
  std::mt19937_64 rng(23);
  for (int n : {2, 3, 4})
  {
    const Lattice lat = Lattice::cubic(n, 4, 0.5);
    for (int trial = 0; trial < 5; ++trial)
    {
      const Connection a = random_form<1>(lat, 2, rng);
      const Section s = random_form<0>(lat, 2, rng);
      const OneForm w = random_form<1>(lat, 2, rng);
      const TwoForm f = random_form<2>(lat, 2, rng);
      CHECK(std::abs(naive_inner(cov_d(a, s), w) - naive_inner(s, cov_d_star(a, w)))
            <= 1e-13 * l2(cov_d(a, s)) * l2(w));
      CHECK(std::abs(naive_inner(cov_d(a, w), f) - naive_inner(w, cov_d_star(a, f)))
            <= 1e-13 * l2(cov_d(a, w)) * l2(f));
      if (n >= 3)
      {
        const ThreeForm g = random_form<3>(lat, 2, rng);
        CHECK(std::abs(naive_inner(cov_d(a, f), g) - naive_inner(f, cov_d_star(a, g)))
              <= 1e-13 * l2(cov_d(a, f)) * l2(g));
      }
    }
  }
}

TEST_CASE("covariant operators with zero or abelian connection")
{
  std::mt19937_64 rng(24);
  const Lattice lat = Lattice::cubic(2, 8, 0.5);
  const Section s = random_form<0>(lat, 2, rng);
  const OneForm w = random_form<1>(lat, 2, rng);
  const Connection zero(lat, 2);
  CHECK(cov_d(zero, s) == d(s));
  CHECK(all_zero(cov_d(random_form<1>(lat, 2, rng), Section(lat, 2))));
  CHECK(cov_d_star(zero, w) == d_star(w));

  const Connection ab = random_form<1>(lat, 1, rng);
  const Section s1 = random_form<0>(lat, 1, rng);
  const TwoForm f1 = random_form<2>(lat, 1, rng);
  CHECK(cov_d(ab, s1) == d(s1));
  CHECK(cov_d_star(ab, f1) == d_star(f1));

  CHECK_THROWS_AS(cov_d(ab, s), ContractError);
  CHECK_THROWS_AS(cov_d(Connection(Lattice::cubic(2, 4, 0.5), 2), s), ContractError);
}

TEST_CASE("curvature")
{
  const Lattice lat = Lattice::cubic(2, 8, 0.25);
  CHECK(all_zero(curvature(Connection(lat, 2))));

  // Constant non-commuting connection.
  Connection c(lat, 2);
  const AlgebraElement a1 = AlgebraElement::generator(2, 0) * 0.3;
  const AlgebraElement a2 = AlgebraElement::generator(2, 1) * 0.7;
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    c(x, 0) = a1;
    c(x, 1) = a2;
  }
  const TwoForm f = curvature(c);
  const lie::Matrix expect = a1.matrix() * a2.matrix() - a2.matrix() * a1.matrix();
  for (Site x = 0; x < lat.site_count(); ++x)
    CHECK(max_entry_diff(f(x, 0).matrix(), expect) < 1e-16);

  // Abelian single mode.
  const int L = 8;
  const double h = 0.25;
  Connection m(lat, 2);
  const auto val = [&](int j) { return std::sin(2.0 * pi * (j * h) / (L * h)); };
  for (Site x = 0; x < lat.site_count(); ++x)
    m(x, 0) = tau3() * val(lat.coordinates(x)[1]);
  const TwoForm fm = curvature(m);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    const int j = lat.coordinates(x)[1];
    CHECK(fm(x, 0).coordinates()[2] == doctest::Approx(-(val(j + 1) - val(j)) / h).epsilon(1e-12));
  }

  // Rank 1 reduces to dA exactly.
  std::mt19937_64 rng(25);
  const Connection ab = random_form<1>(lat, 1, rng);
  CHECK(curvature(ab) == d(ab));
}

TEST_CASE("cov_d on one-forms linearizes curvature")
{
  std::mt19937_64 rng(26);
  const Lattice lat = Lattice::cubic(3, 4, 0.5);
  const Connection a = random_form<1>(lat, 2, rng, 0.5);
  const OneForm w = random_form<1>(lat, 2, rng);
  const double eps = 1e-5;
  Connection ap = a;
  ap.axpy(eps, w);
  Connection am = a;
  am.axpy(-eps, w);
  TwoForm fd = curvature(ap) - curvature(am);
  fd *= 1.0 / (2.0 * eps);
  CHECK(max_diff(fd, cov_d(a, w)) < 1e-8);
}

TEST_CASE("curvature is exactly covariant under site-constant gauge")
{
  std::mt19937_64 rng(27);
  const Lattice lat = Lattice::cubic(2, 8, 0.5);
  const Connection a = random_form<1>(lat, 2, rng);
  const lie::GroupElement u = lie::exp(random_algebra(rng, 2));
  Connection b(lat, 2);
  for (std::size_t i = 0; i < a.values().size(); ++i)
    b.values()[i] = lie::adjoint(u, a.values()[i]);
  const TwoForm fa = curvature(a);
  const TwoForm fb = curvature(b);
  for (std::size_t i = 0; i < fa.values().size(); ++i)
    CHECK(max_entry_diff(fb.values()[i].matrix(), lie::adjoint(u, fa.values()[i]).matrix()) < 1e-13);
}

TEST_CASE("rough Laplacian and Hodge Laplacian agree on abelian forms")
{
  std::mt19937_64 rng(28);
  const Lattice lat = Lattice::cubic(3, 6, 0.5);
  const TwoForm f = random_form<2>(lat, 1, rng);
  TwoForm hodge = d(d_star(f)) + d_star(d(f));
  CHECK(max_diff(hodge, rough_laplacian(f)) < 1e-12);
  const OneForm w = random_form<1>(lat, 1, rng);
  CHECK(max_diff(d(d_star(w)) + d_star(d(w)), rough_laplacian(w)) < 1e-12);
}

TEST_CASE("norms")
{
  const Lattice lat = Lattice::cubic(2, 8, 0.5);
  CHECK(l2(Connection(lat, 2)) == 0.0);

  Section c(lat, 2);
  for (auto &v : c.values())
    v = tau3() * 3.0;
  const double volume = 16.0;
  const double cn = (tau3() * 3.0).norm();
  for (double p : {1.0, 2.0, 3.0, 4.5})
    CHECK(lp(c, p) == doctest::Approx(cn * std::pow(volume, 1.0 / p)).epsilon(1e-14));
  CHECK_THROWS_AS(lp(c, 0.5), ContractError);

  std::mt19937_64 rng(29);
  const TwoForm f = random_form<2>(Lattice::cubic(3, 6, 0.3), 2, rng);
  CHECK(lp(f, 2.0) == doctest::Approx(l2(f)).epsilon(1e-14));

  const Section s = random_form<0>(lat, 2, rng);
  CHECK(w12(s) == doctest::Approx(std::sqrt(std::pow(l2(s), 2) + std::pow(l2(d(s)), 2))).epsilon(1e-14));

  const BallPatch p(lat, 0, 1.0);
  CHECK(local_lp(c, p, 2.0) == doctest::Approx(cn * std::sqrt(p.interior_volume())).epsilon(1e-14));
  CHECK_THROWS_AS(local_lp(Section(Lattice::cubic(2, 4, 0.5), 2), p, 2.0), ContractError);

  Section nan_field(lat, 2);
  nan_field(3, 0) = AlgebraElement::from_coordinates(2, {std::nan(""), 0.0, 0.0});
  CHECK(std::isnan(max_pointwise_norm(nan_field)));
}

TEST_CASE("compensated inner product matches a long double oracle")
{
  std::mt19937_64 rng(30);
  const Lattice lat = Lattice::cubic(4, 6, 0.7);
  const OneForm a = random_form<1>(lat, 2, rng);
  const OneForm b = random_form<1>(lat, 2, rng);
  CHECK(inner_product(a, b) == doctest::Approx(naive_inner(a, b)).epsilon(1e-13));
}

TEST_CASE("ball patch")
{
  const Lattice lat = Lattice::cubic(2, 16, 0.25);
  const Site c = lat.site({8, 8, 0, 0});
  const BallPatch p(lat, c, 0.5);
  // r = 2 lattice units: 13 interior sites (|dx|^2 + |dy|^2 <= 4).
  CHECK(p.interior().size() == 13u);
  CHECK(p.is_interior(c));
  std::set<Site> boundary(p.boundary().begin(), p.boundary().end());
  CHECK(boundary.size() == p.boundary().size());
  for (Site b : p.boundary())
  {
    bool adjacent = false;
    for (int mu = 0; mu < 2; ++mu)
      adjacent = adjacent || p.is_interior(lat.forward(b, mu)) || p.is_interior(lat.backward(b, mu));
    CHECK(adjacent);
    CHECK(p.classify(b) == SiteClass::boundary);
  }
  for (const BoundaryFace &f : p.faces())
  {
    CHECK(p.is_interior(f.interior));
    CHECK(p.classify(f.boundary) == SiteClass::boundary);
    const Site nb = f.sign > 0 ? lat.forward(f.interior, f.axis) : lat.backward(f.interior, f.axis);
    CHECK(nb == f.boundary);
  }

  CHECK_THROWS_AS(BallPatch(lat, c, 0.0), ContractError);
  CHECK_THROWS_AS(BallPatch(lat, c, 2.5), ContractError);
  CHECK_NOTHROW(BallPatch(lat, c, 2.0));
  CHECK_THROWS_AS(BallPatch(lat, lat.site_count(), 1.0), ContractError);
}

TEST_CASE("restrict and normal_component")
{
  const Lattice lat = Lattice::cubic(2, 12, 0.5);
  const BallPatch p(lat, lat.site({6, 6, 0, 0}), 1.5);
  std::mt19937_64 rng(31);
  const OneForm w = random_form<1>(lat, 2, rng);
  const OneForm r = restrict(w, p);
  for (Site x = 0; x < lat.site_count(); ++x)
    for (int mu = 0; mu < 2; ++mu)
      CHECK(r(x, mu) == (p.in_closure(x) ? w(x, mu) : AlgebraElement(2)));
  CHECK(all_zero(restrict(OneForm(lat, 2), p)));

  // Tangential field: zero normal component.
  OneForm t(lat, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
    t(x, 0) = tau3();
  for (const BoundaryFace &f : p.faces())
    if (f.axis == 1)
      CHECK(normal_component(t, p)[&f - p.faces().data()] == AlgebraElement(2));

  // s vanishing outside the patch: normal component of ds is a one-sided difference.
  Section s(lat, 2);
  for (Site x : p.interior())
    s(x, 0) = random_algebra(rng, 2);
  const auto nc = normal_component(d(s), p);
  for (std::size_t k = 0; k < p.faces().size(); ++k)
  {
    const BoundaryFace &f = p.faces()[k];
    const AlgebraElement expect = s(f.interior, 0) * (-1.0 / lat.spacing());
    CHECK(max_entry_diff(nc[k].matrix(), expect.matrix()) < 1e-15);
  }
}

TEST_CASE("snapshot roundtrip is byte-identical")
{
  std::mt19937_64 rng(32);
  const Lattice lat(3, {4, 6, 4}, 0.125);
  const std::vector<SnapshotField> fields = {random_form<1>(lat, 2, rng), random_form<0>(lat, 1, rng),
                                             random_form<2>(lat, 2, rng), random_gauge(lat, 2, rng, 1.0)};
  for (const auto &f : fields)
  {
    const std::string b1 = encode_snapshot(f);
    const SnapshotField g = decode_snapshot(b1);
    CHECK(kind_of(g) == kind_of(f));
    CHECK(g == f);
    CHECK(encode_snapshot(g) == b1);
  }
}

TEST_CASE("snapshot header layout")
{
  const Lattice lat = Lattice::cubic(2, 4, 0.5);
  Section s(lat, 1);
  s(1, 0) = AlgebraElement::generator(1, 0);
  const std::string b = encode_snapshot(s);
  CHECK(b.substr(0, 4) == "YMF1");
  CHECK(b.size() == 4u + 4u + 8u + 8u + 4u + 1u + 16u * 16u);
  CHECK(static_cast<unsigned char>(b[4]) == 2u);
  CHECK(static_cast<unsigned char>(b[28]) == 1u); // kind byte
  // Site 1, the only nonzero value, is i: re = 0, im = 1.0.
  double im;
  std::memcpy(&im, b.data() + 29 + 16 + 8, 8);
  CHECK(im == 1.0);
}

TEST_CASE("snapshot errors")
{
  CHECK_THROWS_AS(decode_snapshot("XMF1"), ContractError);
  const Lattice lat = Lattice::cubic(2, 4, 0.5);
  std::string b = encode_snapshot(Section(lat, 2));
  CHECK_THROWS_AS(decode_snapshot(b.substr(0, b.size() - 3)), ContractError);
  b[28] = 9;
  CHECK_THROWS_AS(decode_snapshot(b), ContractError);
}
