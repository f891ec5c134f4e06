#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "ymf/field/form.hpp"
#include "ymf/lie.hpp"

namespace ymf::testing {

using field::Form;
using field::Lattice;
using lie::AlgebraElement;
using lie::Complex;
using lie::GroupElement;
using lie::Matrix;

inline AlgebraElement random_algebra(std::mt19937_64 &rng, int rank, double scale = 1.0)
{
  std::normal_distribution<double> g(0.0, scale);
  return AlgebraElement::from_coordinates(rank, {g(rng), g(rng), g(rng)});
}

/// Coordinates are multiples of 2^-10 in [-1, 1], so sums and differences
/// with power-of-two spacings are exact.
inline AlgebraElement dyadic_algebra(std::mt19937_64 &rng, int rank)
{
  std::uniform_int_distribution<int> g(-1024, 1024);
  const double q = 1.0 / 1024.0;
  return AlgebraElement::from_coordinates(rank, {g(rng) * q, g(rng) * q, g(rng) * q});
}

template <int K>
Form<K> random_form(const Lattice &lat, int rank, std::mt19937_64 &rng, double scale = 1.0)
{
  Form<K> w(lat, rank);
  for (auto &v : w.values())
    v = random_algebra(rng, rank, scale);
  return w;
}

template <int K>
Form<K> dyadic_form(const Lattice &lat, int rank, std::mt19937_64 &rng)
{
  Form<K> w(lat, rank);
  for (auto &v : w.values())
    v = dyadic_algebra(rng, rank);
  return w;
}

inline field::GaugeTransform random_gauge(const Lattice &lat, int rank, std::mt19937_64 &rng, double scale)
{
  field::GaugeTransform s(lat, rank);
  for (auto &g : s.values())
    g = lie::exp(random_algebra(rng, rank, scale));
  return s;
}

/// Pauli-based generator written out by hand, independent of the library.
inline Matrix tau(int a)
{
  Matrix m(2);
  const Complex i(0.0, 1.0);
  switch (a)
  {
    case 0: m(0, 1) = -0.5 * i; m(1, 0) = -0.5 * i; break;
    case 1: m(0, 1) = -0.5; m(1, 0) = 0.5; break;
    default: m(0, 0) = -0.5 * i; m(1, 1) = 0.5 * i; break;
  }
  return m;
}

/// exp(theta n.tau) = cos(theta/2) I + 2 sin(theta/2) n.tau for unit n.
inline Matrix rodrigues(double theta, const std::array<double, 3> &n)
{
  Matrix m = Matrix::identity(2) * std::cos(0.5 * theta);
  for (int a = 0; a < 3; ++a)
    m += tau(a) * (2.0 * std::sin(0.5 * theta) * n[a]);
  return m;
}

inline double max_entry_diff(const Matrix &a, const Matrix &b)
{
  double m = 0.0;
  for (int i = 0; i < a.rank(); ++i)
    for (int j = 0; j < a.rank(); ++j)
      m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

template <int K>
double max_diff(const Form<K> &a, const Form<K> &b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, max_entry_diff(a.values()[i].matrix(), b.values()[i].matrix()));
  return m;
}

/// Plain double sum, used as an oracle for the compensated inner product.
template <int K>
double naive_inner(const Form<K> &a, const Form<K> &b)
{
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.values().size(); ++i)
  {
    const Matrix p = a.values()[i].matrix() * b.values()[i].matrix();
    s -= p.trace().real();
  }
  return static_cast<double>(s) * a.lattice().volume_element();
}

/// Smooth SU(2) connection built from a few low Fourier modes in the
/// first two coordinates, amplitude of order `amp`.
inline field::Connection smooth_su2(const Lattice &lat, double amp, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  field::Connection a(lat, 2);
  const int n = lat.dimension();
  std::vector<std::array<double, 4>> coeff;
  for (int mu = 0; mu < n; ++mu)
    for (int c = 0; c < 3; ++c)
      coeff.push_back({u(rng), u(rng), u(rng), u(rng)});
  for (field::Site x = 0; x < lat.site_count(); ++x)
  {
    const auto q = lat.coordinates(x);
    const double p0 = 2.0 * std::numbers::pi * q[0] / lat.extent(0);
    const double p1 = 2.0 * std::numbers::pi * q[1] / lat.extent(1);
    for (int mu = 0; mu < n; ++mu)
    {
      std::array<double, 3> c{};
      for (int j = 0; j < 3; ++j)
      {
        const auto &k = coeff[mu * 3 + j];
        c[j] = amp * (k[0] * std::sin(p0) + k[1] * std::cos(p1) + k[2] * std::sin(p0 + p1) + k[3] * std::cos(p0 - p1));
      }
      a(x, mu) = AlgebraElement::from_coordinates(2, c);
    }
  }
  return a;
}

} // namespace ymf::testing
