#include "ymf/lie.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ymf::lie {

void detail::throw_rank_mismatch(int a, int b, const char *op)
{
  throw ContractError("lie", op, "rank mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

void detail::throw_unsupported_rank(int rank)
{
  throw ContractError("lie", "Matrix", "unsupported rank " + std::to_string(rank));
}

using detail::cmul;
using detail::require_same_rank;

// ---------------------------------------------------------------- Matrix

Matrix Matrix::identity(int rank)
{
  Matrix m(rank);
  m(0, 0) = 1.0;
  if (rank == 2)
    m(1, 1) = 1.0;
  return m;
}

Matrix Matrix::dagger() const
{
  Matrix r(rank_);
  r.e_[0] = std::conj(e_[0]);
  if (rank_ == 2)
  {
    r.e_[1] = std::conj(e_[2]);
    r.e_[2] = std::conj(e_[1]);
    r.e_[3] = std::conj(e_[3]);
  }
  return r;
}

Complex Matrix::trace() const
{
  return rank_ == 1 ? e_[0] : e_[0] + e_[3];
}

Complex Matrix::determinant() const
{
  return rank_ == 1 ? e_[0] : cmul(e_[0], e_[3]) - cmul(e_[1], e_[2]);
}

double Matrix::frobenius_norm() const
{
  double s = 0.0;
  for (const auto &v : e_)
    s += std::norm(v);
  return std::sqrt(s);
}

bool Matrix::is_finite() const
{
  for (const auto &v : e_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      return false;
  return true;
}

// -------------------------------------------------------- AlgebraElement

AlgebraElement AlgebraElement::generator(int rank, int a)
{
  AlgebraElement x(rank);
  if (rank == 1)
  {
    if (a != 0)
      throw ContractError("lie", "generator", "u(1) has a single generator");
    x.m_(0, 0) = Complex(0.0, 1.0);
    return x;
  }
  switch (a)
  {
    case 0:
      x.m_(0, 1) = Complex(0.0, -0.5);
      x.m_(1, 0) = Complex(0.0, -0.5);
      break;
    case 1:
      x.m_(0, 1) = Complex(-0.5, 0.0);
      x.m_(1, 0) = Complex(0.5, 0.0);
      break;
    case 2:
      x.m_(0, 0) = Complex(0.0, -0.5);
      x.m_(1, 1) = Complex(0.0, 0.5);
      break;
    default:
      throw ContractError("lie", "generator", "su(2) generator index out of range");
  }
  return x;
}

AlgebraElement AlgebraElement::from_coordinates(int rank, const std::array<double, 3> &c)
{
  AlgebraElement x(rank);
  if (rank == 1)
  {
    x.m_(0, 0) = Complex(0.0, c[0]);
    return x;
  }
  x.m_(0, 0) = Complex(0.0, -0.5 * c[2]);
  x.m_(1, 1) = Complex(0.0, 0.5 * c[2]);
  x.m_(0, 1) = Complex(-0.5 * c[1], -0.5 * c[0]);
  x.m_(1, 0) = Complex(0.5 * c[1], -0.5 * c[0]);
  return x;
}

std::array<double, 3> AlgebraElement::coordinates() const
{
  if (rank() == 1)
    return {m_(0, 0).imag(), 0.0, 0.0};
  return {-(m_(0, 1).imag() + m_(1, 0).imag()),
          m_(1, 0).real() - m_(0, 1).real(),
          m_(1, 1).imag() - m_(0, 0).imag()};
}

double AlgebraElement::norm() const
{
  return std::sqrt(std::max(0.0, inner(*this, *this)));
}

// ---------------------------------------------------------- GroupElement

GroupElement GroupElement::inverse() const
{
  return from_matrix(m_.dagger());
}

double GroupElement::unitarity_defect() const
{
  const double u = (m_.dagger() * m_ - Matrix::identity(rank())).frobenius_norm();
  if (rank() == 1)
    return u;
  return std::max(u, std::abs(m_.determinant() - 1.0));
}

// ------------------------------------------------------------ operations

GroupElement exp(const AlgebraElement &x)
{
  const int rank = x.rank();
  Matrix y = x.matrix();
  if (!y.is_finite())
    throw ContractError("lie", "exp", "non-finite argument");

  int squarings = 0;
  double nrm = y.frobenius_norm();
  while (nrm > 0.5)
  {
    nrm *= 0.5;
    ++squarings;
  }
  y *= std::ldexp(1.0, -squarings);

  // Horner evaluation of sum_{k<=16} y^k / k!.
  constexpr int degree = 16;
  const Matrix id = Matrix::identity(rank);
  Matrix p = id;
  for (int k = degree; k >= 1; --k)
    p = id + (y * p) * (1.0 / k);

  for (int s = 0; s < squarings; ++s)
    p = p * p;
  return GroupElement::from_matrix(p);
}

AlgebraElement log(const GroupElement &u)
{
  const Matrix &m = u.matrix();
  if (u.rank() == 1)
  {
    const double theta = std::arg(m(0, 0));
    if (std::numbers::pi - std::abs(theta) < branch_tolerance)
    {
      std::ostringstream msg;
      msg << "log undefined: eigenvalue angle " << theta << " is on the branch cut";
      throw ContractError("lie", "log", msg.str());
    }
    return AlgebraElement::from_coordinates(1, {theta, 0.0, 0.0});
  }

  const AlgebraElement v = project_algebra(m);
  const double c = 0.5 * m.trace().real();
  const double s = v.norm() / std::numbers::sqrt2;
  const double phi = std::atan2(s, c);
  if (std::numbers::pi - phi < branch_tolerance)
  {
    std::ostringstream msg;
    msg << "log undefined: eigenvalue angle " << phi << " is within " << branch_tolerance << " of pi";
    throw ContractError("lie", "log", msg.str());
  }
  const double factor = s > 0.0 ? phi / s : 1.0;
  return v * factor;
}

AlgebraElement adjoint(const GroupElement &u, const AlgebraElement &x)
{
  require_same_rank(u.rank(), x.rank(), "adjoint");
  if (u.rank() == 1)
    return x;
  const Matrix &m = u.matrix();
  return project_algebra(m.dagger() * x.matrix() * m);
}

GroupElement project_group(const Matrix &m)
{
  const int rank = m.rank();
  const double scale = m.frobenius_norm();
  if (!m.is_finite() || std::abs(m.determinant()) <= 1e-14 * std::max(1.0, scale * scale))
    throw ContractError("lie", "project_group", "polar decomposition of a singular matrix");

  if (rank == 1)
  {
    Matrix r(1);
    r(0, 0) = m(0, 0) / std::abs(m(0, 0));
    return GroupElement::from_matrix(r);
  }

  // Newton iteration for the unitary polar factor.
  Matrix q = m;
  for (int it = 0; it < 100; ++it)
  {
    const Complex det = q.determinant();
    if (std::abs(det) <= 1e-300)
      throw ContractError("lie", "project_group", "polar iteration became singular");
    Matrix inv(2);
    inv(0, 0) = q(1, 1) / det;
    inv(0, 1) = -q(0, 1) / det;
    inv(1, 0) = -q(1, 0) / det;
    inv(1, 1) = q(0, 0) / det;
    Matrix next = (q + inv.dagger()) * 0.5;
    const double change = (next - q).frobenius_norm();
    q = next;
    if (change <= 1e-16)
      break;
  }

  // Remove the determinant phase.
  const double alpha = std::arg(q.determinant());
  const Complex phase = std::polar(1.0, -0.5 * alpha);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      q(i, j) = cmul(q(i, j), phase);
  return GroupElement::from_matrix(q);
}

AlgebraElement project_algebra(const Matrix &m)
{
  Matrix a(m.rank());
  if (m.rank() == 1)
  {
    a(0, 0) = Complex(0.0, m(0, 0).imag());
    return AlgebraElement::from_matrix(a);
  }
  // Anti-Hermitian part with its trace removed; written so that the result is
  // exactly anti-Hermitian and traceless, and the map is idempotent.
  const double d = 0.5 * (m(0, 0).imag() - m(1, 1).imag());
  a(0, 0) = Complex(0.0, d);
  a(1, 1) = Complex(0.0, -d);
  a(0, 1) = 0.5 * (m(0, 1) - std::conj(m(1, 0)));
  a(1, 0) = -std::conj(a(0, 1));
  return AlgebraElement::from_matrix(a);
}

} // namespace ymf::lie
