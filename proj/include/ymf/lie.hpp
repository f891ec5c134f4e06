#pragma once

// Small-matrix kernels for the structure groups U(1) (rank 1) and SU(2)
// (rank 2): algebra and group elements, bracket, Killing-type inner product,
// exponential, logarithm and adjoint action.

#include <array>
#include <complex>
#include <cstdint>

#include "ymf/errors.hpp"

namespace ymf::lie {

using Complex = std::complex<double>;

/// Unitarity / determinant tolerance for group elements.
inline constexpr double unitarity_tolerance = 1e-12;

/// Minimal angular distance of an eigenvalue from -1 for which the principal
/// logarithm is still considered well defined.
inline constexpr double branch_tolerance = 1e-6;

namespace detail {

[[noreturn]] void throw_rank_mismatch(int a, int b, const char *op);
[[noreturn]] void throw_unsupported_rank(int rank);

inline void require_same_rank(int a, int b, const char *op)
{
  if (a != b) [[unlikely]]
    throw_rank_mismatch(a, b, op);
}

// Plain complex product; avoids the NaN/Inf recovery path of operator*.
inline Complex cmul(const Complex &a, const Complex &b)
{
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

} // namespace detail

/// Dense rank x rank complex matrix, rank in {1, 2}.
class Matrix
{
public:
  explicit Matrix(int rank = 1);

  static Matrix identity(int rank);

  int rank() const noexcept { return rank_; }

  Complex &operator()(int i, int j) noexcept { return e_[2 * i + j]; }
  const Complex &operator()(int i, int j) const noexcept { return e_[2 * i + j]; }

  Matrix &operator+=(const Matrix &o);
  Matrix &operator-=(const Matrix &o);
  Matrix &operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix &a, const Matrix &b);
  Matrix operator-() const;

  Matrix dagger() const;
  Complex trace() const;
  Complex determinant() const;
  double frobenius_norm() const;
  bool is_finite() const;

  friend bool operator==(const Matrix &a, const Matrix &b) = default;

private:
  int rank_;
  std::array<Complex, 4> e_{};
};

/// Element of u(1) (rank 1, purely imaginary) or su(2) (rank 2, anti-Hermitian
/// and traceless).
class AlgebraElement
{
public:
  explicit AlgebraElement(int rank = 1) : m_(rank) {}

  /// Wraps a matrix assumed to already lie in the algebra.
  static AlgebraElement from_matrix(const Matrix &m);

  /// Orthogonal generator number `a`: for rank 1 the element i, for rank 2
  /// tau_a = -(i/2) sigma_a with Pauli matrices sigma_1..3 (a = 0, 1, 2).
  static AlgebraElement generator(int rank, int a);

  /// Builds sum_a c[a] generator(a) from real coordinates.
  static AlgebraElement from_coordinates(int rank, const std::array<double, 3> &c);

  /// Real coordinates in the generator basis (only dimension(rank) are used).
  std::array<double, 3> coordinates() const;

  static int dimension(int rank) noexcept { return rank == 1 ? 1 : 3; }

  int rank() const noexcept { return m_.rank(); }
  const Matrix &matrix() const noexcept { return m_; }

  AlgebraElement &operator+=(const AlgebraElement &o);
  AlgebraElement &operator-=(const AlgebraElement &o);
  AlgebraElement &operator*=(double s);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement &b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement &b) { return a -= b; }
  friend AlgebraElement operator*(AlgebraElement a, double s) { return a *= s; }
  friend AlgebraElement operator*(double s, AlgebraElement a) { return a *= s; }
  AlgebraElement operator-() const;

  /// sqrt(inner(X, X)).
  double norm() const;

  friend bool operator==(const AlgebraElement &a, const AlgebraElement &b) = default;

private:
  Matrix m_;
};

/// Element of U(1) or SU(2).
class GroupElement
{
public:
  explicit GroupElement(int rank = 1) : m_(Matrix::identity(rank)) {}

  static GroupElement identity(int rank) { return GroupElement(rank); }

  /// Wraps a matrix assumed to already lie in the group.
  static GroupElement from_matrix(const Matrix &m);

  int rank() const noexcept { return m_.rank(); }
  const Matrix &matrix() const noexcept { return m_; }

  /// Inverse via the conjugate transpose.
  GroupElement inverse() const;

  friend GroupElement operator*(const GroupElement &a, const GroupElement &b);

  /// max(||U^dagger U - I||_F, |det U - 1|).
  double unitarity_defect() const;

  friend bool operator==(const GroupElement &a, const GroupElement &b) = default;

private:
  Matrix m_;
};

AlgebraElement bracket(const AlgebraElement &x, const AlgebraElement &y);

/// -trace(XY).
double inner(const AlgebraElement &x, const AlgebraElement &y);

inline Matrix::Matrix(int rank) : rank_(rank)
{
  if (rank != 1 && rank != 2) [[unlikely]]
    detail::throw_unsupported_rank(rank);
}

inline Matrix &Matrix::operator+=(const Matrix &o)
{
  detail::require_same_rank(rank_, o.rank_, "add");
  for (int k = 0; k < 4; ++k)
    e_[k] += o.e_[k];
  return *this;
}

inline Matrix &Matrix::operator-=(const Matrix &o)
{
  detail::require_same_rank(rank_, o.rank_, "subtract");
  for (int k = 0; k < 4; ++k)
    e_[k] -= o.e_[k];
  return *this;
}

inline Matrix &Matrix::operator*=(double s)
{
  for (auto &v : e_)
    v = Complex(v.real() * s, v.imag() * s);
  return *this;
}

inline Matrix operator*(const Matrix &a, const Matrix &b)
{
  using detail::cmul;
  detail::require_same_rank(a.rank_, b.rank_, "multiply");
  Matrix r(a.rank_);
  if (a.rank_ == 1)
  {
    r.e_[0] = cmul(a.e_[0], b.e_[0]);
    return r;
  }
  r.e_[0] = cmul(a.e_[0], b.e_[0]) + cmul(a.e_[1], b.e_[2]);
  r.e_[1] = cmul(a.e_[0], b.e_[1]) + cmul(a.e_[1], b.e_[3]);
  r.e_[2] = cmul(a.e_[2], b.e_[0]) + cmul(a.e_[3], b.e_[2]);
  r.e_[3] = cmul(a.e_[2], b.e_[1]) + cmul(a.e_[3], b.e_[3]);
  return r;
}

inline Matrix Matrix::operator-() const
{
  Matrix r(rank_);
  for (int k = 0; k < 4; ++k)
    r.e_[k] = -e_[k];
  return r;
}

inline AlgebraElement AlgebraElement::from_matrix(const Matrix &m)
{
  AlgebraElement x(m.rank());
  x.m_ = m;
  return x;
}

inline AlgebraElement &AlgebraElement::operator+=(const AlgebraElement &o)
{
  m_ += o.m_;
  return *this;
}

inline AlgebraElement &AlgebraElement::operator-=(const AlgebraElement &o)
{
  m_ -= o.m_;
  return *this;
}

inline AlgebraElement &AlgebraElement::operator*=(double s)
{
  m_ *= s;
  return *this;
}

inline AlgebraElement AlgebraElement::operator-() const
{
  return from_matrix(-m_);
}

inline GroupElement GroupElement::from_matrix(const Matrix &m)
{
  GroupElement u(m.rank());
  u.m_ = m;
  return u;
}

inline GroupElement operator*(const GroupElement &a, const GroupElement &b)
{
  return GroupElement::from_matrix(a.m_ * b.m_);
}

inline AlgebraElement bracket(const AlgebraElement &x, const AlgebraElement &y)
{
  detail::require_same_rank(x.rank(), y.rank(), "bracket");
  if (x.rank() == 1)
    return AlgebraElement(1);
  const Matrix &a = x.matrix();
  const Matrix &b = y.matrix();
  return AlgebraElement::from_matrix(a * b - b * a);
}

inline double inner(const AlgebraElement &x, const AlgebraElement &y)
{
  using detail::cmul;
  detail::require_same_rank(x.rank(), y.rank(), "inner");
  const Matrix &a = x.matrix();
  const Matrix &b = y.matrix();
  if (x.rank() == 1)
    return -cmul(a(0, 0), b(0, 0)).real();
  // -Re tr(AB), written out to skip the imaginary parts.
  const double t = cmul(a(0, 0), b(0, 0)).real() + cmul(a(0, 1), b(1, 0)).real()
                   + cmul(a(1, 0), b(0, 1)).real() + cmul(a(1, 1), b(1, 1)).real();
  return -t;
}

/// Matrix exponential by scaling and squaring of the truncated Taylor series.
GroupElement exp(const AlgebraElement &x);

/// Principal logarithm. Throws ContractError when an eigenvalue is within
/// branch_tolerance of -1.
AlgebraElement log(const GroupElement &u);

/// U^{-1} X U.
AlgebraElement adjoint(const GroupElement &u, const AlgebraElement &x);

/// Nearest group element by polar decomposition followed by a determinant
/// phase correction. Throws ContractError for (near) singular input.
GroupElement project_group(const Matrix &m);

/// (M - M^dagger)/2 minus its trace part.
AlgebraElement project_algebra(const Matrix &m);

} // namespace ymf::lie
