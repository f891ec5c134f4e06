#pragma once

#include <span>
#include <vector>

#include "ymf/field/lattice.hpp"
#include "ymf/lie.hpp"

namespace ymf::field {

using lie::AlgebraElement;
using lie::GroupElement;

/// Component layout of k-forms in dimension n: the sorted index sets of size
/// k, in lexicographic order, stored as bit masks.
struct FormLayout
{
  std::vector<unsigned> masks;
  std::array<int, 16> index_of_mask{}; ///< -1 when the mask has the wrong size

  int size() const noexcept { return static_cast<int>(masks.size()); }
};

const FormLayout &form_layout(int dimension, int degree);

/// Algebra-valued discrete k-form. Component I of degree k lives on the
/// k-cell spanned from site x by the axes in I. Storage is site-major with
/// the component index fastest.
template <int Degree>
class Form
{
public:
  static constexpr int degree = Degree;

  Form(const Lattice &lattice, int rank)
    : lattice_(lattice)
    , rank_(rank)
    , components_(form_layout(lattice.dimension(), Degree).size())
    , values_(lattice.site_count() * static_cast<std::size_t>(components_), AlgebraElement(rank))
  {}

  const Lattice &lattice() const noexcept { return lattice_; }
  int rank() const noexcept { return rank_; }
  int components() const noexcept { return components_; }
  const FormLayout &layout() const { return form_layout(lattice_.dimension(), Degree); }

  AlgebraElement &operator()(Site x, int c) noexcept { return values_[x * components_ + c]; }
  const AlgebraElement &operator()(Site x, int c) const noexcept { return values_[x * components_ + c]; }

  std::span<AlgebraElement> values() noexcept { return values_; }
  std::span<const AlgebraElement> values() const noexcept { return values_; }

  Form &operator+=(const Form &o)
  {
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] += o.values_[i];
    return *this;
  }
  Form &operator-=(const Form &o)
  {
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] -= o.values_[i];
    return *this;
  }
  Form &operator*=(double s)
  {
    for (auto &v : values_)
      v *= s;
    return *this;
  }
  /// this += s * o
  Form &axpy(double s, const Form &o)
  {
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] += o.values_[i] * s;
    return *this;
  }

  friend Form operator+(Form a, const Form &b) { return a += b; }
  friend Form operator-(Form a, const Form &b) { return a -= b; }
  friend Form operator*(Form a, double s) { return a *= s; }
  friend Form operator*(double s, Form a) { return a *= s; }

  friend bool operator==(const Form &a, const Form &b)
  {
    return a.lattice_ == b.lattice_ && a.rank_ == b.rank_ && a.values_ == b.values_;
  }

private:
  Lattice lattice_;
  int rank_;
  int components_;
  std::vector<AlgebraElement> values_;
};

using Section = Form<0>;
using OneForm = Form<1>;
using Connection = Form<1>;
using TwoForm = Form<2>;
using ThreeForm = Form<3>;

/// Group-valued field, one element per site.
class GaugeTransform
{
public:
  GaugeTransform(const Lattice &lattice, int rank)
    : lattice_(lattice), rank_(rank), values_(lattice.site_count(), GroupElement::identity(rank))
  {}

  const Lattice &lattice() const noexcept { return lattice_; }
  int rank() const noexcept { return rank_; }

  GroupElement &operator()(Site x) noexcept { return values_[x]; }
  const GroupElement &operator()(Site x) const noexcept { return values_[x]; }

  std::span<GroupElement> values() noexcept { return values_; }
  std::span<const GroupElement> values() const noexcept { return values_; }

  /// Pointwise inverse.
  GaugeTransform inverse() const;

  /// Pointwise exponential of a section.
  static GaugeTransform exp(const Section &u);

  /// max over sites of the unitarity defect.
  double max_unitarity_defect() const;

  friend bool operator==(const GaugeTransform &a, const GaugeTransform &b)
  {
    return a.lattice_ == b.lattice_ && a.rank_ == b.rank_ && a.values_ == b.values_;
  }

private:
  Lattice lattice_;
  int rank_;
  std::vector<GroupElement> values_;
};

/// Pointwise product (S1 S2)(x) = S1(x) S2(x).
GaugeTransform operator*(const GaugeTransform &a, const GaugeTransform &b);

} // namespace ymf::field
