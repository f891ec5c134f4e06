#include "ymf/field/form.hpp"

#include <algorithm>

namespace ymf::field {

namespace {

FormLayout build_layout(int dimension, int degree)
{
  FormLayout layout;
  layout.index_of_mask.fill(-1);
  if (degree < 0 || degree > dimension)
    return layout;
  // Lexicographic order of sorted index tuples, e.g. (0,1) (0,2) (1,2).
  std::vector<int> idx(static_cast<std::size_t>(degree));
  for (int k = 0; k < degree; ++k)
    idx[k] = k;
  while (true)
  {
    unsigned mask = 0;
    for (int v : idx)
      mask |= 1u << v;
    layout.index_of_mask[mask] = layout.size();
    layout.masks.push_back(mask);
    int k = degree - 1;
    while (k >= 0 && idx[k] == dimension - degree + k)
      --k;
    if (k < 0)
      break;
    ++idx[k];
    for (int j = k + 1; j < degree; ++j)
      idx[j] = idx[j - 1] + 1;
  }
  return layout;
}

} // namespace

const FormLayout &form_layout(int dimension, int degree)
{
  static const auto table = [] {
    std::array<std::array<FormLayout, max_dimension + 2>, max_dimension + 1> t;
    for (int n = 0; n <= max_dimension; ++n)
      for (int k = 0; k <= max_dimension + 1; ++k)
        t[n][k] = build_layout(n, k);
    return t;
  }();
  return table[dimension][degree];
}

GaugeTransform GaugeTransform::inverse() const
{
  GaugeTransform r(lattice_, rank_);
  for (Site x = 0; x < values_.size(); ++x)
    r.values_[x] = values_[x].inverse();
  return r;
}

GaugeTransform GaugeTransform::exp(const Section &u)
{
  GaugeTransform r(u.lattice(), u.rank());
  for (Site x = 0; x < u.lattice().site_count(); ++x)
    r(x) = lie::exp(u(x, 0));
  return r;
}

double GaugeTransform::max_unitarity_defect() const
{
  double m = 0.0;
  for (const auto &g : values_)
    m = std::max(m, g.unitarity_defect());
  return m;
}

GaugeTransform operator*(const GaugeTransform &a, const GaugeTransform &b)
{
  GaugeTransform r(a.lattice(), a.rank());
  for (Site x = 0; x < a.lattice().site_count(); ++x)
    r(x) = a(x) * b(x);
  return r;
}

} // namespace ymf::field
