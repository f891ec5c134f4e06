#include "ymf/field/norms.hpp"

#include <cmath>

#include "ymf/errors.hpp"
#include "ymf/field/operators.hpp"

namespace ymf::field {

template <int K>
double inner_product(const Form<K> &a, const Form<K> &b)
{
  if (!(a.lattice() == b.lattice()) || a.rank() != b.rank())
    throw ContractError("field", "inner_product", "incompatible fields");
  CompensatedSum s;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i)
    s.add(lie::inner(av[i], bv[i]));
  return a.lattice().volume_element() * s.value();
}

template <int K>
double pointwise_norm(const Form<K> &w, Site x)
{
  double s = 0.0;
  for (int c = 0; c < w.components(); ++c)
    s += lie::inner(w(x, c), w(x, c));
  return std::sqrt(s < 0.0 ? 0.0 : s);
}

template <int K>
double max_pointwise_norm(const Form<K> &w)
{
  double m = 0.0;
  for (Site x = 0; x < w.lattice().site_count(); ++x)
  {
    const double v = pointwise_norm(w, x);
    if (std::isnan(v))
      return v;
    m = std::max(m, v);
  }
  return m;
}

template <int K>
double l2(const Form<K> &w)
{
  return std::sqrt(std::max(0.0, inner_product(w, w)));
}

template <int K>
double lp_on(const Form<K> &w, const std::vector<Site> &sites, double p)
{
  if (!(p >= 1.0))
    throw ContractError("field", "lp", "p must be >= 1");
  CompensatedSum s;
  for (Site x : sites)
    s.add(std::pow(pointwise_norm(w, x), p));
  return std::pow(w.lattice().volume_element() * s.value(), 1.0 / p);
}

template <int K>
double lp(const Form<K> &w, double p)
{
  if (!(p >= 1.0))
    throw ContractError("field", "lp", "p must be >= 1");
  CompensatedSum s;
  for (Site x = 0; x < w.lattice().site_count(); ++x)
    s.add(std::pow(pointwise_norm(w, x), p));
  return std::pow(w.lattice().volume_element() * s.value(), 1.0 / p);
}

template <int K>
double l2_on(const Form<K> &w, const std::vector<Site> &sites)
{
  CompensatedSum s;
  for (Site x : sites)
    for (int c = 0; c < w.components(); ++c)
      s.add(lie::inner(w(x, c), w(x, c)));
  return std::sqrt(std::max(0.0, w.lattice().volume_element() * s.value()));
}

template <int K>
double w12(const Form<K> &w)
{
  double s = inner_product(w, w);
  for (const auto &g : gradient(w))
    s += inner_product(g, g);
  return std::sqrt(std::max(0.0, s));
}

template <int K>
double w12_on(const Form<K> &w, const std::vector<Site> &sites)
{
  double s = std::pow(l2_on(w, sites), 2);
  for (const auto &g : gradient(w))
    s += std::pow(l2_on(g, sites), 2);
  return std::sqrt(s);
}

template <int K>
double local_lp(const Form<K> &w, const BallPatch &patch, double p)
{
  if (!(patch.lattice() == w.lattice()))
    throw ContractError("field", "local_lp", "patch and field live on different lattices");
  if (patch.interior().empty())
    throw ContractError("field", "local_lp", "empty patch interior");
  return lp_on(w, patch.interior(), p);
}

#define YMF_NORMS_INSTANTIATE(K)                                                    \
  template double inner_product<K>(const Form<K> &, const Form<K> &);               \
  template double pointwise_norm<K>(const Form<K> &, Site);                         \
  template double max_pointwise_norm<K>(const Form<K> &);                           \
  template double l2<K>(const Form<K> &);                                           \
  template double lp<K>(const Form<K> &, double);                                   \
  template double local_lp<K>(const Form<K> &, const BallPatch &, double);          \
  template double l2_on<K>(const Form<K> &, const std::vector<Site> &);             \
  template double lp_on<K>(const Form<K> &, const std::vector<Site> &, double);

YMF_NORMS_INSTANTIATE(0)
YMF_NORMS_INSTANTIATE(1)
YMF_NORMS_INSTANTIATE(2)
YMF_NORMS_INSTANTIATE(3)
YMF_NORMS_INSTANTIATE(4)

template double w12<0>(const Form<0> &);
template double w12<1>(const Form<1> &);
template double w12<2>(const Form<2> &);
template double w12_on<0>(const Form<0> &, const std::vector<Site> &);
template double w12_on<1>(const Form<1> &, const std::vector<Site> &);
template double w12_on<2>(const Form<2> &, const std::vector<Site> &);

#undef YMF_NORMS_INSTANTIATE

} // namespace ymf::field
