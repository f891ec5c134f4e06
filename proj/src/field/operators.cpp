#include "ymf/field/operators.hpp"

#include <bit>

#include "ymf/errors.hpp"

namespace ymf::field {

namespace {

using lie::bracket;

void require_compatible(const Lattice &a, const Lattice &b, int ra, int rb, const char *op)
{
  if (!(a == b))
    throw ContractError("field", op, "fields live on different lattices");
  if (ra != rb)
    throw ContractError("field", op, "group rank mismatch");
}

/// Average of A_i over the edges parallel to axis i of the cell at x spanned
/// by the axes in `others`.
AlgebraElement averaged_edge(const Connection &a, Site x, int i, unsigned others)
{
  const Lattice &lat = a.lattice();
  AlgebraElement sum(a.rank());
  int count = 0;
  // Enumerate all subsets of `others`.
  unsigned t = others;
  while (true)
  {
    sum += a(lat.shift(x, t), i);
    ++count;
    if (t == 0)
      break;
    t = (t - 1) & others;
  }
  return count == 1 ? sum : sum * (1.0 / count);
}

int position_in(unsigned mask, int axis)
{
  return std::popcount(mask & ((1u << axis) - 1u));
}

template <int K, bool Covariant>
Form<K + 1> coboundary(const Connection *a, const Form<K> &w)
{
  const Lattice &lat = w.lattice();
  const int n = lat.dimension();
  const double inv_h = 1.0 / lat.spacing();
  Form<K + 1> out(lat, w.rank());
  const FormLayout &src_layout = form_layout(n, K);
  const FormLayout &dst_layout = form_layout(n, K + 1);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    for (int c = 0; c < dst_layout.size(); ++c)
    {
      const unsigned mask = dst_layout.masks[c];
      AlgebraElement acc(w.rank());
      int j = 0;
      for (int i = 0; i < n; ++i)
      {
        if (!(mask & (1u << i)))
          continue;
        const unsigned rest = mask & ~(1u << i);
        const int sc = src_layout.index_of_mask[rest];
        const Site xi = lat.forward(x, i);
        AlgebraElement term = (w(xi, sc) - w(x, sc)) * inv_h;
        if constexpr (Covariant)
        {
          if (w.rank() > 1)
          {
            const AlgebraElement avg = (w(x, sc) + w(xi, sc)) * 0.5;
            term += bracket(averaged_edge(*a, x, i, rest), avg);
          }
        }
        if (j % 2 == 0)
          acc += term;
        else
          acc -= term;
        ++j;
      }
      out(x, c) = acc;
    }
  }
  return out;
}

template <int K, bool Covariant>
Form<K - 1> codifferential(const Connection *a, const Form<K> &w)
{
  const Lattice &lat = w.lattice();
  const int n = lat.dimension();
  const double inv_h = 1.0 / lat.spacing();
  Form<K - 1> out(lat, w.rank());
  const FormLayout &src_layout = form_layout(n, K);
  const FormLayout &dst_layout = form_layout(n, K - 1);
  for (Site y = 0; y < lat.site_count(); ++y)
  {
    for (int c = 0; c < dst_layout.size(); ++c)
    {
      const unsigned mask = dst_layout.masks[c];
      AlgebraElement acc(w.rank());
      for (int i = 0; i < n; ++i)
      {
        if (mask & (1u << i))
          continue;
        const unsigned full = mask | (1u << i);
        const int sc = src_layout.index_of_mask[full];
        const Site yb = lat.backward(y, i);
        AlgebraElement term = (w(yb, sc) - w(y, sc)) * inv_h;
        if constexpr (Covariant)
        {
          if (w.rank() > 1)
          {
            AlgebraElement br = bracket(averaged_edge(*a, y, i, mask), w(y, sc));
            br += bracket(averaged_edge(*a, yb, i, mask), w(yb, sc));
            term -= br * 0.5;
          }
        }
        if (position_in(full, i) % 2 == 0)
          acc += term;
        else
          acc -= term;
      }
      out(y, c) = acc;
    }
  }
  return out;
}

} // namespace

template <int K>
Form<K + 1> d(const Form<K> &w)
{
  return coboundary<K, false>(nullptr, w);
}

template <int K>
Form<K - 1> d_star(const Form<K> &w)
{
  return codifferential<K, false>(nullptr, w);
}

template <int K>
Form<K + 1> cov_d(const Connection &a, const Form<K> &w)
{
  require_compatible(a.lattice(), w.lattice(), a.rank(), w.rank(), "cov_d");
  return coboundary<K, true>(&a, w);
}

template <int K>
Form<K - 1> cov_d_star(const Connection &a, const Form<K> &w)
{
  require_compatible(a.lattice(), w.lattice(), a.rank(), w.rank(), "cov_d_star");
  return codifferential<K, true>(&a, w);
}

TwoForm curvature(const Connection &a)
{
  TwoForm f = d(a);
  if (a.rank() == 1)
    return f;
  const Lattice &lat = a.lattice();
  const FormLayout &layout = form_layout(lat.dimension(), 2);
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    for (int c = 0; c < layout.size(); ++c)
    {
      const unsigned mask = layout.masks[c];
      const int mu = std::countr_zero(mask);
      const int nu = std::countr_zero(mask & ~(1u << mu));
      const AlgebraElement amu = (a(x, mu) + a(lat.forward(x, nu), mu)) * 0.5;
      const AlgebraElement anu = (a(x, nu) + a(lat.forward(x, mu), nu)) * 0.5;
      f(x, c) += bracket(amu, anu);
    }
  }
  return f;
}

template <int K>
std::vector<Form<K>> cov_gradient(const Connection &a, const Form<K> &w)
{
  require_compatible(a.lattice(), w.lattice(), a.rank(), w.rank(), "cov_gradient");
  std::vector<Form<K>> out = gradient(w);
  if (w.rank() == 1)
    return out;
  const Lattice &lat = w.lattice();
  for (int l = 0; l < lat.dimension(); ++l)
    for (Site x = 0; x < lat.site_count(); ++x)
    {
      const Site xl = lat.forward(x, l);
      for (int c = 0; c < w.components(); ++c)
        out[l](x, c) += bracket(a(x, l), (w(x, c) + w(xl, c)) * 0.5);
    }
  return out;
}

template <int K>
std::vector<Form<K>> gradient(const Form<K> &w)
{
  const Lattice &lat = w.lattice();
  const double inv_h = 1.0 / lat.spacing();
  std::vector<Form<K>> out;
  out.reserve(static_cast<std::size_t>(lat.dimension()));
  for (int l = 0; l < lat.dimension(); ++l)
  {
    Form<K> g(lat, w.rank());
    for (Site x = 0; x < lat.site_count(); ++x)
    {
      const Site xl = lat.forward(x, l);
      for (int c = 0; c < w.components(); ++c)
        g(x, c) = (w(xl, c) - w(x, c)) * inv_h;
    }
    out.push_back(std::move(g));
  }
  return out;
}

template <int K>
Form<K> rough_laplacian(const Form<K> &w)
{
  const Lattice &lat = w.lattice();
  const double inv_h2 = 1.0 / (lat.spacing() * lat.spacing());
  Form<K> out(lat, w.rank());
  for (Site x = 0; x < lat.site_count(); ++x)
    for (int c = 0; c < w.components(); ++c)
    {
      AlgebraElement acc(w.rank());
      for (int l = 0; l < lat.dimension(); ++l)
      {
        acc += (w(x, c) - w(lat.forward(x, l), c));
        acc += (w(x, c) - w(lat.backward(x, l), c));
      }
      out(x, c) = acc * inv_h2;
    }
  return out;
}

template Form<1> d<0>(const Form<0> &);
template Form<2> d<1>(const Form<1> &);
template Form<3> d<2>(const Form<2> &);
template Form<4> d<3>(const Form<3> &);
template Form<0> d_star<1>(const Form<1> &);
template Form<1> d_star<2>(const Form<2> &);
template Form<2> d_star<3>(const Form<3> &);
template Form<3> d_star<4>(const Form<4> &);
template Form<1> cov_d<0>(const Connection &, const Form<0> &);
template Form<2> cov_d<1>(const Connection &, const Form<1> &);
template Form<3> cov_d<2>(const Connection &, const Form<2> &);
template Form<0> cov_d_star<1>(const Connection &, const Form<1> &);
template Form<1> cov_d_star<2>(const Connection &, const Form<2> &);
template Form<2> cov_d_star<3>(const Connection &, const Form<3> &);
template std::vector<Form<0>> cov_gradient<0>(const Connection &, const Form<0> &);
template std::vector<Form<1>> cov_gradient<1>(const Connection &, const Form<1> &);
template std::vector<Form<2>> cov_gradient<2>(const Connection &, const Form<2> &);
template std::vector<Form<0>> gradient<0>(const Form<0> &);
template std::vector<Form<1>> gradient<1>(const Form<1> &);
template std::vector<Form<2>> gradient<2>(const Form<2> &);
template Form<0> rough_laplacian<0>(const Form<0> &);
template Form<1> rough_laplacian<1>(const Form<1> &);
template Form<2> rough_laplacian<2>(const Form<2> &);

} // namespace ymf::field
