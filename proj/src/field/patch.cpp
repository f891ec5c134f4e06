#include "ymf/field/patch.hpp"

#include <cmath>
#include <queue>
#include <sstream>

#include "ymf/errors.hpp"

namespace ymf::field {

BallPatch::BallPatch(const Lattice &lattice, Site center, double radius)
  : lattice_(lattice), center_(center), radius_(radius), class_(lattice.site_count(), SiteClass::exterior)
{
  const double h = lattice.spacing();
  const double max_radius = 0.5 * lattice.min_extent() * h;
  if (!(radius > 0.0) || radius > max_radius * (1.0 + 1e-12))
  {
    std::ostringstream msg;
    msg << "radius " << radius << " outside (0, " << max_radius << "]";
    throw ContractError("field", "BallPatch", msg.str());
  }
  if (center >= lattice.site_count())
    throw ContractError("field", "BallPatch", "center outside lattice");

  const int n = lattice.dimension();
  const double r_sites = radius / h;
  for (Site x = 0; x < lattice.site_count(); ++x)
  {
    const Coordinates dx = lattice.displacement(center, x);
    double d2 = 0.0;
    for (int mu = 0; mu < n; ++mu)
      d2 += static_cast<double>(dx[mu]) * dx[mu];
    if (std::sqrt(d2) <= r_sites * (1.0 + 1e-12))
    {
      class_[x] = SiteClass::interior;
      interior_.push_back(x);
    }
  }
  for (Site x : interior_)
    for (int mu = 0; mu < n; ++mu)
      for (int s : {+1, -1})
      {
        const Site y = s > 0 ? lattice.forward(x, mu) : lattice.backward(x, mu);
        if (class_[y] == SiteClass::interior)
          continue;
        if (class_[y] == SiteClass::exterior)
        {
          class_[y] = SiteClass::boundary;
          boundary_.push_back(y);
        }
        faces_.push_back({x, y, mu, s, s > 0 ? x : y});
      }
  if (boundary_.empty())
    throw ContractError("field", "BallPatch", "ball covers the whole torus; no boundary layer");

  // Edge connectivity of the closure.
  std::vector<char> seen(lattice.site_count(), 0);
  std::queue<Site> todo;
  todo.push(center);
  seen[center] = 1;
  std::size_t reached = 0;
  while (!todo.empty())
  {
    const Site x = todo.front();
    todo.pop();
    ++reached;
    for (int mu = 0; mu < n; ++mu)
      for (Site y : {lattice.forward(x, mu), lattice.backward(x, mu)})
        if (!seen[y] && class_[y] != SiteClass::exterior)
        {
          seen[y] = 1;
          todo.push(y);
        }
  }
  if (reached != interior_.size() + boundary_.size())
    throw ContractError("field", "BallPatch", "patch closure is not edge-connected");
}

double BallPatch::interior_volume() const noexcept
{
  return static_cast<double>(interior_.size()) * lattice_.volume_element();
}

template <int K>
Form<K> restrict(const Form<K> &w, const BallPatch &patch)
{
  Form<K> out(w.lattice(), w.rank());
  for (Site x = 0; x < w.lattice().site_count(); ++x)
    if (patch.in_closure(x))
      for (int c = 0; c < w.components(); ++c)
        out(x, c) = w(x, c);
  return out;
}

std::vector<AlgebraElement> normal_component(const OneForm &w, const BallPatch &patch)
{
  std::vector<AlgebraElement> out;
  out.reserve(patch.faces().size());
  for (const BoundaryFace &f : patch.faces())
    out.push_back(w(f.edge_base, f.axis) * static_cast<double>(f.sign));
  return out;
}

template Form<0> restrict<0>(const Form<0> &, const BallPatch &);
template Form<1> restrict<1>(const Form<1> &, const BallPatch &);
template Form<2> restrict<2>(const Form<2> &, const BallPatch &);

} // namespace ymf::field
