#include "ymf/gauge/cover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ymf/errors.hpp"
#include "ymf/flow.hpp"

namespace ymf::gauge {

using field::Coordinates;
using field::Lattice;

namespace {

std::vector<std::size_t> site_counts(const Lattice &lat, const std::vector<BallPatch> &patches)
{
  std::vector<std::size_t> count(lat.site_count(), 0);
  for (const auto &p : patches)
    for (Site x : p.interior())
      ++count[x];
  return count;
}

Cover finish(std::vector<BallPatch> patches)
{
  Cover c;
  c.count = site_counts(patches.front().lattice(), patches);
  c.multiplicity = *std::max_element(c.count.begin(), c.count.end());
  c.patches = std::move(patches);
  return c;
}

bool intersects(const BallPatch &a, const BallPatch &b)
{
  for (Site x : a.interior())
    if (b.is_interior(x))
      return true;
  return false;
}

/// Evenly spaced centers on one axis with gaps of at most `step` sites.
std::vector<int> axis_centers(int extent, int step)
{
  const int m = (extent + step - 1) / step;
  std::vector<int> c;
  for (int k = 0; k < m; ++k)
    c.push_back(static_cast<int>(std::lround(static_cast<double>(k) * extent / m)));
  return c;
}

} // namespace

std::vector<Site> overlap(const BallPatch &a, const BallPatch &b)
{
  if (!(a.lattice() == b.lattice()))
    throw ContractError("gauge", "overlap", "patches live on different lattices");
  std::vector<Site> out;
  for (Site x : a.interior())
    if (b.is_interior(x))
      out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

GaugeTransform transition(const GaugeTransform &s_i, const GaugeTransform &s_j, const std::vector<Site> &sites)
{
  if (sites.empty())
    throw ContractError("gauge", "transition", "patches do not overlap");
  if (!(s_i.lattice() == s_j.lattice()) || s_i.rank() != s_j.rank())
    throw ContractError("gauge", "transition", "gauge transforms are incompatible");
  GaugeTransform out(s_i.lattice(), s_i.rank());
  for (Site x : sites)
    out(x) = s_i(x).inverse() * s_j(x);
  return out;
}

Cover order_cover(std::vector<BallPatch> patches)
{
  if (patches.empty())
    throw ContractError("gauge", "order_cover", "empty cover");
  for (const auto &p : patches)
    if (!(p.lattice() == patches.front().lattice()))
      throw ContractError("gauge", "order_cover", "patches live on different lattices");

  std::vector<BallPatch> chain{patches.front()};
  std::vector<char> used(patches.size(), 0);
  used[0] = 1;
  while (chain.size() < patches.size())
  {
    bool extended = false;
    for (std::size_t k = 0; k < patches.size(); ++k)
      if (!used[k] && intersects(chain.back(), patches[k]))
      {
        used[k] = 1;
        chain.push_back(patches[k]);
        extended = true;
        break;
      }
    if (!extended)
    {
      std::ostringstream msg;
      msg << "no patch overlaps patch " << chain.size() - 1 << " of the chain; " << patches.size() - chain.size()
          << " patches left unordered";
      throw ContractError("gauge", "order_cover", msg.str());
    }
  }
  return finish(std::move(chain));
}

Cover ordered_cover(const Lattice &lat, double radius)
{
  const int n = lat.dimension();
  const int step = std::max(1, static_cast<int>(std::floor(2.0 * radius / (lat.spacing() * std::sqrt(n)) + 1e-12)));
  std::array<std::vector<int>, field::max_dimension> centers;
  std::size_t total = 1;
  for (int mu = 0; mu < n; ++mu)
  {
    centers[mu] = axis_centers(lat.extent(mu), step);
    total *= centers[mu].size();
  }

  // Boustrophedon walk: axis mu reverses whenever the summed positions of the
  // slower axes are odd.
  std::vector<BallPatch> patches;
  for (std::size_t k = 0; k < total; ++k)
  {
    std::array<std::size_t, field::max_dimension> idx{};
    std::size_t rest = k;
    for (int mu = n - 1; mu >= 0; --mu)
    {
      std::size_t stride = 1;
      for (int nu = 0; nu < mu; ++nu)
        stride *= centers[nu].size();
      idx[mu] = rest / stride;
      rest %= stride;
    }
    Coordinates c{};
    std::size_t parity = 0;
    for (int mu = n - 1; mu >= 0; --mu)
    {
      const std::size_t m = centers[mu].size();
      const std::size_t j = parity % 2 == 0 ? idx[mu] : m - 1 - idx[mu];
      c[mu] = centers[mu][j];
      parity += j;
    }
    patches.emplace_back(lat, lat.site(c), radius);
  }

  for (std::size_t k = 0; k + 1 < patches.size(); ++k)
    if (!intersects(patches[k], patches[k + 1]))
      throw ContractError("gauge", "ordered_cover", "consecutive patches do not overlap; increase the radius");
  Cover out = finish(std::move(patches));
  for (Site x = 0; x < lat.site_count(); ++x)
    if (out.count[x] == 0)
      throw ContractError("gauge", "ordered_cover", "balls do not cover every site; increase the radius");
  return out;
}

ConsistencyReport patch_consistency_check(const std::vector<Connection> &samples, const Cover &cover,
                                          const GaugeFixConfig &config)
{
  if (samples.empty())
    throw ContractError("gauge", "patch_consistency_check", "no samples");
  if (cover.patches.size() < 2)
    throw ContractError("gauge", "patch_consistency_check", "need at least two patches");

  ConsistencyReport rep;
  rep.multiplicity = cover.multiplicity;
  rep.pairs = cover.patches.size() - 1;

  std::vector<std::vector<Site>> overlaps;
  for (std::size_t i = 0; i + 1 < cover.patches.size(); ++i)
    overlaps.push_back(overlap(cover.patches[i], cover.patches[i + 1]));

  std::vector<GaugeTransform> initial;
  for (std::size_t t = 0; t < samples.size(); ++t)
  {
    std::vector<GaugeFixResult> fixed;
    for (const auto &p : cover.patches)
    {
      GaugeFixConfig c = config;
      c.domain = Domain::ball(p, BoundaryCondition::dirichlet_zero);
      fixed.push_back(coulomb_fix(samples[t], c));
    }
    for (std::size_t i = 0; i + 1 < fixed.size(); ++i)
    {
      const auto &sites = overlaps[i];
      const GaugeTransform sij = transition(fixed[i].s, fixed[i + 1].s, sites);
      if (t == 0)
        initial.push_back(sij);
      else
        for (Site x : sites)
          rep.transition_variation = std::max(
            rep.transition_variation, (sij(x).matrix() - initial[i](x).matrix()).frobenius_norm());

      const Connection moved = flow::apply_gauge(sij, fixed[i].a);
      const Lattice &lat = moved.lattice();
      const BallPatch &pi = cover.patches[i];
      const BallPatch &pj = cover.patches[i + 1];
      double sum = 0.0;
      for (Site x : sites)
        for (int mu = 0; mu < lat.dimension(); ++mu)
        {
          const Site y = lat.forward(x, mu);
          if (!(pi.is_interior(y) && pj.is_interior(y)))
            continue;
          const double e = (moved(x, mu) - fixed[i + 1].a(x, mu)).norm();
          sum += e * e;
        }
      rep.compatibility_residual = std::max(rep.compatibility_residual, std::sqrt(lat.volume_element() * sum));
    }
  }
  return rep;
}

} // namespace ymf::gauge
