#include "ymf/field/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ymf/errors.hpp"

namespace ymf::field {

Lattice::Lattice(int dimension, const std::vector<int> &extents, double spacing)
  : dim_(dimension), h_(spacing)
{
  if (dimension < 2 || dimension > max_dimension)
    throw ContractError("field", "Lattice", "dimension must be 2, 3 or 4, got " + std::to_string(dimension));
  if (static_cast<int>(extents.size()) != dimension)
    throw ContractError("field", "Lattice", "expected " + std::to_string(dimension) + " extents");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ContractError("field", "Lattice", "spacing must be positive");

  sites_ = 1;
  for (int mu = 0; mu < dimension; ++mu)
  {
    const int l = extents[mu];
    if (l < 4 || l % 2 != 0)
      throw ContractError("field", "Lattice",
                          "extent " + std::to_string(l) + " on axis " + std::to_string(mu + 1)
                            + " must be even and >= 4");
    extents_[mu] = l;
    sites_ *= static_cast<std::size_t>(l);
  }
  for (int mu = dimension; mu < max_dimension; ++mu)
    extents_[mu] = 1;
  volume_element_ = std::pow(h_, dim_);

  auto topo = std::make_shared<Topology>();
  topo->fwd.resize(sites_ * dim_);
  topo->bwd.resize(sites_ * dim_);
  std::size_t stride = 1;
  for (int mu = 0; mu < dim_; ++mu)
  {
    const std::size_t l = static_cast<std::size_t>(extents_[mu]);
    for (Site x = 0; x < sites_; ++x)
    {
      const std::size_t c = (x / stride) % l;
      const Site base = x - c * stride;
      topo->fwd[x * dim_ + mu] = base + ((c + 1) % l) * stride;
      topo->bwd[x * dim_ + mu] = base + ((c + l - 1) % l) * stride;
    }
    stride *= l;
  }
  topo_ = std::move(topo);
}

Lattice Lattice::cubic(int dimension, int extent, double spacing)
{
  return Lattice(dimension, std::vector<int>(static_cast<std::size_t>(dimension), extent), spacing);
}

int Lattice::min_extent() const noexcept
{
  return *std::min_element(extents_.begin(), extents_.begin() + dim_);
}

Site Lattice::shift(Site x, unsigned mask) const noexcept
{
  for (int mu = 0; mu < dim_; ++mu)
    if (mask & (1u << mu))
      x = forward(x, mu);
  return x;
}

Coordinates Lattice::coordinates(Site x) const noexcept
{
  Coordinates c{};
  for (int mu = 0; mu < dim_; ++mu)
  {
    c[mu] = static_cast<int>(x % static_cast<std::size_t>(extents_[mu]));
    x /= static_cast<std::size_t>(extents_[mu]);
  }
  return c;
}

Site Lattice::site(const Coordinates &c) const noexcept
{
  Site x = 0;
  for (int mu = dim_ - 1; mu >= 0; --mu)
  {
    const int l = extents_[mu];
    const int w = ((c[mu] % l) + l) % l;
    x = x * static_cast<std::size_t>(l) + static_cast<std::size_t>(w);
  }
  return x;
}

Coordinates Lattice::displacement(Site from, Site to) const noexcept
{
  const Coordinates a = coordinates(from);
  const Coordinates b = coordinates(to);
  Coordinates d{};
  for (int mu = 0; mu < dim_; ++mu)
  {
    const int l = extents_[mu];
    int v = ((b[mu] - a[mu]) % l + l) % l;
    if (v > l / 2)
      v -= l;
    d[mu] = v;
  }
  return d;
}

} // namespace ymf::field
