#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace ymf::field {

inline constexpr int max_dimension = 4;

using Site = std::size_t;
using Coordinates = std::array<int, max_dimension>;

/// Periodic hypercubic lattice: n in {2,3,4}, even extents >= 4, spacing h.
/// Sites are numbered with axis 0 fastest. Neighbor tables are shared between
/// copies.
class Lattice
{
public:
  Lattice(int dimension, const std::vector<int> &extents, double spacing);

  /// Cubic lattice with `extent` sites per axis.
  static Lattice cubic(int dimension, int extent, double spacing);

  int dimension() const noexcept { return dim_; }
  int extent(int axis) const noexcept { return extents_[axis]; }
  const Coordinates &extents() const noexcept { return extents_; }
  int min_extent() const noexcept;
  double spacing() const noexcept { return h_; }
  std::size_t site_count() const noexcept { return sites_; }

  /// h^n.
  double volume_element() const noexcept { return volume_element_; }

  Site forward(Site x, int axis) const noexcept { return topo_->fwd[x * dim_ + axis]; }
  Site backward(Site x, int axis) const noexcept { return topo_->bwd[x * dim_ + axis]; }

  /// Shift by the sum of the unit vectors whose bits are set in `mask`.
  Site shift(Site x, unsigned mask) const noexcept;

  Coordinates coordinates(Site x) const noexcept;
  Site site(const Coordinates &c) const noexcept; ///< wraps every component

  /// Minimum-image displacement from `from` to `to`, in lattice units.
  Coordinates displacement(Site from, Site to) const noexcept;

  friend bool operator==(const Lattice &a, const Lattice &b)
  {
    return a.dim_ == b.dim_ && a.extents_ == b.extents_ && a.h_ == b.h_;
  }

private:
  struct Topology
  {
    std::vector<Site> fwd;
    std::vector<Site> bwd;
  };

  int dim_;
  Coordinates extents_{};
  double h_;
  std::size_t sites_;
  double volume_element_;
  std::shared_ptr<const Topology> topo_;
};

} // namespace ymf::field
