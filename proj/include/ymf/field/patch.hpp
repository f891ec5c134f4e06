#pragma once

#include <cstdint>
#include <vector>

#include "ymf/field/form.hpp"

namespace ymf::field {

enum class SiteClass : std::uint8_t { exterior = 0, interior = 1, boundary = 2 };

/// Face between an interior site and a boundary site. The outward normal is
/// sign * e_axis; the edge carrying the normal component starts at
/// `edge_base` (the interior site when sign = +1, the boundary site
/// otherwise).
struct BoundaryFace
{
  Site interior;
  Site boundary;
  int axis;
  int sign;
  Site edge_base;
};

/// Lattice metric ball {x : |x - x0| <= r} (minimum-image Euclidean distance)
/// together with the layer of boundary sites face-adjacent to it.
class BallPatch
{
public:
  /// Throws ContractError when r <= 0, r > (min extent) h / 2, or the ball
  /// leaves no boundary layer (covers the torus).
  BallPatch(const Lattice &lattice, Site center, double radius);

  const Lattice &lattice() const noexcept { return lattice_; }
  Site center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

  SiteClass classify(Site x) const noexcept { return class_[x]; }
  bool is_interior(Site x) const noexcept { return class_[x] == SiteClass::interior; }
  bool in_closure(Site x) const noexcept { return class_[x] != SiteClass::exterior; }

  const std::vector<Site> &interior() const noexcept { return interior_; }
  const std::vector<Site> &boundary() const noexcept { return boundary_; }
  const std::vector<BoundaryFace> &faces() const noexcept { return faces_; }

  /// Interior sites, h^n each.
  double interior_volume() const noexcept;

private:
  Lattice lattice_;
  Site center_;
  double radius_;
  std::vector<SiteClass> class_;
  std::vector<Site> interior_;
  std::vector<Site> boundary_;
  std::vector<BoundaryFace> faces_;
};

/// Copy of `w` with every value based at a site outside the closure zeroed.
template <int K>
Form<K> restrict(const Form<K> &w, const BallPatch &patch);

/// w_axis at every boundary face, multiplied by the sign of the outward
/// normal. Ordered like patch.faces().
std::vector<AlgebraElement> normal_component(const OneForm &w, const BallPatch &patch);

} // namespace ymf::field
