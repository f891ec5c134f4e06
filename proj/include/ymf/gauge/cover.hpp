#pragma once

#include <cstddef>
#include <vector>

#include "ymf/field/form.hpp"
#include "ymf/field/patch.hpp"
#include "ymf/gauge/coulomb.hpp"

namespace ymf::gauge {

using field::Site;

/// Interior sites shared by two patches, ascending.
std::vector<Site> overlap(const BallPatch &a, const BallPatch &b);

/// S_ij = S_i^{-1} S_j on the overlap and the identity elsewhere, so that
/// apply_gauge(S_ij, a_i) = a_j wherever a_i = apply_gauge(S_i, A) and
/// a_j = apply_gauge(S_j, A). Throws on an empty overlap.
GaugeTransform transition(const GaugeTransform &s_i, const GaugeTransform &s_j, const std::vector<Site> &sites);

struct Cover
{
  std::vector<BallPatch> patches; ///< consecutive patches overlap
  std::size_t multiplicity = 0;   ///< max number of interiors containing one site
  std::vector<std::size_t> count; ///< per site, number of interiors containing it
};

/// Orders the given patches into a chain in which consecutive interiors
/// intersect (greedy, lowest index first). Throws if no such chain is found.
Cover order_cover(std::vector<BallPatch> patches);

/// Regular grid of balls of radius r that covers every site, in snake order.
Cover ordered_cover(const field::Lattice &lattice, double radius);

struct ConsistencyReport
{
  std::size_t multiplicity = 0;
  /// max over pairs, sites and samples of ||S_ij(t) - S_ij(t_0)||_F.
  double transition_variation = 0.0;
  /// max over pairs and samples of the l2 norm of apply_gauge(S_ij, a_i) - a_j
  /// on edges whose endpoints both lie in the overlap.
  double compatibility_residual = 0.0;
  std::size_t pairs = 0;
};

/// Dirichlet-fixes every patch of the cover at every sample and measures how
/// the transition functions of consecutive patches vary in time.
ConsistencyReport patch_consistency_check(const std::vector<Connection> &samples, const Cover &cover,
                                          const GaugeFixConfig &config);

} // namespace ymf::gauge
