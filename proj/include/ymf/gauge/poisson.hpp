#pragma once

#include <optional>

#include "ymf/field/form.hpp"
#include "ymf/field/patch.hpp"

namespace ymf::gauge {

using field::BallPatch;
using field::Section;

enum class BoundaryCondition { dirichlet_zero, neumann_mean_zero };

/// Where an elliptic problem lives: the whole torus, or the interior of a
/// ball patch with a boundary condition.
struct Domain
{
  std::optional<BallPatch> patch;
  BoundaryCondition bc = BoundaryCondition::neumann_mean_zero;

  static Domain torus() { return {}; }
  static Domain ball(BallPatch p, BoundaryCondition bc) { return {std::move(p), bc}; }

  bool is_torus() const noexcept { return !patch.has_value(); }
};

/// Solves -d^* d u = f.
///
/// torus:     Fourier diagonalization; f must have mean zero, u has mean zero.
/// dirichlet: u lives on interior sites and vanishes elsewhere.
/// neumann:   graph Laplacian of the interior (no flux through boundary
///            faces); f must have mean zero over the interior, u has mean
///            zero there and vanishes elsewhere.
///
/// Patch problems are solved by conjugate gradients to `rel_tol`.
Section poisson_solve(const Section &f, const Domain &domain, double rel_tol = 1e-13);

/// Mean over the torus or over the patch interior, per algebra coordinate.
std::array<double, 3> domain_mean(const Section &f, const Domain &domain);

/// d^* d u on the domain (zero away from the patch interior).
Section domain_laplacian(const Section &u, const Domain &domain);

/// Relative residual ||-d^*du - f|| / ||f|| on the domain (0 when f = 0).
double poisson_residual(const Section &u, const Section &f, const Domain &domain);

} // namespace ymf::gauge
