#pragma once

// Discrete exterior calculus on the periodic lattice.
//
// d is the forward-difference coboundary. d_star is its exact adjoint under
// <a, b> = h^n sum_x sum_I inner(a_I(x), b_I(x)). The covariant versions add
// bracket terms built from edge/cell averages of the connection; cov_d on
// 1-forms is the exact linearization of curvature(), so cov_d_star(A, F_A)
// is the exact gradient of energy = 1/2 ||F_A||^2.

#include <vector>

#include "ymf/field/form.hpp"

namespace ymf::field {

template <int K>
Form<K + 1> d(const Form<K> &w);

template <int K>
Form<K - 1> d_star(const Form<K> &w);

template <int K>
Form<K + 1> cov_d(const Connection &a, const Form<K> &w);

template <int K>
Form<K - 1> cov_d_star(const Connection &a, const Form<K> &w);

/// F_{mu nu} = (dA)_{mu nu} + [A_mu^avg, A_nu^avg], averages taken over the two
/// parallel edges of the plaquette.
TwoForm curvature(const Connection &a);

/// Full covariant derivative, one k-form per direction:
/// (nabla_l w)_I(x) = (w_I(x+e_l) - w_I(x))/h + [A_l(x), (w_I(x) + w_I(x+e_l))/2].
template <int K>
std::vector<Form<K>> cov_gradient(const Connection &a, const Form<K> &w);

/// Componentwise forward-difference gradient.
template <int K>
std::vector<Form<K>> gradient(const Form<K> &w);

/// Componentwise rough Laplacian sum_l (2w(x) - w(x+e_l) - w(x-e_l))/h^2.
template <int K>
Form<K> rough_laplacian(const Form<K> &w);

} // namespace ymf::field
