#pragma once

#include <cmath>
#include <vector>

#include "ymf/field/form.hpp"
#include "ymf/field/patch.hpp"

namespace ymf::field {

/// <a, b> = h^n sum_x sum_I inner(a_I(x), b_I(x)), compensated summation.
template <int K>
double inner_product(const Form<K> &a, const Form<K> &b);

/// Pointwise norm |w(x)| = sqrt(sum_I inner(w_I(x), w_I(x))).
template <int K>
double pointwise_norm(const Form<K> &w, Site x);

template <int K>
double max_pointwise_norm(const Form<K> &w);

template <int K>
double l2(const Form<K> &w);

/// (h^n sum_x |w(x)|^p)^(1/p). Throws for p < 1.
template <int K>
double lp(const Form<K> &w, double p);

/// sqrt(l2(w)^2 + sum_l l2(forward difference along l)^2).
template <int K>
double w12(const Form<K> &w);

/// lp restricted to interior sites of the patch.
template <int K>
double local_lp(const Form<K> &w, const BallPatch &patch, double p);

/// Restricted to an explicit site list (used by the patch fixers).
template <int K>
double l2_on(const Form<K> &w, const std::vector<Site> &sites);

template <int K>
double w12_on(const Form<K> &w, const std::vector<Site> &sites);

template <int K>
double lp_on(const Form<K> &w, const std::vector<Site> &sites, double p);

/// Neumaier-compensated accumulator.
class CompensatedSum
{
public:
  void add(double v) noexcept
  {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace ymf::field
