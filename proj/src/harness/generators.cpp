#include <cmath>
#include <numbers>
#include <random>

#include "ymf/errors.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/field/operators.hpp"
#include "ymf/harness.hpp"

namespace ymf::harness {

using field::Site;
using lie::AlgebraElement;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

using Mode = std::array<int, field::max_dimension>;

/// Nonzero integer vectors with |k|_inf < band, one of each pair {k, -k}.
std::vector<Mode> half_modes(int n, int band)
{
  std::vector<Mode> out;
  const int side = 2 * band - 1;
  int total = 1;
  for (int mu = 0; mu < n; ++mu)
    total *= side;
  for (int idx = 0; idx < total; ++idx)
  {
    Mode k{};
    int rest = idx;
    for (int mu = 0; mu < n; ++mu)
    {
      k[mu] = rest % side - (band - 1);
      rest /= side;
    }
    int lead = 0;
    for (int mu = n - 1; mu >= 0 && lead == 0; --mu)
      lead = k[mu];
    if (lead > 0)
      out.push_back(k);
  }
  return out;
}

/// Cosine and sine coefficients of one (mode, component, generator) triple,
/// independent of the lattice.
std::pair<double, double> coefficients(std::uint64_t seed, const Mode &k, int component, int generator)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k[0] + 1024), static_cast<std::uint32_t>(k[1] + 1024),
                    static_cast<std::uint32_t>(k[2] + 1024), static_cast<std::uint32_t>(k[3] + 1024),
                    static_cast<std::uint32_t>(component), static_cast<std::uint32_t>(generator)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> g(0.0, 1.0);
  const double c = g(rng);
  const double s = g(rng);
  return {c, s};
}

/// Band-limited random k-form, scaled so its
/// continuum L2 norm equals `amplitude`.
template <int K>
field::Form<K> random_band_limited(const Lattice &lat, int rank, double length, std::uint64_t seed, int band,
                                   double amplitude)
{
  const int n = lat.dimension();
  field::Form<K> w(lat, rank);
  const int comps = static_cast<int>(w.components());
  const int dim = AlgebraElement::dimension(rank);
  const auto modes = half_modes(n, band);

  std::vector<std::pair<double, double>> table;
  double norm2 = 0.0;
  for (const auto &k : modes)
    for (int c = 0; c < comps; ++c)
      for (int a = 0; a < dim; ++a)
      {
        table.push_back(coefficients(seed, k, c, a));
        const auto [cc, ss] = table.back();
        const AlgebraElement t = AlgebraElement::generator(rank, a);
        norm2 += 0.5 * (cc * cc + ss * ss) * lie::inner(t, t);
      }
  norm2 *= std::pow(length, n);
  const double scale = norm2 > 0.0 ? amplitude / std::sqrt(norm2) : 0.0;

  const double h = lat.spacing();
  for (Site x = 0; x < lat.site_count(); ++x)
  {
    const auto q = lat.coordinates(x);
    for (int c = 0; c < comps; ++c)
    {
      std::array<double, 3> coord{};
      for (std::size_t m = 0; m < modes.size(); ++m)
      {
        const Mode &k = modes[m];
        double phase = 0.0;
        for (int mu = 0; mu < n; ++mu)
          phase += k[mu] * q[mu] * h;
        phase *= two_pi / length;
        const double cs = std::cos(phase), sn = std::sin(phase);
        for (int a = 0; a < dim; ++a)
        {
          const auto [cc, ss] = table[(m * comps + c) * dim + a];
          coord[a] += cc * cs + ss * sn;
        }
      }
      for (auto &v : coord)
        v *= scale;
      w(x, c) = AlgebraElement::from_coordinates(rank, coord);
    }
  }
  return w;
}

} // namespace

Connection generate(const InitialData &data, const Lattice &lat, int rank, double length)
{
  if (rank != 1 && rank != 2)
    throw ContractError("harness", "generate", "rank must be 1 or 2");
  if (!(length > 0.0))
    throw ContractError("harness", "generate", "length must be positive");
  if (!(data.amplitude >= 0.0) || !std::isfinite(data.amplitude))
    throw ContractError("harness", "generate", "amplitude must be finite and non-negative");
  switch (data.kind)
  {
    case Generator::zero:
      return Connection(lat, rank);
    case Generator::abelian_mode: {
      Connection a(lat, rank);
      const AlgebraElement t = AlgebraElement::generator(rank, rank == 1 ? 0 : 2);
      for (Site x = 0; x < lat.site_count(); ++x)
      {
        const double x0 = lat.coordinates(x)[0] * lat.spacing();
        a(x, 1) = t * (data.amplitude * std::sin(two_pi * data.wave_number * x0 / length));
      }
      return a;
    }
    case Generator::random_smooth:
      if (data.band < 2 || 4 * (data.band - 1) >= lat.min_extent())
        throw ContractError("harness", "generate", "band must satisfy 2 <= band and band - 1 < extent / 4");
      return random_band_limited<1>(lat, rank, length, data.seed, data.band, data.amplitude);
    case Generator::pure_gauge: {
      if (data.band < 2 || 4 * (data.band - 1) >= lat.min_extent())
        throw ContractError("harness", "generate", "band must satisfy 2 <= band and band - 1 < extent / 4");
      const field::Section u = random_band_limited<0>(lat, rank, length, data.seed, data.band, data.amplitude);
      return flow::apply_gauge(field::GaugeTransform::exp(u), Connection(lat, rank));
    }
  }
  throw ContractError("harness", "generate", "unknown generator");
}

Connection divergence_free_perturbation(const Lattice &lat, int rank, double length, std::uint64_t seed, int band)
{
  const field::TwoForm omega = random_band_limited<2>(lat, rank, length, seed, band, 1.0);
  Connection b = field::d_star(omega);
  const double norm = field::l2(b);
  if (!(norm > 0.0))
    throw ContractError("harness", "divergence_free_perturbation", "perturbation vanished");
  b *= 1.0 / norm;
  return b;
}

} // namespace ymf::harness
