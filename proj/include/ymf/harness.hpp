#pragma once

// End-to-end experiments: raw versus DeTurck flow, stability under
// perturbation of the data, gauge-fixed flow quality and energy decay, each
// run over a ladder of refinement levels.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ymf/field/form.hpp"
#include "ymf/flow.hpp"
#include "ymf/gauge/coulomb.hpp"

namespace ymf::harness {

using field::Connection;
using field::Lattice;

enum class Generator { zero, abelian_mode, random_smooth, pure_gauge };

/// Initial data, defined in continuum coordinates on the torus [0, length)^n
/// so that every refinement level samples the same field.
struct InitialData
{
  Generator kind = Generator::zero;
  /// abelian_mode: A_1(x) = amplitude sin(2 pi k x_0 / length) T, T a fixed
  /// generator, which is divergence free.
  int wave_number = 1;
  /// abelian_mode: pointwise amplitude. random_smooth: l2 norm of A.
  /// pure_gauge: l2 norm of the generating section u.
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  /// random_smooth and pure_gauge: modes with |k|_inf < band.
  int band = 2;
};

enum class Refinement {
  joint, ///< extent doubles and h halves per level; dt scales with h^2
  time   ///< fixed lattice; dt halves per level
};

struct ExperimentSpec
{
  std::string name = "experiment";
  int dimension = 2;
  int extent = 16;      ///< sites per axis at level 0
  double length = 1.0;  ///< physical side of the torus
  int rank = 2;         ///< 1 for U(1), 2 for SU(2)
  InitialData data;
  flow::FlowConfig flow;
  gauge::GaugeFixConfig gauge;
  /// Domain of the gauge stage: the torus, or a ball of this physical radius
  /// around the lattice center with boundary condition `patch_bc`.
  std::optional<double> patch_radius;
  gauge::BoundaryCondition patch_bc = gauge::BoundaryCondition::dirichlet_zero;
  int levels = 1;
  Refinement refinement = Refinement::joint;
  int samples = 10;     ///< sample times 0 = t_0 < ... < t_{samples-1} = t_end
  std::filesystem::path output; ///< per-level CSVs are written when non-empty

  /// Throws ContractError listing the first violated precondition.
  void validate() const;
};

/// Lattice of refinement level `level`.
Lattice level_lattice(const ExperimentSpec &spec, int level);

/// Flow configuration of refinement level `level` (explicit dt rescaled).
flow::FlowConfig level_flow(const ExperimentSpec &spec, int level);

/// Gauge configuration of refinement level `level`.
gauge::GaugeFixConfig level_gauge(const ExperimentSpec &spec, int level);

/// Samples the initial data on `lattice`.
Connection generate(const InitialData &data, const Lattice &lattice, int rank, double length);

/// Divergence-free perturbation d^*(omega) with omega a band-limited random
/// 2-form, normalized to unit l2 norm.
Connection divergence_free_perturbation(const Lattice &lattice, int rank, double length, std::uint64_t seed, int band);

struct LevelMeasurement
{
  int extent = 0;
  double h = 0.0;
  double dt = 0.0;
  std::map<std::string, double> values;
};

struct Rule
{
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport
{
  std::string name;
  std::vector<LevelMeasurement> levels;
  /// log2(e_l / e_{l+1}) per measured quantity; present only with >= 2 levels.
  std::map<std::string, std::vector<double>> orders;
  std::vector<Rule> rules;
  bool aborted = false;
  std::string abort_reason;
  bool pass() const;
};

/// Integrates the flow and returns A at the requested times (t = 0 included
/// when requested). Steps are shortened to land exactly on each time.
std::vector<Connection> sample_flow(const Connection &a0, const flow::FlowConfig &config,
                                    const std::vector<double> &times);

/// Equally spaced sample times over [0, t_end].
std::vector<double> sample_times(double t_end, int samples);

/// Raw flow against the DeTurck flow with its gauge ODE. Measures
/// e = max over sample times of l2(reconstructed - raw) / (l2(raw) + floor)
/// and its order under refinement.
ExperimentReport run_equivalence(const ExperimentSpec &spec);

/// For each delta: flows from A0 and A0 + delta b0, Coulomb-fixes both along
/// the sample times and measures sup w12(b), sup l2(sigma) and the
/// amplification sup w12(b(t)) / w12(b(0)).
ExperimentReport run_uniqueness(const ExperimentSpec &spec, const std::vector<double> &deltas);

/// Flow, Coulomb-fixed time family, residuals, Uhlenbeck ratios and the
/// velocity-to-curvature ratio per level.
ExperimentReport run_gauge_quality(const ExperimentSpec &spec);

/// Diagnostic CSV per level, monotone energy and energy-identity order.
ExperimentReport run_energy_decay(const ExperimentSpec &spec);

/// log2 ratios of consecutive values; non-positive pairs give 0.
std::vector<double> convergence_orders(const std::vector<double> &errors);

/// level,extent,h,dt followed by every measured key, one row per level.
void write_levels_csv(const std::filesystem::path &path, const ExperimentReport &report);

} // namespace ymf::harness
