#pragma once

// Diagnostic monitors over a stored run. Each monitor measures the smallest
// constant for which its inequality holds on the run instead of asserting a
// fixed constant.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ymf/field/form.hpp"
#include "ymf/field/patch.hpp"

namespace ymf::analysis {

using field::BallPatch;
using field::Connection;
using field::Site;
using field::TwoForm;

/// Connections A(t_k) at strictly increasing times t_k >= 0.
struct RunHistory
{
  std::vector<double> times;
  std::vector<Connection> fields;

  /// Throws ContractError when sizes differ, the history is empty, times are
  /// not increasing or the fields live on different lattices.
  void validate() const;
};

struct MonitorRow
{
  double time;
  std::size_t patch;
  double quantity;
  double running_constant;
};

inline constexpr const char *monitor_csv_header = "time,patch,quantity,running_constant";

struct MonitorReport
{
  std::string name;
  std::vector<MonitorRow> rows;
  double constant = 0.0;          ///< smallest admissible constant on the run, >= 0
  bool degenerate = false;        ///< some ratio was 0/0 and counted as 0
  std::optional<double> bound;    ///< configured bound on `constant`
  bool pass = true;               ///< constant <= bound (true without a bound)
  std::optional<double> hypothesis; ///< measured smallness hypothesis, when the monitor has one
  std::vector<std::string> notes;
};

/// Writes the header and one row per measurement, 17 significant digits.
void write_csv(std::ostream &out, const MonitorReport &report);

/// Ball B_R and the concentric ball B_2R.
struct PatchPair
{
  BallPatch inner;
  BallPatch outer;
};

/// Builds B_R(center) and B_2R(center); throws when B_2R wraps the torus.
PatchPair make_patch_pair(const field::Lattice &lattice, Site center, double radius);

/// Local energy inequality with p = n/2:
///   E_R(t) [+ int_0^t int_{B_R} |nabla_A F|^2 when n = 4]
///     <= E_2R(0) + C / R^2 int_0^t E_2R(s) ds,   E_r(t) = int_{B_r} |F(t)|^{n/2}.
/// Reports the smallest C over all times and pairs.
MonitorReport local_energy_monitor(const RunHistory &history, const std::vector<PatchPair> &pairs,
                                   std::optional<double> bound = std::nullopt);

/// Epsilon-regularity ratio |F(x0, t0)|^2 r0^2 / int_{t0 - r0^2}^{t0} int_{B_r0(x0)} |F|^2
/// maximized over centers x0 in the interior of `centers` and over sample
/// times t0 >= t_0 + r0^2. The hypothesis value is the sup over the same
/// windows and centers of int_{B_r0(x0)} |F|^{n/2}. Throws when no sample
/// time admits a full window.
MonitorReport eps_regularity_monitor(const RunHistory &history, const BallPatch &centers, double r0,
                                     std::optional<double> bound = std::nullopt);

struct SingularFlag
{
  Site site;
  std::vector<double> concentration; ///< per radius, max over late times of int_{B_R} |F|^{n/2}
};

/// Sites x0 for which every radius R in `radii` has
///   max over late times of int_{B_R(x0)} |F|^{n/2} >= eps0.
/// Late times are those in the last `late_fraction` of the run interval.
std::vector<SingularFlag> singular_detector(const RunHistory &history, double eps0, const std::vector<double> &radii,
                                            double late_fraction = 0.25);

/// Curvature-history form of the detector.
std::vector<SingularFlag> singular_detector(const std::vector<double> &times, const std::vector<TwoForm> &curvature,
                                            double eps0, const std::vector<double> &radii,
                                            double late_fraction = 0.25);

/// l2 norm of the covariant exterior derivative of F_A (zero for n = 2).
double bianchi_residual(const Connection &a);

/// l2 norm of (d d^* + d^* d) F - rough_laplacian(F) for a U(1) connection.
/// Throws ContractError for SU(2).
double weitzenboeck_residual_abelian(const Connection &a);

/// Per-time Bianchi residuals; constant = max.
MonitorReport bianchi_monitor(const RunHistory &history);

/// Per-time abelian Weitzenboeck residuals; constant = max.
MonitorReport weitzenboeck_monitor(const RunHistory &history);

} // namespace ymf::analysis
