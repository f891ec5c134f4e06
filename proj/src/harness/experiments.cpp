#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ymf/errors.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/harness.hpp"

namespace ymf::harness {

using field::Site;

namespace {

std::string describe(double v)
{
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

void add_rule(ExperimentReport &r, std::string name, bool pass, std::string detail)
{
  r.rules.push_back({std::move(name), pass, std::move(detail)});
}

LevelMeasurement measurement(const ExperimentSpec &spec, int level)
{
  const Lattice lat = level_lattice(spec, level);
  const flow::FlowConfig cfg = level_flow(spec, level);
  return {lat.extent(0), lat.spacing(), flow::resolve_dt(cfg, lat), {}};
}

/// Orders of `key` over all levels; empty with fewer than two levels.
void record_orders(ExperimentReport &r, const std::string &key)
{
  if (r.levels.size() < 2)
    return;
  std::vector<double> e;
  for (const auto &l : r.levels)
    e.push_back(l.values.at(key));
  r.orders[key] = convergence_orders(e);
}

/// Minimum order of `key`, or the rule passes outright when every level is
/// exact.
void order_rule(ExperimentReport &r, const std::string &key, double min_order, double exact)
{
  if (r.levels.size() < 2)
    return;
  double worst = 0.0;
  for (const auto &l : r.levels)
    worst = std::max(worst, l.values.at(key));
  if (worst <= exact)
  {
    add_rule(r, key + "_order", true, "exact at every level (max " + describe(worst) + ")");
    return;
  }
  const auto &o = r.orders.at(key);
  const double lowest = *std::min_element(o.begin(), o.end());
  add_rule(r, key + "_order", lowest >= min_order,
           "min order " + describe(lowest) + " against " + describe(min_order));
}

void maybe_write(const ExperimentSpec &spec, const ExperimentReport &r)
{
  if (spec.output.empty())
    return;
  std::filesystem::create_directories(spec.output);
  write_levels_csv(spec.output / (spec.name + "_levels.csv"), r);
}

/// Flow state advanced to each time in turn; `observe` runs at every time.
template <typename Observe>
void march(flow::FlowState state, const flow::FlowConfig &config, const std::vector<double> &times, Observe &&observe)
{
  const double dt = flow::resolve_dt(config, state.connection().lattice());
  for (double target : times)
  {
    while (state.time() < target * (1.0 - 1e-14))
    {
      const double remaining = target - state.time();
      state = flow::step(std::move(state), config, remaining < dt * (1.0 + 1e-12) ? remaining : dt);
    }
    observe(state);
  }
}

} // namespace

void ExperimentSpec::validate() const
{
  auto fail = [](const std::string &what) { throw ContractError("harness", "ExperimentSpec", what); };
  if (dimension < 2 || dimension > 4)
    fail("dimension must lie in {2, 3, 4}");
  if (extent < 4 || extent % 2 != 0)
    fail("extent must be even and at least 4");
  if (!(length > 0.0))
    fail("length must be positive");
  if (rank != 1 && rank != 2)
    fail("rank must be 1 (u1) or 2 (su2)");
  if (levels < 1)
    fail("levels must be >= 1");
  if (samples < 2)
    fail("samples must be >= 2");
  if (!(flow.t_end >= 0.0) || !std::isfinite(flow.t_end))
    fail("t_end must be finite and non-negative");
  if (!(data.amplitude >= 0.0) || !std::isfinite(data.amplitude))
    fail("amplitude must be finite and non-negative");
  if ((data.kind == Generator::random_smooth || data.kind == Generator::pure_gauge) &&
      (data.band < 2 || 4 * (data.band - 1) >= extent))
    fail("band must satisfy 2 <= band and band - 1 < extent / 4");
  if (patch_radius && !(*patch_radius > 0.0))
    fail("patch radius must be positive");
  gauge::validate(gauge);
  for (int l = 0; l < levels; ++l)
    flow::resolve_dt(level_flow(*this, l), level_lattice(*this, l));
}

Lattice level_lattice(const ExperimentSpec &spec, int level)
{
  const int extent = spec.refinement == Refinement::joint ? spec.extent << level : spec.extent;
  return Lattice::cubic(spec.dimension, extent, spec.length / extent);
}

flow::FlowConfig level_flow(const ExperimentSpec &spec, int level)
{
  flow::FlowConfig c = spec.flow;
  if (spec.refinement == Refinement::joint)
  {
    if (c.dt)
      *c.dt /= std::pow(4.0, level);
    return c;
  }
  const double dt0 = flow::resolve_dt(spec.flow, level_lattice(spec, 0));
  c.dt = dt0 / std::pow(2.0, level);
  return c;
}

gauge::GaugeFixConfig level_gauge(const ExperimentSpec &spec, int level)
{
  gauge::GaugeFixConfig c = spec.gauge;
  if (spec.patch_radius)
  {
    const Lattice lat = level_lattice(spec, level);
    field::Coordinates mid{};
    for (int mu = 0; mu < lat.dimension(); ++mu)
      mid[mu] = lat.extent(mu) / 2;
    c.domain = gauge::Domain::ball(field::BallPatch(lat, lat.site(mid), *spec.patch_radius), spec.patch_bc);
  }
  else
    c.domain = gauge::Domain::torus();
  return c;
}

bool ExperimentReport::pass() const
{
  if (aborted)
    return false;
  return std::all_of(rules.begin(), rules.end(), [](const Rule &r) { return r.pass; });
}

std::vector<double> convergence_orders(const std::vector<double> &e)
{
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    out.push_back(e[i] > 0.0 && e[i + 1] > 0.0 ? std::log2(e[i] / e[i + 1]) : 0.0);
  return out;
}

std::vector<double> sample_times(double t_end, int samples)
{
  if (samples < 2)
    throw ContractError("harness", "sample_times", "need at least two samples");
  std::vector<double> t;
  for (int k = 0; k < samples; ++k)
    t.push_back(k == samples - 1 ? t_end : t_end * k / (samples - 1));
  return t;
}

std::vector<Connection> sample_flow(const Connection &a0, const flow::FlowConfig &config,
                                    const std::vector<double> &times)
{
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1])))
      throw ContractError("harness", "sample_flow", "times must be non-negative and strictly increasing");
  std::vector<Connection> out;
  march(flow::FlowState(a0, config), config, times, [&](const flow::FlowState &s) { out.push_back(s.connection()); });
  return out;
}

void write_levels_csv(const std::filesystem::path &path, const ExperimentReport &report)
{
  std::set<std::string> keys;
  for (const auto &l : report.levels)
    for (const auto &[k, v] : l.values)
      keys.insert(k);
  std::ofstream out(path);
  if (!out)
    throw ContractError("harness", "write_levels_csv", "cannot open " + path.string());
  out.precision(17);
  out << "level,extent,h,dt";
  for (const auto &k : keys)
    out << ',' << k;
  out << '\n';
  for (std::size_t i = 0; i < report.levels.size(); ++i)
  {
    const auto &l = report.levels[i];
    out << i << ',' << l.extent << ',' << l.h << ',' << l.dt;
    for (const auto &k : keys)
    {
      out << ',';
      if (auto it = l.values.find(k); it != l.values.end())
        out << it->second;
    }
    out << '\n';
  }
}

ExperimentReport run_equivalence(const ExperimentSpec &spec)
{
  spec.validate();
  ExperimentReport r;
  r.name = spec.name;
  const double floor = std::numeric_limits<double>::min();
  for (int level = 0; level < spec.levels; ++level)
  {
    const Lattice lat = level_lattice(spec, level);
    const Connection a0 = generate(spec.data, lat, spec.rank, spec.length);
    const std::vector<double> times = sample_times(spec.flow.t_end, spec.samples);
    flow::FlowConfig raw = level_flow(spec, level);
    raw.variant = flow::Variant::raw;
    flow::FlowConfig det = raw;
    det.variant = flow::Variant::deturck;

    LevelMeasurement m = measurement(spec, level);
    try
    {
      std::vector<Connection> direct;
      march(flow::FlowState(a0, raw), raw, times, [&](const flow::FlowState &s) { direct.push_back(s.connection()); });
      std::vector<Connection> a;
      std::vector<field::GaugeTransform> s;
      march(flow::FlowState(a0, det), det, times, [&](const flow::FlowState &st) {
        a.push_back(st.connection());
        s.push_back(st.gauge());
      });
      const std::vector<Connection> rebuilt = flow::reconstruct_raw(a, s);
      double e = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k)
        e = std::max(e, field::l2(rebuilt[k] - direct[k]) / (field::l2(direct[k]) + floor));
      m.values["equivalence_error"] = e;
      m.values["final_energy"] = flow::energy(direct.back());
    }
    catch (const flow::SingularStop &stop)
    {
      r.aborted = true;
      r.abort_reason = stop.what();
      break;
    }
    r.levels.push_back(std::move(m));
  }
  if (!r.aborted)
  {
    record_orders(r, "equivalence_error");
    order_rule(r, "equivalence_error", 1.0, 1e-14);
  }
  maybe_write(spec, r);
  return r;
}

ExperimentReport run_uniqueness(const ExperimentSpec &spec, const std::vector<double> &deltas)
{
  spec.validate();
  if (deltas.empty())
    throw ContractError("harness", "run_uniqueness", "delta list is empty");
  for (double d : deltas)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw ContractError("harness", "run_uniqueness", "deltas must be finite and non-negative");

  ExperimentReport r;
  r.name = spec.name;
  const Lattice lat = level_lattice(spec, 0);
  const flow::FlowConfig cfg = level_flow(spec, 0);
  const gauge::GaugeFixConfig gcfg = level_gauge(spec, 0);
  const Connection a0 = generate(spec.data, lat, spec.rank, spec.length);
  const Connection b0 = divergence_free_perturbation(lat, spec.rank, spec.length, spec.data.seed + 1, 2);
  const std::vector<double> times = sample_times(spec.flow.t_end, spec.samples);

  bool zero_exact = true;
  bool have_zero = false;
  for (double delta : deltas)
  {
    LevelMeasurement m = measurement(spec, 0);
    m.values["delta"] = delta;
    try
    {
      Connection a2 = a0;
      a2.axpy(delta, b0);
      const auto first = gauge::coulomb_fix_time_family(sample_flow(a0, cfg, times), times, gcfg);
      const auto second = gauge::coulomb_fix_time_family(sample_flow(a2, cfg, times), times, gcfg);
      double sup_b = 0.0, b_start = 0.0, sup_sigma = 0.0;
      bool exact = true;
      for (std::size_t k = 0; k < times.size(); ++k)
      {
        const Connection b = second.samples[k].a - first.samples[k].a;
        const double nb = field::w12(b);
        exact = exact && second.samples[k].a == first.samples[k].a;
        if (k == 0)
          b_start = nb;
        sup_b = std::max(sup_b, nb);
      }
      for (std::size_t k = 0; k < first.velocities.size(); ++k)
      {
        exact = exact && first.velocities[k] == second.velocities[k];
        sup_sigma = std::max(sup_sigma, field::l2(first.velocities[k] - second.velocities[k]));
      }
      m.values["sup_b_w12"] = sup_b;
      m.values["b0_w12"] = b_start;
      m.values["sup_sigma_l2"] = sup_sigma;
      m.values["amplification"] = b_start > 0.0 ? sup_b / b_start : 0.0;
      m.values["linear_coefficient"] = delta > 0.0 ? sup_b / delta : 0.0;
      m.values["max_residual"] = std::max(first.max_residual, second.max_residual);
      if (delta == 0.0)
      {
        have_zero = true;
        zero_exact = zero_exact && exact;
      }
    }
    catch (const ContractError &e)
    {
      r.aborted = true;
      r.abort_reason = e.what();
      r.levels.push_back(std::move(m));
      break;
    }
    r.levels.push_back(std::move(m));
  }
  if (r.aborted)
  {
    maybe_write(spec, r);
    return r;
  }

  if (have_zero)
    add_rule(r, "zero_delta_exact", zero_exact, zero_exact ? "b and sigma vanish bit-exactly" : "twin runs differ");

  std::vector<std::pair<double, double>> linear;
  double worst_amp = 0.0;
  for (const auto &l : r.levels)
  {
    const double d = l.values.at("delta");
    if (d > 0.0)
    {
      worst_amp = std::max(worst_amp, l.values.at("amplification"));
      if (d <= 1e-2 * (1.0 + 1e-12))
        linear.emplace_back(d, l.values.at("linear_coefficient"));
    }
  }
  if (linear.size() >= 2)
  {
    double lo = linear[0].second, hi = linear[0].second;
    for (const auto &[d, c] : linear)
    {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    const double spread = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
    add_rule(r, "delta_linearity", spread <= 0.2, "sup|b|/delta spread " + describe(spread) + " against 0.2");
  }
  if (worst_amp > 0.0)
    add_rule(r, "amplification", worst_amp <= 3.0, "max amplification " + describe(worst_amp) + " against 3");
  maybe_write(spec, r);
  return r;
}

ExperimentReport run_gauge_quality(const ExperimentSpec &spec)
{
  spec.validate();
  ExperimentReport r;
  r.name = spec.name;
  const std::vector<double> times = sample_times(spec.flow.t_end, spec.samples);
  for (int level = 0; level < spec.levels; ++level)
  {
    const Lattice lat = level_lattice(spec, level);
    LevelMeasurement m = measurement(spec, level);
    try
    {
      const Connection a0 = generate(spec.data, lat, spec.rank, spec.length);
      const auto samples = sample_flow(a0, level_flow(spec, level), times);
      const auto fam = gauge::coulomb_fix_time_family(samples, times, level_gauge(spec, level));
      double u_max = 0.0;
      std::size_t iters = 0;
      for (const auto &s : fam.samples)
      {
        u_max = std::max(u_max, s.report.uhlenbeck_ratio);
        iters = std::max(iters, s.report.iterations);
      }
      m.values["max_residual"] = fam.max_residual;
      m.values["velocity_sum"] = fam.velocity_sum;
      m.values["curvature_sum"] = fam.curvature_sum;
      m.values["ratio"] = fam.ratio;
      m.values["uhlenbeck_first"] = fam.samples.front().report.uhlenbeck_ratio;
      m.values["uhlenbeck_last"] = fam.samples.back().report.uhlenbeck_ratio;
      m.values["uhlenbeck_max"] = u_max;
      m.values["max_iterations"] = static_cast<double>(iters);
    }
    catch (const ContractError &e)
    {
      r.aborted = true;
      r.abort_reason = e.what();
      break;
    }
    r.levels.push_back(std::move(m));
  }
  if (r.aborted)
  {
    maybe_write(spec, r);
    return r;
  }
  double worst = 0.0;
  bool finite = true;
  for (const auto &l : r.levels)
  {
    worst = std::max(worst, l.values.at("max_residual"));
    finite = finite && std::isfinite(l.values.at("ratio"));
  }
  add_rule(r, "residual", worst <= 1e-8, "max d*a residual " + describe(worst) + " against 1e-8");
  add_rule(r, "ratio_finite", finite, finite ? "finite at every level" : "non-finite ratio");
  for (std::size_t i = 0; i + 1 < r.levels.size(); ++i)
  {
    const double a = r.levels[i].values.at("ratio"), b = r.levels[i + 1].values.at("ratio");
    const double change = a > 0.0 ? std::abs(b - a) / a : (b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    add_rule(r, "ratio_stability_" + std::to_string(i), change < 0.5,
             "relative change " + describe(change) + " against 0.5");
  }
  maybe_write(spec, r);
  return r;
}

ExperimentReport run_energy_decay(const ExperimentSpec &spec)
{
  spec.validate();
  ExperimentReport r;
  r.name = spec.name;
  bool monotone = true;
  for (int level = 0; level < spec.levels; ++level)
  {
    const Lattice lat = level_lattice(spec, level);
    const flow::FlowConfig cfg = level_flow(spec, level);
    LevelMeasurement m = measurement(spec, level);
    std::vector<flow::DiagnosticRow> rows;
    double worst_increase = 0.0;
    try
    {
      flow::FlowState st(generate(spec.data, lat, spec.rank, spec.length), cfg);
      rows.push_back(st.history().back());
      const double e0 = st.initial_energy();
      st = flow::integrate(std::move(st), cfg, [&](const flow::FlowState &s) {
        rows.push_back(s.history().back());
        const double inc = rows.back().ym_energy - rows[rows.size() - 2].ym_energy;
        worst_increase = std::max(worst_increase, inc / std::max(e0, std::numeric_limits<double>::min()));
      });
      m.values["identity_residual"] = flow::energy_identity_residual(st);
      m.values["initial_energy"] = e0;
      m.values["final_energy"] = flow::energy(st.connection());
      m.values["max_relative_increase"] = worst_increase;
      m.values["steps"] = static_cast<double>(st.steps());
      monotone = monotone && worst_increase <= 1e-12;
    }
    catch (const flow::SingularStop &stop)
    {
      r.aborted = true;
      r.abort_reason = stop.what();
    }
    if (!spec.output.empty())
    {
      const auto dir = spec.output / (spec.name + "_level" + std::to_string(level));
      std::filesystem::create_directories(dir);
      std::ofstream out(dir / "diagnostics.csv");
      out << flow::diagnostic_csv_header << '\n';
      for (const auto &row : rows)
        flow::write_csv_row(out, row);
    }
    if (r.aborted)
      break;
    r.levels.push_back(std::move(m));
  }
  if (!r.aborted)
  {
    add_rule(r, "monotone_energy", monotone, "per-step energy increase within 1e-12 of the initial energy");
    record_orders(r, "identity_residual");
    order_rule(r, "identity_residual", 1.0, 1e-14);
  }
  maybe_write(spec, r);
  return r;
}

} // namespace ymf::harness
