#include <algorithm>
#include <limits>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ymf/analysis.hpp"
#include "ymf/cli.hpp"
#include "ymf/errors.hpp"
#include "ymf/field/norms.hpp"
#include "ymf/field/snapshot.hpp"

namespace ymf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  json summary = json::object();
  std::vector<harness::Rule> rules;
  std::optional<json> error;
};

json to_json(const harness::Rule &r) { return {{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}}; }

json to_json(const harness::ExperimentReport &r)
{
  json levels = json::array();
  for (const auto &l : r.levels)
  {
    json v = json::object();
    for (const auto &[k, x] : l.values)
      v[k] = x;
    levels.push_back({{"extent", l.extent}, {"h", l.h}, {"dt", l.dt}, {"values", v}});
  }
  json orders = json::object();
  for (const auto &[k, o] : r.orders)
    orders[k] = o;
  json out = {{"levels", levels}, {"orders", orders}, {"aborted", r.aborted}};
  if (r.aborted)
    out["abort_reason"] = r.abort_reason;
  return out;
}

json to_json(const ContractError &e)
{
  return {{"module", e.module()}, {"contract", e.contract()}, {"message", e.what()}};
}

std::string describe(double v)
{
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string zero_padded(int index, std::size_t width)
{
  std::string s = std::to_string(index);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

field::Lattice base_lattice(const RunConfig &c) { return harness::level_lattice(c.spec, 0); }

Outcome flow_run(const RunConfig &c)
{
  Outcome o;
  const field::Lattice lat = base_lattice(c);
  const flow::FlowConfig fc = harness::level_flow(c.spec, 0);
  const fs::path snaps = c.output / "snapshots";
  if (c.snapshot_every > 0)
    fs::create_directories(snaps);
  std::ofstream csv(c.output / "diagnostics.csv");
  csv << flow::diagnostic_csv_header << '\n';

  flow::FlowState st(harness::generate(c.spec.data, lat, c.spec.rank, c.spec.length), fc);
  const double e0 = st.initial_energy();
  double worst = 0.0, previous = e0;
  flow::write_csv_row(csv, st.history().back());
  auto snapshot = [&](const flow::FlowState &s) {
    if (c.snapshot_every > 0 && s.steps() % c.snapshot_every == 0)
      field::write_snapshot(snaps / ("step_" + zero_padded(static_cast<int>(s.steps()), 6) + ".ymf"), s.connection());
  };
  snapshot(st);
  try
  {
    st = flow::integrate(std::move(st), fc, [&](const flow::FlowState &s) {
      flow::write_csv_row(csv, s.history().back());
      const double e = s.history().back().ym_energy;
      worst = std::max(worst, (e - previous) / std::max(e0, std::numeric_limits<double>::min()));
      previous = e;
      snapshot(s);
    });
  }
  catch (const flow::SingularStop &stop)
  {
    o.summary["singular_stop"] = {{"time", stop.time()},
                                  {"step", stop.step()},
                                  {"site", stop.site()},
                                  {"max_curvature", stop.max_curvature()}};
    o.rules.push_back({"completed", false, stop.what()});
    return o;
  }
  field::write_snapshot(c.output / "final.ymf", st.connection());
  o.summary["steps"] = st.steps();
  o.summary["final_time"] = st.time();
  o.summary["initial_energy"] = e0;
  o.summary["final_energy"] = flow::energy(st.connection());
  o.summary["energy_identity_residual"] = flow::energy_identity_residual(st);
  o.rules.push_back({"completed", true, "reached t_end"});
  o.rules.push_back({"monotone_energy", worst <= 1e-12, "max relative per-step increase " + describe(worst)});
  return o;
}

void write_gauge_report(const fs::path &path, const gauge::GaugeFixReport &r)
{
  std::ofstream out(path);
  out.precision(17);
  out << "iter,residual,u_w12,contraction_ratio\n";
  out << 0 << ',' << r.initial_residual << ",0,\n";
  for (std::size_t k = 0; k < r.residual_history.size(); ++k)
  {
    out << k + 1 << ',' << r.residual_history[k] << ',' << r.u_norm_history[k] << ',';
    if (k >= 1 && k - 1 < r.contraction_ratios.size())
      out << r.contraction_ratios[k - 1];
    out << '\n';
  }
}

Outcome gauge_fix(const RunConfig &c, std::ostream &log)
{
  Outcome o;
  field::Connection a = [&] {
    if (!c.input)
      return harness::generate(c.spec.data, base_lattice(c), c.spec.rank, c.spec.length);
    auto f = field::read_snapshot(*c.input);
    if (!std::holds_alternative<field::Connection>(f))
      throw ContractError("cli", "gauge-fix", "input snapshot does not hold a connection");
    return std::get<field::Connection>(std::move(f));
  }();
  gauge::GaugeFixConfig g = c.spec.gauge;
  const field::Lattice &lat = a.lattice();
  if (c.spec.patch_radius)
  {
    field::Coordinates mid{};
    for (int mu = 0; mu < lat.dimension(); ++mu)
      mid[mu] = lat.extent(mu) / 2;
    g.domain = gauge::Domain::ball(field::BallPatch(lat, lat.site(mid), *c.spec.patch_radius), c.spec.patch_bc);
  }
  gauge::GaugeFixReport report;
  try
  {
    const auto result = gauge::coulomb_fix(a, g);
    report = result.report;
    field::write_snapshot(c.output / "gauge_fixed.ymf", result.a);
    field::write_snapshot(c.output / "gauge_transform.ymf", result.s);
  }
  catch (const gauge::GaugeFixFailure &f)
  {
    report = f.report();
  }
  write_gauge_report(c.output / "gauge_report.csv", report);
  o.summary["iterations"] = report.iterations;
  o.summary["final_residual"] = report.final_residual();
  o.summary["uhlenbeck_ratio"] = report.uhlenbeck_ratio;
  o.summary["uhlenbeck_degenerate"] = report.uhlenbeck_degenerate;
  o.summary["converged"] = report.converged;
  log << "uhlenbeck_ratio=" << report.uhlenbeck_ratio << " iterations=" << report.iterations
      << " converged=" << (report.converged ? "true" : "false") << '\n';
  o.rules.push_back({"converged", report.converged,
                     "final residual " + describe(report.final_residual()) + " after " +
                       std::to_string(report.iterations) + " iterations"});
  return o;
}

Outcome experiment(const std::string &command, const RunConfig &c, std::ostream &log)
{
  Outcome o;
  harness::ExperimentSpec spec = c.spec;
  spec.output = c.output;
  harness::ExperimentReport r;
  if (command == "verify-equivalence")
    r = harness::run_equivalence(spec);
  else if (command == "verify-uniqueness")
    r = harness::run_uniqueness(spec, c.deltas);
  else if (command == "verify-energy")
    r = harness::run_energy_decay(spec);
  else
    r = harness::run_gauge_quality(spec);
  o.summary["report"] = to_json(r);
  o.rules = r.rules;
  if (r.aborted)
    o.rules.push_back({"completed", false, r.abort_reason});
  if (command == "verify-uniqueness")
  {
    log << "delta,sup_b_w12,linear_coefficient,amplification\n";
    log.precision(6);
    for (const auto &l : r.levels)
      if (l.values.count("sup_b_w12"))
        log << l.values.at("delta") << ',' << l.values.at("sup_b_w12") << ',' << l.values.at("linear_coefficient")
            << ',' << l.values.at("amplification") << '\n';
  }
  return o;
}

json monitor_json(const analysis::MonitorReport &m)
{
  json j = {{"name", m.name}, {"constant", m.constant}, {"degenerate", m.degenerate}, {"pass", m.pass},
            {"notes", m.notes}};
  if (m.bound)
    j["bound"] = *m.bound;
  if (m.hypothesis)
    j["hypothesis"] = *m.hypothesis;
  return j;
}

Outcome monitors(const RunConfig &c)
{
  Outcome o;
  const field::Lattice lat = base_lattice(c);
  const auto times = harness::sample_times(c.spec.flow.t_end, c.spec.samples);
  analysis::RunHistory history{times, harness::sample_flow(harness::generate(c.spec.data, lat, c.spec.rank,
                                                                             c.spec.length),
                                                           harness::level_flow(c.spec, 0), times)};
  const double radius = c.monitors.radius.value_or(c.spec.length / 8);
  const double r0 = c.monitors.r0.value_or(c.spec.length / 8);
  field::Coordinates mid{};
  for (int mu = 0; mu < lat.dimension(); ++mu)
    mid[mu] = lat.extent(mu) / 2;
  const field::Site center = lat.site(mid);
  auto bound = [&](const std::string &k) -> std::optional<double> {
    auto it = c.monitors.bounds.find(k);
    return it == c.monitors.bounds.end() ? std::nullopt : std::optional<double>(it->second);
  };
  json reports = json::array();
  auto emit = [&](const analysis::MonitorReport &m) {
    std::ofstream out(c.output / ("monitor_" + m.name + ".csv"));
    analysis::write_csv(out, m);
    reports.push_back(monitor_json(m));
    o.rules.push_back({m.name, m.pass, "measured constant " + describe(m.constant)});
  };
  for (const auto &name : c.monitors.selected)
  {
    if (name == "local_energy")
      emit(analysis::local_energy_monitor(history, {analysis::make_patch_pair(lat, center, radius)},
                                          bound("local_energy")));
    else if (name == "eps_regularity")
      emit(analysis::eps_regularity_monitor(history, field::BallPatch(lat, center, radius), r0,
                                            bound("eps_regularity")));
    else if (name == "bianchi")
      emit(analysis::bianchi_monitor(history));
    else if (name == "weitzenboeck")
      emit(analysis::weitzenboeck_monitor(history));
    else if (name == "singular")
    {
      const std::vector<double> radii =
        c.monitors.radii.empty() ? std::vector<double>{radius / 2, radius} : c.monitors.radii;
      const auto flags = analysis::singular_detector(history, c.monitors.eps0, radii, c.monitors.late_fraction);
      std::ofstream out(c.output / "monitor_singular.csv");
      out.precision(17);
      out << "site";
      for (std::size_t k = 0; k < radii.size(); ++k)
        out << ",concentration_r" << k;
      out << '\n';
      json sites = json::array();
      for (const auto &f : flags)
      {
        out << f.site;
        for (double v : f.concentration)
          out << ',' << v;
        out << '\n';
        sites.push_back(f.site);
      }
      reports.push_back({{"name", "singular"}, {"flagged_sites", sites}, {"eps0", c.monitors.eps0}, {"radii", radii}});
      o.rules.push_back({"singular", flags.empty(), std::to_string(flags.size()) + " flagged sites"});
    }
  }
  o.summary["monitors"] = reports;
  return o;
}

} // namespace

int run(const std::string &command, const RunConfig &config, std::ostream &log)
{
  if (std::find(std::begin(commands), std::end(commands), command) == std::end(commands))
    throw ConfigError({"unknown command '" + command + "'"});
  fs::create_directories(config.output);
  Outcome o;
  try
  {
    if (command == "flow-run")
      o = flow_run(config);
    else if (command == "gauge-fix")
      o = gauge_fix(config, log);
    else if (command == "monitors")
      o = monitors(config);
    else
      o = experiment(command, config, log);
  }
  catch (const ContractError &e)
  {
    o.error = to_json(e);
    log << "error [" << e.module() << "::" << e.contract() << "]: " << e.what() << '\n';
  }

  bool pass = !o.error.has_value();
  json rules = json::array();
  for (const auto &r : o.rules)
  {
    pass = pass && r.pass;
    rules.push_back(to_json(r));
    log << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  }
  const int code = o.error ? 2 : (pass ? 0 : 1);
  json summary = o.summary;
  summary["command"] = command;
  summary["name"] = config.spec.name;
  summary["serial"] = config.serial;
  summary["rules"] = rules;
  summary["pass"] = pass;
  summary["exit_code"] = code;
  summary["error"] = o.error ? *o.error : json(nullptr);
  std::ofstream(config.output / "summary.json") << summary.dump(2) << '\n';
  return code;
}

} // namespace ymf::cli
