#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ymf/cli.hpp"
#include "ymf/errors.hpp"
#include "ymf/field/patch.hpp"

namespace ymf::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string> &v)
{
  std::string out;
  for (const auto &s : v)
    out += (out.empty() ? "" : "\n") + s;
  return out;
}

std::size_t edit_distance(const std::string &a, const std::string &b)
{
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i)
  {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
    {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string fmt(double v)
{
  std::ostringstream s;
  s << v;
  return s.str();
}

/// One JSON object of the schema: rejects unknown keys and reads typed values,
/// recording every violation instead of stopping.
class Section
{
public:
  Section(const json *node, std::string path, std::vector<std::string> &errors, std::vector<std::string> keys)
    : path_(std::move(path)), errors_(errors), keys_(std::move(keys))
  {
    if (!node)
      return;
    if (!node->is_object())
    {
      fail(path_.empty() ? "document" : path_, "must be an object");
      return;
    }
    node_ = node;
    for (const auto &[k, v] : node->items())
      if (std::find(keys_.begin(), keys_.end(), k) == keys_.end())
        errors_.push_back("unknown key '" + qualified(k) + "'; did you mean '" + qualified(nearest_key(k, keys_)) +
                          "'?");
  }

  const json *child(const std::string &key) const
  {
    if (!node_ || !node_->contains(key))
      return nullptr;
    return &node_->at(key);
  }

  std::string qualified(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

  void fail(const std::string &key, const std::string &what) { errors_.push_back(key + ": " + what); }

  std::optional<double> number(const std::string &key)
  {
    const json *v = child(key);
    if (!v)
      return std::nullopt;
    if (!v->is_number())
    {
      fail(qualified(key), "must be a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<long long> integer(const std::string &key)
  {
    const json *v = child(key);
    if (!v)
      return std::nullopt;
    if (!v->is_number_integer())
    {
      fail(qualified(key), "must be an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<std::string> string(const std::string &key)
  {
    const json *v = child(key);
    if (!v)
      return std::nullopt;
    if (!v->is_string())
    {
      fail(qualified(key), "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::string> choice(const std::string &key, const std::vector<std::string> &options)
  {
    auto s = string(key);
    if (s && std::find(options.begin(), options.end(), *s) == options.end())
    {
      std::string list;
      for (const auto &o : options)
        list += (list.empty() ? "" : ", ") + o;
      fail(qualified(key), "'" + *s + "' is not one of {" + list + "}");
      return std::nullopt;
    }
    return s;
  }

  std::optional<std::vector<double>> numbers(const std::string &key)
  {
    const json *v = child(key);
    if (!v)
      return std::nullopt;
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json &x) { return x.is_number(); }))
    {
      fail(qualified(key), "must be an array of numbers");
      return std::nullopt;
    }
    return v->get<std::vector<double>>();
  }

  std::optional<std::vector<std::string>> strings(const std::string &key)
  {
    const json *v = child(key);
    if (!v)
      return std::nullopt;
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json &x) { return x.is_string(); }))
    {
      fail(qualified(key), "must be an array of strings");
      return std::nullopt;
    }
    return v->get<std::vector<std::string>>();
  }

private:
  const json *node_ = nullptr;
  std::string path_;
  std::vector<std::string> &errors_;
  std::vector<std::string> keys_;
};

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
  : std::runtime_error("invalid configuration:\n" + join(violations)), violations_(std::move(violations))
{}

std::string nearest_key(const std::string &key, const std::vector<std::string> &candidates)
{
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto &c : candidates)
    if (const std::size_t d = edit_distance(key, c); d < best_d)
    {
      best = c;
      best_d = d;
    }
  return best;
}

RunConfig parse_config(const json &doc, const std::filesystem::path &base)
{
  std::vector<std::string> errors;
  RunConfig cfg;
  auto &spec = cfg.spec;

  Section root(&doc, "", errors,
               {"name", "lattice", "group", "initial_data", "flow", "gauge", "experiment", "monitors", "output",
                "input"});
  if (auto v = root.string("name"))
    spec.name = *v;
  if (spec.name.empty() || spec.name.find('/') != std::string::npos)
    root.fail("name", "must be a non-empty file name");

  // lattice
  Section lat(root.child("lattice"), "lattice", errors, {"dimension", "extents", "spacing"});
  if (!root.child("lattice"))
    errors.push_back("lattice: required section is missing");
  double spacing = 1.0 / spec.extent;
  if (auto v = lat.integer("dimension"))
  {
    if (*v < 2 || *v > 4)
      lat.fail("lattice.dimension", "must lie in {2, 3, 4}");
    else
      spec.dimension = static_cast<int>(*v);
  }
  if (const json *ex = lat.child("extents"))
  {
    if (!ex->is_array() || ex->empty() ||
        !std::all_of(ex->begin(), ex->end(), [](const json &x) { return x.is_number_integer(); }))
      lat.fail("lattice.extents", "must be a non-empty array of integers");
    else
    {
      const auto e = ex->get<std::vector<long long>>();
      bool ok = true;
      if (static_cast<int>(e.size()) != spec.dimension)
      {
        lat.fail("lattice.extents", "has " + std::to_string(e.size()) + " entries but dimension is " +
                                        std::to_string(spec.dimension));
        ok = false;
      }
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] < 4 || e[i] % 2 != 0)
        {
          lat.fail("lattice.extents[" + std::to_string(i) + "]",
                   std::to_string(e[i]) + " must be even and at least 4");
          ok = false;
        }
      if (std::adjacent_find(e.begin(), e.end(), std::not_equal_to<>()) != e.end())
      {
        lat.fail("lattice.extents", "must all be equal (cubic torus)");
        ok = false;
      }
      if (ok)
        spec.extent = static_cast<int>(e[0]);
    }
  }
  else
    lat.fail("lattice.extents", "is required");
  spacing = 1.0 / spec.extent;
  if (auto v = lat.number("spacing"))
  {
    if (!positive(*v))
      lat.fail("lattice.spacing", "must be positive");
    else
      spacing = *v;
  }
  spec.length = spacing * spec.extent;

  // group
  if (auto g = root.choice("group", {"u1", "su2"}))
    spec.rank = *g == "u1" ? 1 : 2;

  // initial data
  Section data(root.child("initial_data"), "initial_data", errors,
               {"generator", "amplitude", "seed", "band", "wave_number"});
  if (auto g = data.choice("generator", {"zero", "abelian_mode", "random_smooth", "pure_gauge"}))
  {
    if (*g == "zero")
      spec.data.kind = harness::Generator::zero;
    else if (*g == "abelian_mode")
      spec.data.kind = harness::Generator::abelian_mode;
    else if (*g == "random_smooth")
      spec.data.kind = harness::Generator::random_smooth;
    else
      spec.data.kind = harness::Generator::pure_gauge;
  }
  if (auto v = data.number("amplitude"))
  {
    if (!(*v >= 0.0) || !std::isfinite(*v))
      data.fail("initial_data.amplitude", "must be finite and non-negative");
    else
      spec.data.amplitude = *v;
  }
  if (auto v = data.integer("seed"))
  {
    if (*v < 0)
      data.fail("initial_data.seed", "must be non-negative");
    else
      spec.data.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = data.integer("band"))
    spec.data.band = static_cast<int>(*v);
  if ((spec.data.kind == harness::Generator::random_smooth || spec.data.kind == harness::Generator::pure_gauge) &&
      (spec.data.band < 2 || 4 * (spec.data.band - 1) >= spec.extent))
    data.fail("initial_data.band", "must satisfy 2 <= band and band - 1 < extent / 4 (got " + std::to_string(spec.data.band) +
                                       " for extent " + std::to_string(spec.extent) + ")");
  if (auto v = data.integer("wave_number"))
  {
    if (*v < 1 || 4 * *v > spec.extent)
      data.fail("initial_data.wave_number", "must satisfy 1 <= k <= extent / 4");
    else
      spec.data.wave_number = static_cast<int>(*v);
  }

  // flow
  Section fl(root.child("flow"), "flow", errors, {"variant", "scheme", "dt", "cfl_safety", "t_end", "reproject_every"});
  if (auto v = fl.choice("variant", {"raw", "deturck"}))
    spec.flow.variant = *v == "raw" ? flow::Variant::raw : flow::Variant::deturck;
  if (auto v = fl.choice("scheme", {"euler", "rk4"}))
    spec.flow.scheme = *v == "euler" ? flow::Scheme::euler : flow::Scheme::rk4;
  if (const json *dt = fl.child("dt"))
  {
    if (dt->is_string() && dt->get<std::string>() == "auto")
      spec.flow.dt.reset();
    else if (!dt->is_number())
      fl.fail("flow.dt", "must be a positive number or \"auto\"");
    else
    {
      const double v = dt->get<double>();
      const double bound = spacing * spacing / (2.0 * spec.dimension);
      if (!positive(v))
        fl.fail("flow.dt", "must be positive");
      else if (v > bound * (1.0 + 1e-12))
        fl.fail("flow.dt", fmt(v) + " exceeds the explicit stability bound h^2/(2n) = " + fmt(bound));
      else
        spec.flow.dt = v;
    }
  }
  if (auto v = fl.number("cfl_safety"))
  {
    if (!(*v > 0.0 && *v <= 1.0))
      fl.fail("flow.cfl_safety", "must lie in (0, 1]");
    else
      spec.flow.cfl_safety = *v;
  }
  if (auto v = fl.number("t_end"))
  {
    if (!(*v >= 0.0) || !std::isfinite(*v))
      fl.fail("flow.t_end", "must be finite and non-negative");
    else
      spec.flow.t_end = *v;
  }
  if (auto v = fl.integer("reproject_every"))
  {
    if (*v < 1)
      fl.fail("flow.reproject_every", "must be >= 1");
    else
      spec.flow.reproject_every = static_cast<int>(*v);
  }

  // gauge
  Section ga(root.child("gauge"), "gauge", errors,
             {"domain", "radius", "bc", "max_iters", "tol", "damping", "small_field_guard", "drift_guard",
              "solver_tol"});
  const auto domain = ga.choice("domain", {"torus", "ball"});
  if (auto v = ga.choice("bc", {"dirichlet", "neumann"}))
    spec.patch_bc = *v == "dirichlet" ? gauge::BoundaryCondition::dirichlet_zero
                                      : gauge::BoundaryCondition::neumann_mean_zero;
  const auto radius = ga.number("radius");
  if (domain && *domain == "ball")
  {
    if (!radius)
      ga.fail("gauge.radius", "is required when gauge.domain is \"ball\"");
    else if (!positive(*radius))
      ga.fail("gauge.radius", "must be positive");
    else if (*radius > spec.length / 2.0)
      ga.fail("gauge.radius", "must not exceed half the torus side " + fmt(spec.length / 2.0));
    else
      spec.patch_radius = *radius;
  }
  else if (radius)
    ga.fail("gauge.radius", "is only meaningful when gauge.domain is \"ball\"");
  if (auto v = ga.integer("max_iters"))
  {
    if (*v < 1)
      ga.fail("gauge.max_iters", "must be >= 1");
    else
      spec.gauge.max_iters = static_cast<std::size_t>(*v);
  }
  auto positive_field = [&](const char *key, double &target) {
    if (auto v = ga.number(key))
    {
      if (!positive(*v))
        ga.fail(std::string("gauge.") + key, "must be positive");
      else
        target = *v;
    }
  };
  positive_field("tol", spec.gauge.tol);
  positive_field("small_field_guard", spec.gauge.small_field_guard);
  positive_field("drift_guard", spec.gauge.drift_guard);
  positive_field("solver_tol", spec.gauge.solver_tol);
  if (auto v = ga.number("damping"))
  {
    if (!(*v > 0.0 && *v <= 1.0))
      ga.fail("gauge.damping", "must lie in (0, 1]");
    else
      spec.gauge.damping = *v;
  }

  // experiment
  Section ex(root.child("experiment"), "experiment", errors, {"levels", "refinement", "samples", "deltas"});
  if (auto v = ex.integer("levels"))
  {
    if (*v < 1 || *v > 6)
      ex.fail("experiment.levels", "must lie in [1, 6]");
    else
      spec.levels = static_cast<int>(*v);
  }
  if (auto v = ex.choice("refinement", {"joint", "time"}))
    spec.refinement = *v == "joint" ? harness::Refinement::joint : harness::Refinement::time;
  if (auto v = ex.integer("samples"))
  {
    if (*v < 2)
      ex.fail("experiment.samples", "must be >= 2");
    else
      spec.samples = static_cast<int>(*v);
  }
  if (auto v = ex.numbers("deltas"))
  {
    if (v->empty() || !std::all_of(v->begin(), v->end(), [](double d) { return d >= 0.0 && std::isfinite(d); }))
      ex.fail("experiment.deltas", "must be a non-empty list of finite non-negative numbers");
    else
      cfg.deltas = *v;
  }

  // monitors
  Section mo(root.child("monitors"), "monitors", errors,
             {"select", "radius", "r0", "eps0", "radii", "late_fraction", "bounds"});
  if (auto v = mo.strings("select"))
  {
    const std::vector<std::string> known(std::begin(monitor_names), std::end(monitor_names));
    for (const auto &s : *v)
      if (std::find(known.begin(), known.end(), s) == known.end())
        mo.fail("monitors.select", "unknown monitor '" + s + "'; did you mean '" + nearest_key(s, known) + "'?");
    cfg.monitors.selected = *v;
    if (spec.rank == 2 && std::find(v->begin(), v->end(), "weitzenboeck") != v->end())
      mo.fail("monitors.select", "weitzenboeck is only available for group u1");
  }
  if (auto v = mo.number("radius"))
  {
    if (!positive(*v))
      mo.fail("monitors.radius", "must be positive");
    else
      cfg.monitors.radius = *v;
  }
  if (auto v = mo.number("r0"))
  {
    if (!positive(*v))
      mo.fail("monitors.r0", "must be positive");
    else
      cfg.monitors.r0 = *v;
  }
  if (auto v = mo.number("eps0"))
  {
    if (!positive(*v))
      mo.fail("monitors.eps0", "must be positive");
    else
      cfg.monitors.eps0 = *v;
  }
  if (auto v = mo.numbers("radii"))
  {
    if (v->empty() || !std::all_of(v->begin(), v->end(), positive))
      mo.fail("monitors.radii", "must be a non-empty list of positive numbers");
    else
      cfg.monitors.radii = *v;
  }
  if (auto v = mo.number("late_fraction"))
  {
    if (!(*v > 0.0 && *v <= 1.0))
      mo.fail("monitors.late_fraction", "must lie in (0, 1]");
    else
      cfg.monitors.late_fraction = *v;
  }
  {
    Section bo(mo.child("bounds"), "monitors.bounds", errors, {"local_energy", "eps_regularity"});
    for (const char *k : {"local_energy", "eps_regularity"})
      if (auto v = bo.number(k))
      {
        if (!(*v >= 0.0))
          bo.fail(std::string("monitors.bounds.") + k, "must be non-negative");
        else
          cfg.monitors.bounds[k] = *v;
      }
  }

  // output and input
  Section out(root.child("output"), "output", errors, {"directory", "snapshot_every"});
  if (auto v = out.string("directory"))
  {
    if (v->empty())
      out.fail("output.directory", "must be non-empty");
    else
      cfg.output = *v;
  }
  if (auto v = out.integer("snapshot_every"))
  {
    if (*v < 0)
      out.fail("output.snapshot_every", "must be >= 0");
    else
      cfg.snapshot_every = static_cast<std::size_t>(*v);
  }
  Section in(root.child("input"), "input", errors, {"snapshot"});
  if (auto v = in.string("snapshot"))
  {
    std::filesystem::path p(*v);
    if (p.is_relative() && !base.empty())
      p = base / p;
    if (!std::filesystem::is_regular_file(p))
      in.fail("input.snapshot", "file '" + p.string() + "' does not exist");
    else
      cfg.input = p;
  }

  if (errors.empty())
  {
    try
    {
      spec.validate();
      if (spec.patch_radius)
        harness::level_gauge(spec, 0);
    }
    catch (const ContractError &e)
    {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty())
    throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig parse_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError({"config: cannot read '" + path.string() + "'"});
  json doc;
  try
  {
    doc = json::parse(in);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError({"config: " + std::string(e.what())});
  }
  return parse_config(doc, path.parent_path());
}

void apply(RunConfig &config, const Overrides &o)
{
  if (o.output)
    config.output = *o.output;
  if (o.levels)
  {
    if (*o.levels < 1 || *o.levels > 6)
      throw ConfigError({"--levels: must lie in [1, 6]"});
    config.spec.levels = *o.levels;
  }
  config.serial = config.serial || o.serial;
  try
  {
    config.spec.validate();
  }
  catch (const ContractError &e)
  {
    throw ConfigError({e.what()});
  }
}

} // namespace ymf::cli
