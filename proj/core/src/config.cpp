#include "alignlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <toml.hpp>

#include "alignlab/error.hpp"

namespace alignlab {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "hetero",         "meanfield",        "monokinetic",    "maxwellian",   "relaxation",
      "threshold",      "simulate-micro",   "simulate-kinetic", "simulate-macro", "spectral-gap"};
  return names;
}

RunConfig default_config(const std::string& experiment) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw ConfigError("unknown experiment '" + experiment + "'");
  RunConfig c;
  c.experiment.name = experiment;
  if (experiment == "hetero") {
    c.kernel.beta = 40.0;
    c.averaging.variant = "favre";
    c.micro.dim = 2;
    c.micro.lambda = 10.0;
    c.micro.t_end = 1.0;
    c.micro.dt = 0.005;
    c.micro.grid = 64;
    c.micro.velocity_spread = 0.05;
  } else if (experiment == "meanfield") {
    c.kernel.beta = 1.0;
    c.micro.model = "w";
    c.micro.velocity_spread = 0.0;
    c.micro.t_end = 2.0;
    c.micro.dt = 0.02;
  } else if (experiment == "monokinetic") {
    c.kinetic.regime = "monokinetic";
    c.kinetic.t_end = 1.0;
    c.kinetic.vmax = 3.0;
    c.macro.pressure = "pressureless";
  } else if (experiment == "maxwellian") {
    c.kinetic.regime = "maxwellian";
    c.kinetic.t_end = 1.0;
    c.macro.pressure = "isentropic";
  } else if (experiment == "relaxation") {
    c.kernel.family = "bochner";
    c.kinetic.regime = "fpa";
    c.kinetic.nx = 64;
    c.kinetic.nv = 128;
    c.kinetic.t_end = 8.0;
    c.kinetic.u_amplitude = 0.2;
  } else if (experiment == "simulate-kinetic") {
    c.kinetic.t_end = 1.0;
  } else if (experiment == "spectral-gap") {
    c.kernel.family = "bochner";
    c.kinetic.nx = 64;
  }
  return c;
}

namespace {

using Setter = std::function<void(const toml::node&, const std::string&)>;

double as_double(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError("'" + key + "' must be a number");
}

long long as_integer(const toml::node& n, const std::string& key) {
  if (n.is_integer()) return *n.value<long long>();
  if (n.is_floating_point()) {
    const double d = *n.value<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  throw ConfigError("'" + key + "' must be an integer");
}

std::string as_string(const toml::node& n, const std::string& key) {
  if (auto v = n.value<std::string>()) return *v;
  throw ConfigError("'" + key + "' must be a string");
}

bool as_bool(const toml::node& n, const std::string& key) {
  if (auto v = n.value<bool>()) return *v;
  throw ConfigError("'" + key + "' must be a boolean");
}

template <class T, class Conv>
std::vector<T> as_array(const toml::node& n, const std::string& key, Conv conv) {
  const auto* arr = n.as_array();
  if (!arr) throw ConfigError("'" + key + "' must be an array");
  std::vector<T> out;
  for (const auto& e : *arr) out.push_back(static_cast<T>(conv(e, key)));
  return out;
}

std::map<std::string, Setter> setters(RunConfig& c) {
  std::map<std::string, Setter> s;
  auto num = [&](const char* key, double& ref) {
    s[key] = [&ref](const toml::node& n, const std::string& k) { ref = as_double(n, k); };
  };
  auto integer = [&](const char* key, int& ref) {
    s[key] = [&ref](const toml::node& n, const std::string& k) {
      const long long v = as_integer(n, k);
      if (v < -2147483647LL || v > 2147483647LL) throw ConfigError("'" + k + "' is out of range");
      ref = static_cast<int>(v);
    };
  };
  auto str = [&](const char* key, std::string& ref) {
    s[key] = [&ref](const toml::node& n, const std::string& k) { ref = as_string(n, k); };
  };
  auto flag = [&](const char* key, bool& ref) {
    s[key] = [&ref](const toml::node& n, const std::string& k) { ref = as_bool(n, k); };
  };

  str("kernel.family", c.kernel.family);
  num("kernel.beta", c.kernel.beta);
  num("kernel.value", c.kernel.value);
  integer("kernel.bochner_resolution", c.kernel.bochner_resolution);

  str("averaging.variant", c.averaging.variant);
  integer("averaging.quadrature_resolution", c.averaging.quadrature_resolution);

  auto& m = c.micro;
  integer("micro.dim", m.dim);
  str("micro.model", m.model);
  integer("micro.n", m.n);
  num("micro.lambda", m.lambda);
  num("micro.t_end", m.t_end);
  num("micro.dt", m.dt);
  integer("micro.grid", m.grid);
  integer("micro.every", m.every);
  s["micro.n_sweep"] = [&m](const toml::node& n, const std::string& k) {
    m.n_sweep = as_array<int>(n, k, as_integer);
  };
  num("micro.mass_ratio", m.mass_ratio);
  integer("micro.small_count", m.small_count);
  integer("micro.large_count", m.large_count);
  flag("micro.single_flock", m.single_flock);
  num("micro.velocity_spread", m.velocity_spread);
  num("micro.u_amplitude", m.u_amplitude);
  num("micro.rho_amplitude", m.rho_amplitude);
  num("micro.w_amplitude", m.w_amplitude);

  auto& k = c.kinetic;
  integer("kinetic.nx", k.nx);
  integer("kinetic.nv", k.nv);
  num("kinetic.vmax", k.vmax);
  num("kinetic.lambda", k.lambda);
  num("kinetic.t_end", k.t_end);
  num("kinetic.dt", k.dt);
  num("kinetic.x_cfl", k.x_cfl);
  str("kinetic.regime", k.regime);
  num("kinetic.epsilon", k.epsilon);
  num("kinetic.delta", k.delta);
  num("kinetic.sigma", k.sigma);
  s["kinetic.epsilons"] = [&k](const toml::node& n, const std::string& key) {
    k.epsilons = as_array<double>(n, key, as_double);
  };
  num("kinetic.delta_exponent", k.delta_exponent);
  s["kinetic.sigmas"] = [&k](const toml::node& n, const std::string& key) {
    k.sigmas = as_array<double>(n, key, as_double);
  };
  num("kinetic.rho_amplitude", k.rho_amplitude);
  num("kinetic.u_amplitude", k.u_amplitude);
  num("kinetic.w_variation", k.w_variation);
  num("kinetic.ill_prepared", k.ill_prepared);
  integer("kinetic.every", k.every);

  auto& a = c.macro;
  integer("macro.n", a.n);
  num("macro.t_end", a.t_end);
  num("macro.dt", a.dt);
  num("macro.lambda", a.lambda);
  str("macro.pressure", a.pressure);
  num("macro.rho_amplitude", a.rho_amplitude);
  num("macro.u_amplitude", a.u_amplitude);
  num("macro.sub_amplitude", a.sub_amplitude);
  num("macro.super_amplitude", a.super_amplitude);
  integer("macro.every", a.every);

  auto& e = c.experiment;
  str("experiment.name", e.name);
  s["experiment.seed"] = [&e](const toml::node& n, const std::string& key) {
    const long long v = as_integer(n, key);
    if (v < 0) throw ConfigError("'" + key + "' must be nonnegative");
    e.seed = static_cast<std::uint64_t>(v);
  };
  str("experiment.out", e.out);
  num("experiment.residual", e.tol.residual);
  num("experiment.conservation", e.tol.conservation);
  num("experiment.speed_change", e.tol.speed_change);
  num("experiment.spread_decay", e.tol.spread_decay);
  num("experiment.separation_factor", e.tol.separation_factor);
  num("experiment.exponent_min", e.tol.exponent_min);
  num("experiment.exponent_max", e.tol.exponent_max);
  num("experiment.entropy_growth", e.tol.entropy_growth);
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return true;
  return false;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& experiment,
                       const std::string& source) {
  RunConfig c = default_config(experiment);
  toml::table doc;
  try {
    doc = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw ConfigError(os.str());
  }
  auto table = setters(c);
  for (const auto& [section, node] : doc) {
    const std::string sec(section.str());
    const auto* t = node.as_table();
    if (!t) throw ConfigError("top-level key '" + sec + "' must be a section");
    for (const auto& [key, value] : *t) {
      const std::string full = sec + "." + std::string(key.str());
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError("unknown configuration key '" + full + "'");
      it->second(value, full);
    }
  }
  if (c.experiment.name != experiment)
    throw ConfigError("config names experiment '" + c.experiment.name + "' but '" + experiment +
                      "' was requested");
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& experiment) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment, path.string());
}

void validate(const RunConfig& c) {
  const auto& k = c.kernel;
  require(one_of(k.family, {"inverse_power", "constant", "bochner"}),
          "kernel.family must be inverse_power, constant or bochner");
  require(k.beta > 0.0, "kernel.beta must be positive");
  require(k.value > 0.0, "kernel.value must be positive");
  require(k.bochner_resolution >= 4, "kernel.bochner_resolution must be at least 4");
  require(one_of(c.averaging.variant, {"cs_mt", "favre", "mphi"}),
          "averaging.variant must be cs_mt, favre or mphi");
  require(c.averaging.quadrature_resolution >= 4, "averaging.quadrature_resolution must be >= 4");

  const auto& m = c.micro;
  require(m.dim == 1 || m.dim == 2, "micro.dim must be 1 or 2");
  require(one_of(m.model, {"cs", "mt", "w", "s"}), "micro.model must be cs, mt, w or s");
  require(m.n >= 2, "micro.n must be at least 2");
  require(m.lambda > 0.0, "micro.lambda must be positive");
  require(m.t_end > 0.0 && m.dt > 0.0, "micro.t_end and micro.dt must be positive");
  require(m.grid >= 4, "micro.grid must be at least 4");
  require(m.every >= 1, "micro.every must be at least 1");
  require(m.n_sweep.size() >= 2, "micro.n_sweep needs at least two entries");
  for (int n : m.n_sweep) require(n >= 2 && 2 * n <= 2000, "micro.n_sweep entries must lie in [2, 1000]");
  require(m.mass_ratio > 0.0, "micro.mass_ratio must be positive");
  require(m.small_count >= 2 && m.large_count >= 2, "flock counts must be at least 2");
  require(m.velocity_spread >= 0.0, "micro.velocity_spread must be nonnegative");
  require(m.rho_amplitude >= 0.0 && m.rho_amplitude < 1.0, "micro.rho_amplitude must lie in [0, 1)");
  require(m.w_amplitude >= 0.0 && m.w_amplitude < 1.0, "micro.w_amplitude must lie in [0, 1)");

  const auto& q = c.kinetic;
  require(q.nx >= 8 && q.nv >= 8, "kinetic.nx and kinetic.nv must be at least 8");
  require(q.vmax > 0.0, "kinetic.vmax must be positive");
  require(q.lambda >= 0.0, "kinetic.lambda must be nonnegative");
  require(q.t_end > 0.0 && q.dt >= 0.0, "kinetic.t_end must be positive, kinetic.dt nonnegative");
  require(q.x_cfl > 0.0 && q.x_cfl <= 1.0, "kinetic.x_cfl must lie in (0, 1]");
  require(one_of(q.regime, {"vlasov", "monokinetic", "maxwellian", "fpa"}),
          "kinetic.regime must be vlasov, monokinetic, maxwellian or fpa");
  require(q.epsilon > 0.0 && q.delta > 0.0 && q.sigma > 0.0,
          "kinetic.epsilon, kinetic.delta and kinetic.sigma must be positive");
  require(q.epsilons.size() >= 2, "kinetic.epsilons needs at least two entries");
  for (double e : q.epsilons) require(e > 0.0, "kinetic.epsilons entries must be positive");
  require(q.delta_exponent > 1.0, "kinetic.delta_exponent must exceed 1 (delta = o(epsilon))");
  require(q.sigmas.size() >= 2, "kinetic.sigmas needs at least two entries");
  for (double s : q.sigmas) require(s > 0.0, "kinetic.sigmas entries must be positive");
  require(q.rho_amplitude >= 0.0 && q.rho_amplitude < 1.0, "kinetic.rho_amplitude must lie in [0, 1)");
  require(q.w_variation >= 0.0 && q.w_variation < 1.0, "kinetic.w_variation must lie in [0, 1)");
  require(q.ill_prepared >= 0.0, "kinetic.ill_prepared must be nonnegative");
  require(q.every >= 1, "kinetic.every must be at least 1");

  const auto& a = c.macro;
  require(a.n >= 8 && a.n % 2 == 0, "macro.n must be even and at least 8");
  require(a.t_end > 0.0 && a.dt > 0.0, "macro.t_end and macro.dt must be positive");
  require(a.lambda > 0.0, "macro.lambda must be positive");
  require(one_of(a.pressure, {"pressureless", "isentropic"}),
          "macro.pressure must be pressureless or isentropic");
  require(a.rho_amplitude >= 0.0 && a.rho_amplitude < 1.0, "macro.rho_amplitude must lie in [0, 1)");
  require(a.every >= 1, "macro.every must be at least 1");

  const auto& t = c.experiment.tol;
  require(t.residual > 0.0 && t.conservation > 0.0, "tolerances must be positive");
  require(t.exponent_min < t.exponent_max, "experiment.exponent_min must be below exponent_max");
  require(!c.experiment.out.empty(), "experiment.out must not be empty");
}

CommunicationKernel make_kernel(const KernelConfig& k, const TorusGeometry& geom) {
  if (k.family == "constant") return CommunicationKernel::constant(k.value);
  const auto base = CommunicationKernel::inverse_power(k.beta, geom);
  if (k.family == "bochner") return bochner_square(base, geom, k.bochner_resolution);
  return base;
}

AveragingModel make_averaging(const AveragingConfig& a, const CommunicationKernel& k) {
  if (a.variant == "cs_mt") return AveragingModel::cs_mt(k);
  if (a.variant == "mphi") return AveragingModel::mphi(k, a.quadrature_resolution);
  return AveragingModel::favre(k);
}

}  // namespace alignlab
