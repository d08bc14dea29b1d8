#include "run_config.hpp"

#include <cstdio>
#include <sstream>

#include "wavechaos/errors.hpp"
#include "wavechaos/stats.hpp"

namespace wavechaos::cli {

namespace {

std::vector<Param> noise_params(const std::string& family) {
  return {
      {"family", Kind::text, family, "white, riesz, fractional_product or hybrid"},
      {"d", Kind::integer, 1, "spatial dimension"},
      {"alpha", Kind::number_list, json::array(), "scaling index per group"},
      {"groups", Kind::integer_list, json::array(), "group sizes for hybrid noise"},
  };
}

std::vector<Param> with(std::vector<Param> base, std::vector<Param> extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

bool matches(Kind kind, const json& v) {
  switch (kind) {
    case Kind::number:
      return v.is_number();
    case Kind::integer:
      return v.is_number_integer();
    case Kind::boolean:
      return v.is_boolean();
    case Kind::text:
      return v.is_string();
    case Kind::number_list:
      if (!v.is_array()) return false;
      for (const auto& x : v)
        if (!x.is_number()) return false;
      return true;
    case Kind::integer_list:
      if (!v.is_array()) return false;
      for (const auto& x : v)
        if (!x.is_number_integer()) return false;
      return true;
  }
  return false;
}

double parse_number(const std::string& raw, const std::string& name) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != raw.size()) throw ConfigError("--" + name + ": '" + raw + "' is not a number");
  return v;
}

long long parse_integer(const std::string& raw, const std::string& name) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != raw.size()) throw ConfigError("--" + name + ": '" + raw + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  if (raw.empty()) return parts;
  std::string cur;
  std::istringstream in(raw);
  while (std::getline(in, cur, ',')) parts.push_back(cur);
  return parts;
}

}  // namespace

const std::vector<CommandSchema>& command_schemas() {
  static const std::vector<CommandSchema> schemas = [] {
    const std::vector<Param> sampling{{"samples", Kind::integer, 100000, "Monte Carlo samples"}};
    const std::vector<Param> sim{
        {"t", Kind::number, 1.0, "time"},
        {"theta", Kind::number, 1.0, "coupling theta"},
        {"N", Kind::integer, 1, "chaos truncation (at most 3)"},
        {"modes", Kind::integer, 64, "number of indicator boxes (even)"},
        {"half-width", Kind::number, 0.0, "box range [-w, w]; 0 uses t"},
        {"replicates", Kind::integer, 100000, "number of samples of u_N(t, 0)"},
        {"bootstrap", Kind::integer, 200, "bootstrap resamples for standard errors"},
    };
    std::vector<CommandSchema> s;
    s.push_back(
        {"variational", "maximize the variational functional on a grid",
         with(noise_params("delta0"), {{"theta", Kind::number, 1.0, "Dirichlet weight theta"},
                                       {"scale", Kind::number, 1.0, "interaction scale Theta"},
                                       {"points", Kind::integer, 0, "interior points per axis; 0 picks a default"},
                                       {"extent", Kind::number, 0.0, "box half-width; 0 picks a default"},
                                       {"radial", Kind::boolean, false, "radial reduction (delta0, d = 3)"},
                                       {"restarts", Kind::integer, 5, "random restarts"},
                                       {"levels", Kind::integer, 3, "refinement levels"},
                                       {"grid-out", Kind::text, "", "binary dump of the maximizer"}})});
    s.push_back({"chaos-norm", "squared norm of the n-th chaos kernel",
                 with(with(noise_params("white"),
                           {{"n", Kind::integer, 1, "chaos order"},
                            {"t", Kind::number, 1.0, "time"},
                            {"method", Kind::text, "fourier_mc", "fourier_mc, realspace_quadrature or closed_form"},
                            {"epsilon", Kind::number, 0.0, "Gaussian mollification of the frequency sum"}}),
                      sampling)});
    s.push_back({"tn", "the time-independent chain integrals T_n",
                 with(with(noise_params("white"), {{"n-max", Kind::integer, 4, "largest order"}}), sampling)});
    s.push_back({"series", "partial sums of the second-moment series",
                 with(with(noise_params("white"),
                           {{"t", Kind::number, 1.0, "time"},
                            {"theta", Kind::number, 1.0, "coupling theta"},
                            {"N", Kind::integer, 6, "truncation order"},
                            {"critical-M", Kind::number, 0.0, "variational constant for the divergence warning"}}),
                      sampling)});
    s.push_back({"critical-time",
                 "critical times of the d = 3 white-noise moments",
                 {{"theta", Kind::number, 1.0, "coupling theta"},
                  {"p", Kind::number, 2.0, "moment order"},
                  {"M", Kind::number, 0.0, "variational constant"},
                  {"M-bound", Kind::boolean, false, "use the bound 1/(2 pi^4) for M"}}});
    s.push_back({"asymptote",
                 "closed-form moment asymptotic constants",
                 {{"alpha", Kind::number, 1.0, "scaling index (d for white noise)"},
                  {"theta", Kind::number, 1.0, "coupling theta"},
                  {"p", Kind::number, 2.0, "moment order"},
                  {"M", Kind::number, 0.0, "variational constant"},
                  {"constant", Kind::text, "p2_rate", "p_norm_rate, p2_rate, t_fixed or p_fixed"},
                  {"t", Kind::number, 1.0, "time for p_fixed"}}});
    s.push_back({"rate-fit", "exponential rate of a coefficient sequence",
                 with(with(noise_params("white"),
                           {{"input", Kind::text, "", "CSV with columns n,R; empty computes R_n from chaos norms"},
                            {"n-max", Kind::integer, 6, "largest order when computing R_n"},
                            {"window-min", Kind::integer, -1, "first index of the fit window; -1 for the default"},
                            {"window-max", Kind::integer, -1, "last index of the fit window"}}),
                      sampling)});
    s.push_back({"simulate", "sample the truncated chaos expansion (d = 1 white noise)",
                 with(sim, {{"moments", Kind::number_list, json::array({1.0, 2.0, 4.0}), "moment orders"},
                            {"samples-out", Kind::text, "", "single-column CSV of the samples"}})});
    s.push_back({"hypercontractivity", "compare ||u_N(t)||_p with ||u_N(t_p)||_2",
                 with(sim, {{"p", Kind::number, 4.0, "moment order"}})});
    s.push_back({"reproduce",
                 "run the acceptance suite",
                 {{"section", Kind::text, "all", "comma-separated criterion ids, or all"}}});
    return s;
  }();
  return schemas;
}

const CommandSchema& schema_for(const std::string& command) {
  for (const auto& s : command_schemas())
    if (s.name == command) return s;
  throw ConfigError("unknown command '" + command + "'");
}

RunConfig default_config(const std::string& command) {
  RunConfig c;
  c.command = command;
  c.seed = kDefaultSeed;
  for (const auto& p : schema_for(command).params) c.params[p.name] = p.fallback;
  return c;
}

json convert(const Param& param, const std::string& raw) {
  switch (param.kind) {
    case Kind::number:
      return parse_number(raw, param.name);
    case Kind::integer:
      return parse_integer(raw, param.name);
    case Kind::boolean:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ConfigError("--" + param.name + ": expected true or false");
    case Kind::text:
      return raw;
    case Kind::number_list: {
      json out = json::array();
      for (const auto& part : split_list(raw)) out.push_back(parse_number(part, param.name));
      return out;
    }
    case Kind::integer_list: {
      json out = json::array();
      for (const auto& part : split_list(raw)) out.push_back(parse_integer(part, param.name));
      return out;
    }
  }
  throw ConfigError("unsupported parameter kind");
}

void apply_config_document(RunConfig& config, const json& document) {
  require(document.is_object(), "config must be a JSON object");
  for (const auto& [key, value] : document.items()) {
    if (key == "command") {
      require(value.is_string() && value.get<std::string>() == config.command,
              "config is for command '" + value.dump() + "', not '" + config.command + "'");
    } else if (key == "seed") {
      require(value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0),
              "seed must be a nonnegative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "out") {
      require(value.is_string(), "out must be a string");
      config.out = value.get<std::string>();
    } else if (key == "format") {
      require(value.is_string(), "format must be a string");
      config.format = value.get<std::string>();
    } else if (key == "params") {
      require(value.is_object(), "params must be an object");
      const auto& schema = schema_for(config.command);
      for (const auto& [name, v] : value.items()) {
        const Param* param = nullptr;
        for (const auto& p : schema.params)
          if (p.name == name) param = &p;
        require(param != nullptr, "unknown parameter '" + name + "' for command '" + config.command + "'");
        require(matches(param->kind, v), "parameter '" + name + "' has the wrong type");
        // Store numbers as doubles so that 1 and 1.0 hash alike.
        if (param->kind == Kind::number)
          config.params[name] = v.get<double>();
        else if (param->kind == Kind::number_list)
          config.params[name] = v.get<std::vector<double>>();
        else
          config.params[name] = v;
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

std::string RunConfig::hash() const {
  const json canonical = {{"command", command}, {"params", params}, {"seed", seed}, {"format", format}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double RunConfig::number(const std::string& key) const { return params.at(key).get<double>(); }
long long RunConfig::integer(const std::string& key) const { return params.at(key).get<long long>(); }
bool RunConfig::boolean(const std::string& key) const { return params.at(key).get<bool>(); }
std::string RunConfig::text(const std::string& key) const { return params.at(key).get<std::string>(); }
std::vector<double> RunConfig::numbers(const std::string& key) const {
  return params.at(key).get<std::vector<double>>();
}
std::vector<int> RunConfig::integers(const std::string& key) const { return params.at(key).get<std::vector<int>>(); }

kernels::NoiseSpec noise_from(const RunConfig& config) {
  const auto family = kernels::family_from_string(config.text("family"));
  const int d = static_cast<int>(config.integer("d"));
  const auto alphas = config.numbers("alpha");
  kernels::NoiseSpec spec;
  switch (family) {
    case kernels::Family::white:
      require(alphas.empty(), "white noise takes no alpha");
      spec = kernels::NoiseSpec::white(d);
      break;
    case kernels::Family::riesz:
      require(alphas.size() == 1, "riesz noise takes one alpha");
      spec = kernels::NoiseSpec::riesz(d, alphas[0]);
      break;
    case kernels::Family::fractional_product:
      require(static_cast<int>(alphas.size()) == d, "fractional_product takes one alpha per coordinate");
      spec = kernels::NoiseSpec::fractional_product(alphas);
      break;
    case kernels::Family::hybrid:
      spec = kernels::NoiseSpec::hybrid(config.integers("groups"), alphas);
      require(spec.d == d, "hybrid group sizes must sum to d");
      break;
  }
  spec.validate();
  return spec;
}

}  // namespace wavechaos::cli
