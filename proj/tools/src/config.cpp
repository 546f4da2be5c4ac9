#include "config.hpp"

#include <algorithm>
#include <initializer_list>
#include <sstream>
#include <string>

#include "lsqtl/error.hpp"
#include "toml.hpp"

namespace lsqtl::cli {

namespace {

std::size_t line_of(const toml::node& node) {
  return static_cast<std::size_t>(node.source().begin.line);
}

[[noreturn]] void fail(const toml::node& node, const std::string& what) {
  throw ParseError(what, line_of(node));
}

void only_keys(const toml::table& t, std::string_view section,
               std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      fail(value, "unknown key '" + std::string(key.str()) + "' in [" + std::string(section) + "]");
    }
  }
}

const toml::table* section(const toml::table& doc, std::string_view name, bool required) {
  const toml::node* node = doc.get(name);
  if (node == nullptr) {
    if (required) throw ParseError("missing section [" + std::string(name) + "]", 0);
    return nullptr;
  }
  const toml::table* t = node->as_table();
  if (t == nullptr) fail(*node, "[" + std::string(name) + "] must be a table");
  return t;
}

double number(const toml::node& node, std::string_view key) {
  if (auto v = node.value<double>()) return *v;
  fail(node, std::string(key) + " must be a number");
}

long long integer(const toml::node& node, std::string_view key) {
  if (const auto* v = node.as_integer()) return v->get();
  fail(node, std::string(key) + " must be an integer");
}

long long count(const toml::node& node, std::string_view key) {
  const long long v = integer(node, key);
  if (v < 0) fail(node, std::string(key) + " must be non-negative");
  return v;
}

std::string text(const toml::node& node, std::string_view key) {
  if (const auto* v = node.as_string()) return v->get();
  fail(node, std::string(key) + " must be a string");
}

template <class T, class Get>
void read_opt(const toml::table& t, std::string_view key, T& out, Get&& get) {
  if (const toml::node* node = t.get(key)) out = static_cast<T>(get(*node, key));
}

IntervalConfig read_interval(const toml::table& t) {
  const toml::node* d = t.get("d_cm");
  const toml::node* r = t.get("r");
  if ((d == nullptr) == (r == nullptr)) {
    throw ParseError("[scenario] needs exactly one of d_cm and r", 0);
  }
  return d != nullptr ? IntervalConfig::from_distance(number(*d, "d_cm"))
                      : IntervalConfig::from_r(number(*r, "r"));
}

LocScale read_params(const toml::node& node, std::string_view key) {
  const toml::table* t = node.as_table();
  if (t == nullptr) fail(node, std::string(key) + " must be an inline table {mu, sigma}");
  only_keys(*t, key, {"mu", "sigma"});
  LocScale p;
  read_opt(*t, "mu", p.mu, number);
  read_opt(*t, "sigma", p.sigma, number);
  return p;
}

Kernel read_kernel(const toml::table& t, std::string_view key) {
  const toml::node* node = t.get(key);
  if (node == nullptr) return kNormal;
  try {
    return Kernel::from_name(text(*node, key));
  } catch (const DomainError& e) {
    fail(*node, e.what());
  }
}

Methods read_methods(const toml::node& node) {
  const toml::array* a = node.as_array();
  if (a == nullptr) fail(node, "methods must be an array of strings");
  Methods m;
  m.full = m.star = m.ks = m.ad = m.davies = false;
  for (const toml::node& item : *a) {
    const std::string name = text(item, "methods");
    if (name == "full") m.full = true;
    else if (name == "star") m.star = true;
    else if (name == "ks") m.ks = true;
    else if (name == "ad") m.ad = true;
    else if (name == "davies") m.davies = true;
    else fail(item, "unknown method '" + name + "'");
  }
  return m;
}

toml::table parse(const std::filesystem::path& path) {
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string(e.description()) + " in " + path.string(),
                     static_cast<std::size_t>(e.source().begin.line));
  }
}

nlohmann::json to_json(const toml::table& doc) {
  std::ostringstream out;
  out << toml::json_formatter{doc};
  return nlohmann::json::parse(out.str());
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::type1: return "type1";
    case Experiment::power: return "power";
    case Experiment::asymptotic: return "asymptotic";
  }
  return "?";
}

SimConfig load_sim_config(const std::filesystem::path& path, bool full_budget) {
  const toml::table doc = parse(path);
  only_keys(doc, "root", {"scenario", "fit", "calibration"});
  SimConfig cfg;
  cfg.echo = to_json(doc);

  const toml::table& sc = *section(doc, "scenario", true);
  only_keys(sc, "scenario", {"experiment", "n", "d_cm", "r", "theta", "kernel", "f1", "f2",
                             "local", "alpha", "reps", "seed", "methods"});
  if (const toml::node* e = sc.get("experiment")) {
    const std::string name = text(*e, "experiment");
    if (name == "type1") cfg.experiment = Experiment::type1;
    else if (name == "power") cfg.experiment = Experiment::power;
    else if (name == "asymptotic") cfg.experiment = Experiment::asymptotic;
    else fail(*e, "experiment must be type1, power or asymptotic");
  }

  SimScenario base;
  base.interval = read_interval(sc);
  read_opt(sc, "theta", base.theta, number);
  read_opt(sc, "alpha", base.alpha, number);
  read_opt(sc, "reps", base.n_reps, count);
  read_opt(sc, "seed", base.seed, count);
  const Kernel kernel = read_kernel(sc, "kernel");
  base.f1 = {kernel, {}};
  if (const toml::node* f1 = sc.get("f1")) base.f1.params = read_params(*f1, "f1");
  base.f2 = base.f1;
  if (const toml::node* f2 = sc.get("f2")) base.f2.params = read_params(*f2, "f2");
  if (const toml::node* m = sc.get("methods")) cfg.methods = read_methods(*m);
  if (full_budget) base.n_reps = 10000;

  std::vector<int> sizes;
  if (const toml::node* n = sc.get("n")) {
    if (const toml::array* a = n->as_array()) {
      for (const toml::node& item : *a) sizes.push_back(static_cast<int>(integer(item, "n")));
    } else {
      sizes.push_back(static_cast<int>(integer(*n, "n")));
    }
  }
  if (sizes.empty()) throw ParseError("[scenario] needs n", 0);

  std::optional<LocalAlternative> local;
  double mu0 = 0.0;
  if (const toml::node* node = sc.get("local")) {
    const toml::table* t = node->as_table();
    if (t == nullptr) fail(*node, "local must be a table");
    only_keys(*t, "scenario.local", {"delta_mu", "delta_sigma", "mu0", "sigma0"});
    LocalAlternative alt;
    alt.theta0 = base.theta;
    alt.kernel = kernel;
    read_opt(*t, "delta_mu", alt.delta_mu, number);
    read_opt(*t, "delta_sigma", alt.delta_sigma, number);
    read_opt(*t, "sigma0", alt.sigma0, number);
    read_opt(*t, "mu0", mu0, number);
    if (sc.get("f1") != nullptr || sc.get("f2") != nullptr) {
      fail(*node, "local replaces f1 and f2; give one or the other");
    }
    local = alt;
  }

  for (int n : sizes) {
    SimScenario s = base;
    if (local) {
      s = local_alternative_scenario(n, base.interval.r, *local, mu0);
      s.interval = base.interval;
      s.alpha = base.alpha;
      s.n_reps = base.n_reps;
      s.seed = base.seed;
    }
    s.n = n;
    s.validate();
    cfg.scenarios.push_back(s);
  }

  if (const toml::table* fit = section(doc, "fit", false)) {
    only_keys(*fit, "fit", {"theta_grid_size", "em_max_iter", "em_tol", "sigma_floor_factor",
                            "closed_form_normal"});
    read_opt(*fit, "theta_grid_size", cfg.fit.theta_grid_size, integer);
    read_opt(*fit, "em_max_iter", cfg.fit.em_max_iter, integer);
    read_opt(*fit, "em_tol", cfg.fit.em_tol, number);
    read_opt(*fit, "sigma_floor_factor", cfg.fit.sigma_floor_factor, number);
    if (const toml::node* b = fit->get("closed_form_normal")) {
      const auto v = b->value<bool>();
      if (!v) fail(*b, "closed_form_normal must be a boolean");
      cfg.fit.closed_form_normal = *v;
    }
  }
  cfg.fit.validate();

  if (const toml::table* cal = section(doc, "calibration", false)) {
    only_keys(*cal, "calibration", {"table_samples", "null_reps", "workers"});
    read_opt(*cal, "table_samples", cfg.calibration.table_samples, count);
    read_opt(*cal, "null_reps", cfg.calibration.null_reps, count);
    long long workers = 0;
    read_opt(*cal, "workers", workers, count);
    if (workers > 0) cfg.calibration.workers = static_cast<unsigned>(workers);
  }
  if (full_budget) cfg.calibration.null_reps = 10000;
  return cfg;
}

KlConfig load_kl_config(const std::filesystem::path& path) {
  const toml::table doc = parse(path);
  only_keys(doc, "root", {"scenario"});
  const toml::table& sc = *section(doc, "scenario", true);
  only_keys(sc, "scenario", {"d_cm", "r", "theta", "kernel", "null_kernel", "f1", "f2"});
  KlConfig cfg;
  cfg.interval = read_interval(sc);
  read_opt(sc, "theta", cfg.theta, number);
  const Kernel kernel = read_kernel(sc, "kernel");
  cfg.null_kernel = sc.get("null_kernel") != nullptr ? read_kernel(sc, "null_kernel") : kernel;
  const toml::node* f1 = sc.get("f1");
  const toml::node* f2 = sc.get("f2");
  if (f1 == nullptr || f2 == nullptr) throw ParseError("[scenario] needs f1 and f2", 0);
  cfg.f1 = {kernel, read_params(*f1, "f1")};
  cfg.f2 = {kernel, read_params(*f2, "f2")};
  return cfg;
}

}  // namespace lsqtl::cli
