#include "dplab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "dplab/errors.hpp"
#include "dplab/report.hpp"

using nlohmann::json;

namespace dplab {

// ---- TOML -> json

static json node_to_json(const toml::node& n) {
  if (auto t = n.as_table()) {
    json o = json::object();
    for (auto&& [k, v] : *t) o[std::string(k.str())] = node_to_json(v);
    return o;
  }
  if (auto a = n.as_array()) {
    json o = json::array();
    for (auto&& v : *a) o.push_back(node_to_json(v));
    return o;
  }
  if (auto v = n.as_integer()) return v->get();
  if (auto v = n.as_floating_point()) return v->get();
  if (auto v = n.as_boolean()) return v->get();
  if (auto v = n.as_string()) return v->get();
  throw ConfigError("unsupported TOML value (dates are not accepted)");
}

json toml_to_json(const std::string& text) {
  try {
    return node_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
}

// ---- strict reader

namespace {

struct Reader {
  const json& j;
  std::string where;
  std::set<std::string> seen;

  Reader(const json& j_, std::string w) : j(j_), where(std::move(w)) {
    if (!j.is_object()) throw ConfigError(where + " must be a table");
  }

  std::string key(const std::string& k) const { return where.empty() ? k : where + "." + k; }

  const json* find(const std::string& k) {
    seen.insert(k);
    auto it = j.find(k);
    return it == j.end() ? nullptr : &*it;
  }

  double real(const std::string& k, double def) {
    const json* v = find(k);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(key(k) + " must be a number");
    return v->get<double>();
  }
  long integer(const std::string& k, long def) {
    const json* v = find(k);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(key(k) + " must be an integer");
    return v->get<long>();
  }
  bool boolean(const std::string& k, bool def) {
    const json* v = find(k);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(key(k) + " must be true or false");
    return v->get<bool>();
  }
  std::string str(const std::string& k, const std::string& def, std::initializer_list<const char*> allowed = {}) {
    const json* v = find(k);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(key(k) + " must be a string");
    std::string s = v->get<std::string>();
    if (allowed.size() && std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return s == a; })) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      throw ConfigError("unknown value '" + s + "' for " + key(k) + " (expected one of: " + list + ")");
    }
    return s;
  }
  template <class T>
  std::vector<T> list(const std::string& k, std::vector<T> def) {
    const json* v = find(k);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(key(k) + " must be an array");
    std::vector<T> out;
    for (const auto& e : *v) {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) throw ConfigError(key(k) + " must hold strings");
      } else if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) throw ConfigError(key(k) + " must hold integers");
      } else {
        if (!e.is_number()) throw ConfigError(key(k) + " must hold numbers");
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

  void done() const {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!seen.count(it.key())) throw ConfigError("unknown key '" + key(it.key()) + "'");
  }
};

Switching read_switching(const json& v, const std::string& where) {
  if (v.is_number()) return Switching(v.get<double>());
  Reader r(v, where);
  Switching s;
  s.before.value = r.real("value", 0.0);
  if (!r.find("value")) throw ConfigError(where + ".value is required");
  s.before.slope = r.real("slope", 0.0);
  if (r.find("after")) s.after = Coef{r.real("after", 0.0), r.real("after_slope", 0.0)};
  else if (r.find("after_slope")) throw ConfigError(where + ".after_slope needs after");
  r.done();
  return s;
}

Switching switching(Reader& r, const std::string& k, double def) {
  const json* v = r.find(k);
  return v ? read_switching(*v, r.key(k)) : Switching(def);
}

ModelBlock read_model(const json& v, const std::string& where) {
  Reader r(v, where);
  ModelBlock m;
  m.name = r.str("name", "", {"half_final", "argmax", "cox"});
  if (m.name.empty()) throw ConfigError(where + ".name is required");
  m.crossing = r.str("crossing", m.crossing, {"grid", "bridge"});
  m.intensity = r.str("intensity", m.intensity, {"constant", "affine_abs_w"});
  m.a = r.real("a", 0.0);
  m.b = r.real("b", 0.0);
  r.done();
  if (m.name != "cox" && (r.j.contains("intensity") || r.j.contains("a") || r.j.contains("b")))
    throw ConfigError(where + ": intensity parameters apply to the cox model only");
  if (m.name != "half_final" && r.j.contains("crossing"))
    throw ConfigError(where + ".crossing applies to the half_final model only");
  return m;
}

}  // namespace

RandomTimeModel ModelBlock::model() const {
  if (name == "half_final") return RandomTimeModel::half_final(crossing == "grid" ? CrossingRule::grid : CrossingRule::bridge);
  if (name == "argmax") return RandomTimeModel::argmax();
  CoxIntensity ci;
  ci.preset = intensity == "affine_abs_w" ? CoxIntensity::Preset::affine_abs_w : CoxIntensity::Preset::constant;
  ci.a = a;
  ci.b = b;
  return RandomTimeModel::cox(ci);
}

UtilitySpec UtilityBlock::spec() const { return kind == "power" ? UtilitySpec::power(gamma) : UtilitySpec::log_utility(); }

McConfig ScenarioConfig::mc_config() const {
  McConfig m;
  m.T = T;
  m.steps = steps;
  m.paths = mc.paths;
  m.seed = mc.seed;
  m.threads = mc.threads;
  return m;
}

BasisConfig ScenarioConfig::basis() const {
  BasisConfig b;
  b.K = chaos.K;
  b.Q = chaos.Q;
  b.T = T;
  b.nodes = chaos.nodes;
  return b;
}

BuildOptions ScenarioConfig::build_options() const {
  BuildOptions o;
  o.trace = strategy.trace == "displayed" ? TraceConvention::displayed : TraceConvention::consistent;
  o.info_drift_after = strategy.info_drift_after;
  o.solver.eps = strategy.eps;
  return o;
}

Strategy ScenarioConfig::strategy_for(const RandomTimeModel& model) const {
  Strategy s = strategy.name == "constant" ? constant_strategy(strategy.pi, strategy.eps)
                                           : build_strategy(model, market, build_options());
  return strategy.shift != 0.0 ? shifted(s, strategy.shift) : s;
}

ScenarioConfig parse_scenario(const json& j) {
  Reader root(j, "");
  ScenarioConfig c;
  static const json empty = json::object();
  auto table = [&](const char* k) -> const json& {
    const json* v = root.find(k);
    return v ? *v : empty;
  };

  {
    Reader r(table("experiment"), "experiment");
    c.experiment.name = r.str("name", "");
    c.experiment.expect = r.str("expect", "pass", {"pass", "fail", "no-optimum"});
    r.done();
  }
  {
    Reader r(table("time"), "time");
    c.T = r.real("T", 1.0);
    c.steps = static_cast<int>(r.integer("steps", 256));
    r.done();
    make_grid(c.T, c.steps);  // validates
  }
  {
    Reader r(table("market"), "market");
    c.market.s0 = r.real("s0", 1.0);
    c.market.x0 = r.real("x0", 1.0);
    c.market.rho = switching(r, "rho", 0.0);
    c.market.mu = switching(r, "mu", 0.0);
    c.market.sigma = switching(r, "sigma", 0.0);
    if (!r.find("kappa")) throw ConfigError("market.kappa is required (κ ≠ 0)");
    c.market.kappa = switching(r, "kappa", 0.0);
    if (const json* a = r.find("atoms")) {
      if (!a->is_array()) throw ConfigError("market.atoms must be an array of tables");
      for (std::size_t i = 0; i < a->size(); ++i) {
        const std::string w = "market.atoms[" + std::to_string(i) + "]";
        Reader ar((*a)[i], w);
        Atom at{ar.real("z", 0.0), ar.real("rate", 0.0)};
        Switching th = switching(ar, "theta", 0.0);
        if (!ar.find("theta") || !ar.find("z") || !ar.find("rate")) throw ConfigError(w + " needs z, rate and theta");
        ar.done();
        c.market.levy.push_back(at);
        c.market.theta.push_back(th);
      }
    }
    r.done();
    validate(c.market);
  }
  {
    const json* m = root.find("model");
    if (!m) throw ConfigError("model is required");
    if (m->is_object()) {
      c.models.push_back(read_model(*m, "model"));
    } else if (m->is_array() && !m->empty()) {
      for (std::size_t i = 0; i < m->size(); ++i) c.models.push_back(read_model((*m)[i], "model[" + std::to_string(i) + "]"));
    } else {
      throw ConfigError("model must be a table or a non-empty array of tables");
    }
    for (const auto& mb : c.models) mb.model().name();  // validates intensity
    for (const auto& mb : c.models)
      if (mb.name == "cox" && (mb.a < 0.0 || mb.b < 0.0)) throw ConfigError("Cox intensity must be nonnegative");
  }
  {
    Reader r(table("strategy"), "strategy");
    c.strategy.name = r.str("name", "optimal", {"optimal", "constant"});
    c.strategy.pi = r.real("pi", 0.0);
    if (c.strategy.name == "constant" && !r.j.contains("pi")) throw ConfigError("strategy.pi is required for a constant strategy");
    if (c.strategy.name != "constant" && r.j.contains("pi")) throw ConfigError("strategy.pi applies to the constant strategy only");
    c.strategy.shift = r.real("shift", 0.0);
    c.strategy.trace = r.str("trace", "consistent", {"consistent", "displayed"});
    c.strategy.info_drift_after = r.boolean("info_drift_after", true);
    c.strategy.eps = r.real("eps", 1e-6);
    r.done();
    if (!(c.strategy.eps > 0.0 && c.strategy.eps < 1.0)) throw ConfigError("strategy.eps must lie in (0,1)");
  }
  {
    Reader r(table("utility"), "utility");
    c.utility.kind = r.str("kind", "log", {"log", "power"});
    c.utility.gamma = r.real("gamma", 0.5);
    r.done();
    c.utility.spec();
  }
  {
    Reader r(table("mc"), "mc");
    c.mc.paths = r.integer("paths", c.mc.paths);
    const json* s = r.find("seed");
    if (!s) throw ConfigError("mc.seed is required");
    if (!s->is_number_integer() || s->get<long long>() < 0) throw ConfigError("mc.seed must be a nonnegative integer");
    c.mc.seed = s->get<std::uint64_t>();
    c.mc.seed_set = true;
    const long th = r.integer("threads", 0);
    if (th < 0) throw ConfigError("mc.threads must be >= 0");
    c.mc.threads = static_cast<unsigned>(th);
    c.mc.delta = r.real("delta", 1e-3);
    c.mc.inner = r.integer("inner", c.mc.inner);
    r.done();
    if (c.mc.paths < 2) throw ConfigError("mc.paths must be at least 2");
    if (!(c.mc.delta > 0.0)) throw ConfigError("mc.delta must be positive");
    if (c.mc.inner < 1) throw ConfigError("mc.inner must be positive");
  }
  {
    Reader r(table("verify"), "verify");
    auto& v = c.verify;
    v.tests = r.list<std::string>("tests", {});
    static const std::set<std::string> known{"gateaux", "martingale", "drift", "singularity", "forward", "ito",
                                             "azema", "doob-meyer", "exactness"};
    for (const auto& t : v.tests)
      if (!known.count(t)) throw ConfigError("unknown test '" + t + "' in verify.tests");
    v.buckets = static_cast<int>(r.integer("buckets", v.buckets));
    v.min_support = r.integer("min_support", v.min_support);
    v.singular_k = r.real("singular_k", v.singular_k);
    v.compare_shift = r.real("compare_shift", v.compare_shift);
    v.negative_shift = r.real("negative_shift", v.negative_shift);
    v.eps = r.list<double>("eps", v.eps);
    v.forward_presets = r.list<std::string>("forward_presets", v.forward_presets);
    for (const auto& p : v.forward_presets)
      if (p != "constant" && p != "brownian" && p != "sine" && p != "terminal")
        throw ConfigError("unknown forward preset '" + p + "'");
    v.ito_presets = r.list<std::string>("ito_presets", v.ito_presets);
    for (const auto& p : v.ito_presets)
      if (p != "square" && p != "log1p_square" && p != "exp") throw ConfigError("unknown ito preset '" + p + "'");
    v.ito_refinements = static_cast<int>(r.integer("ito_refinements", v.ito_refinements));
    v.azema_times = r.list<double>("azema_times", v.azema_times);
    v.azema_tol = r.real("azema_tol", v.azema_tol);
    v.lt_steps = r.list<int>("lt_steps", v.lt_steps);
    v.doob_meyer_tol = r.real("doob_meyer_tol", v.doob_meyer_tol);
    v.solve_paths = r.integer("solve_paths", v.solve_paths);
    v.solve_tol = r.real("solve_tol", v.solve_tol);
    v.exact_tol = r.real("exact_tol", v.exact_tol);
    v.exact_pi = r.real("exact_pi", v.exact_pi);
    r.done();
    if (v.buckets < 1) throw ConfigError("verify.buckets must be positive");
    if (v.solve_paths < 1) throw ConfigError("verify.solve_paths must be positive");
    for (double t : v.azema_times)
      if (!(t > 0.0 && t < c.T)) throw ConfigError("verify.azema_times must lie in (0, T)");
  }
  {
    Reader r(table("chaos"), "chaos");
    auto& h = c.chaos;
    h.K = static_cast<int>(r.integer("K", h.K));
    h.Q = static_cast<int>(r.integer("Q", h.Q));
    h.nodes = static_cast<int>(r.integer("nodes", h.nodes));
    h.wick = r.list<std::string>("wick", h.wick);
    h.wick_interval = r.list<double>("wick_interval", h.wick_interval);
    h.forward = r.list<std::string>("forward", h.forward);
    h.poisson_degrees = r.list<int>("poisson_degrees", h.poisson_degrees);
    h.poisson_interval = r.list<double>("poisson_interval", h.poisson_interval);
    h.poisson_z = r.real("poisson_z", h.poisson_z);
    h.poisson_rate = r.real("poisson_rate", h.poisson_rate);
    h.norms = r.list<std::string>("norms", h.norms);
    h.norm_paths = r.integer("norm_paths", h.norm_paths);
    h.norm_steps = static_cast<int>(r.integer("norm_steps", h.norm_steps));
    h.norm_half_width = r.real("norm_half_width", h.norm_half_width);
    r.done();
    if (h.K < 1 || h.Q < 1) throw ConfigError("chaos.K and chaos.Q must be >= 1");
    if (h.wick_interval.size() != 2 || h.poisson_interval.size() != 2)
      throw ConfigError("chaos intervals must have two entries [s, t]");
  }
  {
    Reader r(table("outputs"), "outputs");
    c.outputs.dir = r.str("dir", c.outputs.dir);
    c.outputs.formats = r.list<std::string>("formats", c.outputs.formats);
    for (const auto& f : c.outputs.formats)
      if (f != "json" && f != "csv") throw ConfigError("unknown output format '" + f + "'");
    c.outputs.path_rows = r.integer("path_rows", c.outputs.path_rows);
    r.done();
  }
  root.done();
  return c;
}

ScenarioConfig parse_scenario_text(const std::string& text, bool is_json) {
  json j;
  if (is_json) {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
  } else {
    j = toml_to_json(text);
  }
  return parse_scenario(j);
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return parse_scenario_text(ss.str(), is_json);
}

// ---- canonical TOML

namespace {

std::string tf(double x) {
  std::string s = fmt(x);
  if (s == "inf" || s == "-inf" || s == "nan") return s;
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string ts(const std::string& s) { return json(s).dump(); }  // basic string, escaped

template <class T>
std::string tl(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, std::string>) s += ts(v[i]);
    else if constexpr (std::is_integral_v<T>) s += std::to_string(v[i]);
    else s += tf(v[i]);
  }
  return s + "]";
}

std::string tsw(const Switching& w) {
  if (w.before.slope == 0.0 && !w.after) return tf(w.before.value);
  std::string s = "{ value = " + tf(w.before.value) + ", slope = " + tf(w.before.slope);
  if (w.after) s += ", after = " + tf(w.after->value) + ", after_slope = " + tf(w.after->slope);
  return s + " }";
}

}  // namespace

std::string emit_toml(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "[experiment]\nname = " << ts(c.experiment.name) << "\nexpect = " << ts(c.experiment.expect) << "\n\n";
  o << "[time]\nT = " << tf(c.T) << "\nsteps = " << c.steps << "\n\n";
  const auto& m = c.market;
  o << "[market]\ns0 = " << tf(m.s0) << "\nx0 = " << tf(m.x0) << "\nrho = " << tsw(m.rho) << "\nmu = " << tsw(m.mu)
    << "\nsigma = " << tsw(m.sigma) << "\nkappa = " << tsw(m.kappa) << "\n\n";
  for (std::size_t i = 0; i < m.levy.size(); ++i)
    o << "[[market.atoms]]\nz = " << tf(m.levy[i].z) << "\nrate = " << tf(m.levy[i].rate) << "\ntheta = " << tsw(m.theta[i])
      << "\n\n";
  for (const auto& mb : c.models) {
    o << "[[model]]\nname = " << ts(mb.name) << "\n";
    if (mb.name == "half_final") o << "crossing = " << ts(mb.crossing) << "\n";
    if (mb.name == "cox") o << "intensity = " << ts(mb.intensity) << "\na = " << tf(mb.a) << "\nb = " << tf(mb.b) << "\n";
    o << "\n";
  }
  const auto& s = c.strategy;
  o << "[strategy]\nname = " << ts(s.name) << "\n";
  if (s.name == "constant") o << "pi = " << tf(s.pi) << "\n";
  o << "shift = " << tf(s.shift) << "\ntrace = " << ts(s.trace) << "\ninfo_drift_after = " << (s.info_drift_after ? "true" : "false")
    << "\neps = " << tf(s.eps) << "\n\n";
  o << "[utility]\nkind = " << ts(c.utility.kind) << "\ngamma = " << tf(c.utility.gamma) << "\n\n";
  o << "[mc]\npaths = " << c.mc.paths << "\nseed = " << c.mc.seed << "\nthreads = " << c.mc.threads
    << "\ndelta = " << tf(c.mc.delta) << "\ninner = " << c.mc.inner << "\n\n";
  const auto& v = c.verify;
  o << "[verify]\ntests = " << tl(v.tests) << "\nbuckets = " << v.buckets << "\nmin_support = " << v.min_support
    << "\nsingular_k = " << tf(v.singular_k) << "\ncompare_shift = " << tf(v.compare_shift)
    << "\nnegative_shift = " << tf(v.negative_shift) << "\neps = " << tl(v.eps)
    << "\nforward_presets = " << tl(v.forward_presets) << "\nito_presets = " << tl(v.ito_presets)
    << "\nito_refinements = " << v.ito_refinements << "\nazema_times = " << tl(v.azema_times) << "\nazema_tol = " << tf(v.azema_tol)
    << "\nlt_steps = " << tl(v.lt_steps) << "\ndoob_meyer_tol = " << tf(v.doob_meyer_tol)
    << "\nsolve_paths = " << v.solve_paths << "\nsolve_tol = " << tf(v.solve_tol) << "\nexact_tol = " << tf(v.exact_tol)
    << "\nexact_pi = " << tf(v.exact_pi) << "\n\n";
  const auto& h = c.chaos;
  o << "[chaos]\nK = " << h.K << "\nQ = " << h.Q << "\nnodes = " << h.nodes << "\nwick = " << tl(h.wick)
    << "\nwick_interval = " << tl(h.wick_interval) << "\nforward = " << tl(h.forward)
    << "\npoisson_degrees = " << tl(h.poisson_degrees) << "\npoisson_interval = " << tl(h.poisson_interval)
    << "\npoisson_z = " << tf(h.poisson_z) << "\npoisson_rate = " << tf(h.poisson_rate)
    << "\nnorms = " << tl(h.norms) << "\nnorm_paths = " << h.norm_paths << "\nnorm_steps = " << h.norm_steps
    << "\nnorm_half_width = " << tf(h.norm_half_width) << "\n\n";
  o << "[outputs]\ndir = " << ts(c.outputs.dir) << "\nformats = " << tl(c.outputs.formats)
    << "\npath_rows = " << c.outputs.path_rows << "\n";
  return o.str();
}

std::string scenario_hash(const ScenarioConfig& c) {
  ScenarioConfig k = c;
  k.outputs.dir.clear();
  k.mc.threads = 0;
  return sha256_hex(emit_toml(k));
}

}  // namespace dplab
