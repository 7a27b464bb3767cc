#include "qsnn/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace qsnn::config {
namespace {

using json = nlohmann::ordered_json;
using Kind = ConfigError::Kind;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

[[noreturn]] void type_error(const std::string& field, const char* expected) {
  throw ConfigError(Kind::type, field, field + ": expected " + expected);
}

void check(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ConfigError(Kind::invariant, field, field + " " + rule);
}

// Strict reader over one JSON object: every key it is asked about becomes
// known, and finish() rejects whatever is left.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) type_error(path_.empty() ? "<root>" : path_, "an object");
  }

  bool has(const char* key) {
    known_.emplace_back(key);
    return j_.contains(key);
  }

  const json& at(const char* key) const { return j_.at(key); }
  std::string field(const char* key) const { return join(path_, key); }

  void num(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) type_error(field(key), "a number");
    out = v.get<double>();
  }

  void num(const char* key, std::optional<double>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number()) type_error(field(key), "a number or null");
    out = v.get<double>();
  }

  template <class U>
    requires std::is_unsigned_v<U>
  void uint(const char* key, U& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                    v.get<std::int64_t>() < 0)) {
      type_error(field(key), "a non-negative integer");
    }
    out = static_cast<U>(v.get<std::uint64_t>());
  }

  void integer(const char* key, int& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) type_error(field(key), "an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) type_error(field(key), "true or false");
    out = v.get<bool>();
  }

  void str(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) type_error(field(key), "a string");
    out = v.get<std::string>();
  }

  template <std::size_t N>
  void nums(const char* key, std::array<double, N>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != N) {
      type_error(field(key), ("an array of " + std::to_string(N) + " numbers").c_str());
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number()) type_error(indexed(field(key), i), "a number");
      out[i] = v[i].get<double>();
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      const std::string& key = item.key();
      if (std::find(known_.begin(), known_.end(), key) != known_.end()) continue;
      std::string best;
      std::size_t best_d = std::string::npos;
      for (const auto& k : known_) {
        const std::size_t d = edit_distance(key, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      std::string msg = "unknown key '" + join(path_, key) + "'";
      if (!best.empty()) msg += " (did you mean '" + best + "'?)";
      throw ConfigError(Kind::unknown_key, join(path_, key), msg);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> known_;
};

const json& empty_object() {
  static const json e = json::object();
  return e;
}

template <class F>
void section(Obj& parent, const char* key, F&& body) {
  const json& j = parent.has(key) ? parent.at(key) : empty_object();
  Obj o(j, parent.field(key));
  body(o);
  o.finish();
}

template <class F>
void array_of_objects(Obj& parent, const char* key, std::size_t n, F&& body) {
  if (!parent.has(key)) return;
  const json& v = parent.at(key);
  const std::string f = parent.field(key);
  if (!v.is_array() || v.size() != n) {
    type_error(f, ("an array of " + std::to_string(n) + " objects").c_str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    Obj o(v[i], indexed(f, i));
    body(o, i);
    o.finish();
  }
}

template <class E, std::size_t N>
void enumeration(Obj& o, const char* key, E& out,
                 const std::array<std::pair<const char*, E>, N>& names) {
  std::string s;
  if (!o.has(key)) return;
  o.str(key, s);
  for (const auto& [name, value] : names) {
    if (s == name) {
      out = value;
      return;
    }
  }
  std::string allowed;
  for (const auto& [name, value] : names) {
    allowed += allowed.empty() ? "" : ", ";
    allowed += name;
  }
  throw ConfigError(Kind::type, o.field(key),
                    o.field(key) + ": '" + s + "' is not one of " + allowed);
}

constexpr std::array<std::pair<const char*, ThetaMode>, 3> kThetaModes{{
    {"amplitude", ThetaMode::amplitude},
    {"index", ThetaMode::index},
    {"constant", ThetaMode::constant},
}};
constexpr std::array<std::pair<const char*, InitialQubit>, 3> kInitialQubit{{
    {"e", InitialQubit::excited},
    {"g", InitialQubit::ground},
    {"plus", InitialQubit::plus},
}};
constexpr std::array<std::pair<const char*, nonmarkov::MapSpace>, 2> kMapSpaces{{
    {"qubit", nonmarkov::MapSpace::qubit},
    {"full", nonmarkov::MapSpace::full},
}};
constexpr std::array<std::pair<const char*, decision::AwarenessClass>, 3> kClasses{{
    {"Regular", decision::AwarenessClass::Regular},
    {"EnhancedAwareness", decision::AwarenessClass::EnhancedAwareness},
    {"Elevated", decision::AwarenessClass::Elevated},
}};

template <class E, std::size_t N>
const char* name_of(E value, const std::array<std::pair<const char*, E>, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

RunConfig decode(const json& root) {
  RunConfig c;
  Obj r(root, "");

  section(r, "circuit", [&](Obj& o) {
    auto& p = c.circuit;
    o.num("c1", p.c1);
    o.num("c2", p.c2);
    o.num("c5", p.c5);
    o.num("c6", p.c6);
    o.num("r3", p.r3);
    o.num("r4", p.r4);
    o.num("r5", p.r5);
    o.num("r6", p.r6);
    o.num("k1_coupled", p.k1_coupled);
    o.num("k2_coupled", p.k2_coupled);
    array_of_objects(o, "memristors", 4, [&](Obj& m, std::size_t i) {
      auto& law = p.mem_laws[i];
      m.num("r_on", law.r_on);
      m.num("r_off", law.r_off);
      m.num("v_set", law.v_set);
      m.num("v_reset", law.v_reset);
      m.num("tau_switch", law.tau_switch);
    });
  });

  section(r, "spiking", [&](Obj& o) {
    auto& s = c.spiking;
    o.num("dt", s.dt);
    o.num("t_end", s.t_end);
    o.num("threshold", s.threshold);
    section(o, "initial", [&](Obj& i) {
      i.num("v1", s.initial.v1);
      i.num("v2", s.initial.v2);
      i.num("dv1", s.initial.dv1);
      i.num("dv2", s.initial.dv2);
      i.nums("r_mem", s.initial.r_mem);
    });
  });

  section(r, "quantum", [&](Obj& o) {
    auto& q = c.quantum;
    o.integer("n_max", q.fock.n_max);
    o.num("g", q.g);
    o.num("drive_amp", q.drive_amp);
    o.num("tau_e", q.tau_e);
    o.num("t1", q.t1);
    o.num("kappa", q.kappa);
    o.num("dt", q.dt);
    enumeration(o, "initial_state", q.initial, kInitialQubit);
  });

  section(r, "ttm", [&](Obj& o) {
    o.num("dt_map", c.ttm.dt_map);
    o.uint("K", c.ttm.depth);
    enumeration(o, "space", c.ttm.space, kMapSpaces);
  });

  section(r, "blp", [&](Obj& o) { o.str("pairs", c.blp_pairs); });

  section(r, "network", [&](Obj& o) {
    auto& n = c.network;
    o.num("j_exchange", n.j_exchange);
    o.nums("drive", n.drive);
    o.num("tau_e", n.tau_e);
    o.num("t1", n.t1);
    o.num("dephasing", n.dephasing);
    o.num("dt", n.dt);
    o.num("tau_step", n.tau_step);
    o.uint("tau_count", n.tau_count);
  });

  section(r, "mixture", [&](Obj& o) { o.nums("weights", c.mixture.w); });

  section(r, "thresholds", [&](Obj& o) {
    array_of_objects(o, "bands", 3, [&](Obj& b, std::size_t i) {
      auto& band = c.thresholds.bands[i];
      b.num("q_low", band.q_low);
      b.num("q_high", band.q_high);
      b.num("level_min", band.level_min);
      b.num("corr_min", band.corr_min);
      enumeration(b, "class", band.cls, kClasses);
      b.str("action", band.action);
    });
  });

  section(r, "mapping", [&](Obj& o) {
    enumeration(o, "mode", c.mapping.mode, kThetaModes);
    o.num("theta_max", c.mapping.theta_max);
  });

  section(r, "feedback", [&](Obj& o) {
    o.boolean("enabled", c.feedback.enabled);
    o.uint("windows", c.feedback.windows);
    o.num("enhanced_scale", c.feedback.enhanced_scale);
    o.num("elevated_reset", c.feedback.elevated_reset);
  });

  section(r, "io", [&](Obj& o) {
    o.str("out_dir", c.io.out_dir);
    o.uint("record_stride", c.io.record_stride);
  });

  r.uint("seed", c.seed);
  r.has("scenarios");  // consumed by the loader
  r.finish();
  return c;
}

json encode(const RunConfig& c) {
  json j;
  const auto& p = c.circuit;
  json mem = json::array();
  for (const auto& law : p.mem_laws) {
    mem.push_back({{"r_on", law.r_on},
                   {"r_off", law.r_off},
                   {"v_set", law.v_set},
                   {"v_reset", law.v_reset},
                   {"tau_switch", law.tau_switch}});
  }
  j["circuit"] = {{"c1", p.c1}, {"c2", p.c2}, {"c5", p.c5}, {"c6", p.c6},
                  {"r3", p.r3}, {"r4", p.r4}, {"r5", p.r5}, {"r6", p.r6},
                  {"k1_coupled", p.k1_coupled}, {"k2_coupled", p.k2_coupled},
                  {"memristors", mem}};
  const auto& s = c.spiking;
  j["spiking"] = {{"dt", s.dt},
                  {"t_end", s.t_end},
                  {"threshold", s.threshold},
                  {"initial",
                   {{"v1", s.initial.v1},
                    {"v2", s.initial.v2},
                    {"dv1", s.initial.dv1},
                    {"dv2", s.initial.dv2},
                    {"r_mem", s.initial.r_mem}}}};
  const auto& q = c.quantum;
  j["quantum"] = {{"n_max", q.fock.n_max},
                  {"g", q.g},
                  {"drive_amp", q.drive_amp},
                  {"tau_e", q.tau_e},
                  {"t1", q.t1 ? json(*q.t1) : json(nullptr)},
                  {"kappa", q.kappa},
                  {"dt", q.dt},
                  {"initial_state", name_of(q.initial, kInitialQubit)}};
  j["ttm"] = {{"dt_map", c.ttm.dt_map},
              {"K", c.ttm.depth},
              {"space", name_of(c.ttm.space, kMapSpaces)}};
  j["blp"] = {{"pairs", c.blp_pairs}};
  const auto& n = c.network;
  j["network"] = {{"j_exchange", n.j_exchange},
                  {"drive", n.drive},
                  {"tau_e", n.tau_e},
                  {"t1", n.t1 ? json(*n.t1) : json(nullptr)},
                  {"dephasing", n.dephasing},
                  {"dt", n.dt},
                  {"tau_step", n.tau_step},
                  {"tau_count", n.tau_count}};
  j["mixture"] = {{"weights", c.mixture.w}};
  json bands = json::array();
  for (const auto& b : c.thresholds.bands) {
    bands.push_back({{"q_low", b.q_low},
                     {"q_high", b.q_high},
                     {"level_min", b.level_min},
                     {"corr_min", b.corr_min},
                     {"class", name_of(b.cls, kClasses)},
                     {"action", b.action}});
  }
  j["thresholds"] = {{"bands", bands}};
  j["mapping"] = {{"mode", name_of(c.mapping.mode, kThetaModes)},
                  {"theta_max", c.mapping.theta_max}};
  j["feedback"] = {{"enabled", c.feedback.enabled},
                   {"windows", c.feedback.windows},
                   {"enhanced_scale", c.feedback.enhanced_scale},
                   {"elevated_reset", c.feedback.elevated_reset}};
  j["io"] = {{"out_dir", c.io.out_dir}, {"record_stride", c.io.record_stride}};
  j["seed"] = c.seed;
  return j;
}

bool is_multiple(double step, double span) {
  if (!(step > 0.0) || !(span > 0.0)) return false;
  const double n = span / step;
  return std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n);
}

void deep_merge(json& base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (const auto& item : patch.items()) {
    if (base.contains(item.key())) {
      deep_merge(base[item.key()], item.value());
    } else {
      base[item.key()] = item.value();
    }
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(Kind::syntax, "", std::string("malformed config: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError(Kind::missing_file, "", "config file not found: " + path.string());
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

const char* to_string(ThetaMode m) { return name_of(m, kThetaModes); }

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::to_json() const { return encode(*this).dump(2) + "\n"; }

bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_json() == b.to_json(); }

void RunConfig::validate() const {
  auto fin = [](double x) { return std::isfinite(x); };
  auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  constexpr double two_pi = 2.0 * std::numbers::pi;

  const auto& p = circuit;
  const std::array<std::pair<const char*, double>, 8> comps{{
      {"c1", p.c1}, {"c2", p.c2}, {"c5", p.c5}, {"c6", p.c6},
      {"r3", p.r3}, {"r4", p.r4}, {"r5", p.r5}, {"r6", p.r6},
  }};
  for (const auto& [name, v] : comps) check(pos(v), std::string("circuit.") + name, "must be > 0");
  check(fin(p.k1_coupled), "circuit.k1_coupled", "must be finite");
  check(fin(p.k2_coupled), "circuit.k2_coupled", "must be finite");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& law = p.mem_laws[i];
    const std::string at = indexed("circuit.memristors", i);
    check(pos(law.r_on), at + ".r_on", "must be > 0");
    check(fin(law.r_off) && law.r_off > law.r_on, at + ".r_off", "must be > r_on");
    check(fin(law.v_set) && fin(law.v_reset) && law.v_set > law.v_reset, at + ".v_set",
          "must be > v_reset");
    check(pos(law.tau_switch), at + ".tau_switch", "must be > 0");
  }

  check(pos(spiking.dt), "spiking.dt", "must be > 0");
  check(fin(spiking.t_end) && spiking.t_end >= spiking.dt, "spiking.t_end", "must be >= dt");
  check(fin(spiking.threshold), "spiking.threshold", "must be finite");
  check(spiking.initial.finite(), "spiking.initial", "must be finite");
  for (std::size_t i = 0; i < 4; ++i) {
    check(spiking.initial.r_mem[i] > 0.0, indexed("spiking.initial.r_mem", i), "must be > 0");
  }

  check(quantum.fock.n_max >= 1, "quantum.n_max", "must be >= 1");
  check(nonneg(quantum.g), "quantum.g", "must be >= 0");
  check(nonneg(quantum.drive_amp), "quantum.drive_amp", "must be >= 0");
  check(pos(quantum.tau_e), "quantum.tau_e", "must be > 0");
  check(!quantum.t1 || pos(*quantum.t1), "quantum.t1", "must be > 0 or null");
  check(nonneg(quantum.kappa), "quantum.kappa", "must be >= 0");
  check(pos(quantum.dt), "quantum.dt", "must be > 0");
  check(is_multiple(quantum.dt, spiking.t_end), "quantum.dt",
        "must divide spiking.t_end into whole steps");

  check(pos(ttm.dt_map) && is_multiple(quantum.dt, ttm.dt_map), "ttm.dt_map",
        "must be a positive multiple of quantum.dt");
  check(ttm.depth >= 1, "ttm.K", "must be >= 1");

  check(blp_pairs == "default", "blp.pairs", "must be \"default\"");

  const auto& n = network;
  check(nonneg(n.j_exchange), "network.j_exchange", "must be >= 0");
  check(nonneg(n.drive[0]) && nonneg(n.drive[1]), "network.drive", "entries must be >= 0");
  check(pos(n.tau_e), "network.tau_e", "must be > 0");
  check(!n.t1 || pos(*n.t1), "network.t1", "must be > 0 or null");
  check(nonneg(n.dephasing), "network.dephasing", "must be >= 0");
  check(pos(n.dt) && is_multiple(n.dt, spiking.t_end), "network.dt",
        "must divide spiking.t_end into whole steps");
  check(pos(n.tau_step) && is_multiple(n.dt, n.tau_step), "network.tau_step",
        "must be a positive multiple of network.dt");
  check(n.tau_count >= 1, "network.tau_count", "must be >= 1");

  try {
    mixture.validate();
  } catch (const Error& e) {
    throw ConfigError(Kind::invariant, "mixture.weights", std::string("mixture.") + e.what());
  }
  try {
    thresholds.validate();
  } catch (const Error& e) {
    throw ConfigError(Kind::invariant, "thresholds.bands", e.what());
  }

  check(mapping.theta_max > 0.0 && mapping.theta_max < two_pi, "mapping.theta_max",
        "must be in (0, 2pi)");
  check(feedback.windows >= 1, "feedback.windows", "must be >= 1");
  check(pos(feedback.enhanced_scale), "feedback.enhanced_scale", "must be > 0");
  check(feedback.elevated_reset > 0.0 && feedback.elevated_reset < two_pi,
        "feedback.elevated_reset", "must be in (0, 2pi)");
  check(!io.out_dir.empty(), "io.out_dir", "must not be empty");
  check(io.record_stride >= 1, "io.record_stride", "must be >= 1");
}

RunConfig parse_config_text(const std::string& text, const std::optional<std::string>& scenario) {
  json root = parse_json(text);
  if (!root.is_object()) type_error("<root>", "an object");
  if (scenario) {
    const auto it = root.find("scenarios");
    if (it == root.end() || !it->is_object() || !it->contains(*scenario)) {
      throw ConfigError(Kind::scenario, "scenarios." + *scenario,
                        "scenario '" + *scenario + "' is not defined in the config");
    }
    const json patch = (*it)[*scenario];
    if (!patch.is_object()) type_error("scenarios." + *scenario, "an object");
    deep_merge(root, patch);
  }
  if (const auto it = root.find("scenarios"); it != root.end() && !it->is_object()) {
    type_error("scenarios", "an object");
  }
  RunConfig c = decode(root);
  c.validate();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path, const std::optional<std::string>& scenario) {
  return parse_config_text(read_file(path), scenario);
}

std::vector<std::string> scenario_names(const std::filesystem::path& path) {
  const json root = parse_json(read_file(path));
  std::vector<std::string> out;
  if (root.is_object() && root.contains("scenarios") && root["scenarios"].is_object()) {
    for (const auto& item : root["scenarios"].items()) out.push_back(item.key());
  }
  return out;
}

}  // namespace qsnn::config
