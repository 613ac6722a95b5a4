// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "reap/errors.hpp"

#define TOML_HEADER_ONLY 1
#include "toml.hpp"

namespace reap {
namespace {

// Allowed keys per table. Tables themselves appear as keys of the root.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"name", "horizon", "reference", "model", "constraints", "cost", "initial", "simulation",
            "reap", "terminal"}},
      {"model", {"A", "B", "C", "D"}},
      {"constraints",
       {"state_lower", "state_upper", "input_lower", "input_upper", "state_normals", "state_offsets",
        "input_normals", "input_offsets"}},
      {"cost", {"Qx", "Qu", "Qx_diag", "Qu_diag"}},
      {"initial", {"x0", "center", "spread"}},
      {"simulation", {"steps", "seed", "admissibility_margin", "violation_tol"}},
      {"reap",
       {"d_tau", "beta", "epsilon", "psi", "dual_floor_margin", "sigma", "curvature_cap", "budget",
        "deadline_ms", "stall_detection", "early_exit", "convergence_tol"}},
      {"terminal", {"K", "omega"}},
  };
  return s;
}

[[noreturn]] void fail(const std::string& key, const std::string& what, const toml::node* node = nullptr) {
  if (node) {
    const auto& b = node->source().begin;
    throw ConfigError("'" + key + "': " + what, static_cast<int>(b.line), static_cast<int>(b.column));
  }
  throw ConfigError("'" + key + "': " + what);
}

void check_keys(const toml::table& root) {
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (!schema().at("").count(key)) fail(key, "unknown key", &v);
    if (auto it = schema().find(key); it != schema().end()) {
      const toml::table* t = v.as_table();
      if (!t) fail(key, "must be a table", &v);
      for (const auto& [kk, vv] : *t) {
        const std::string sub(kk.str());
        if (!it->second.count(sub)) fail(key + "." + sub, "unknown key", &vv);
      }
    }
  }
}

const toml::node* find(const toml::table& root, const std::string& table, const std::string& key) {
  if (table.empty()) return root.get(key);
  const toml::table* t = root.get_as<toml::table>(table);
  return t ? t->get(key) : nullptr;
}

std::string path_of(const std::string& table, const std::string& key) {
  return table.empty() ? key : table + "." + key;
}

double as_number(const toml::node& node, const std::string& key) {
  if (auto v = node.value<double>()) return *v;
  fail(key, "expected a number", &node);
}

Vector as_vector(const toml::node& node, const std::string& key) {
  const toml::array* arr = node.as_array();
  if (!arr) fail(key, "expected an array of numbers", &node);
  Vector v(static_cast<Eigen::Index>(arr->size()));
  for (size_t i = 0; i < arr->size(); ++i) v(i) = as_number(*arr->get(i), key);
  return v;
}

Matrix as_matrix(const toml::node& node, const std::string& key) {
  const toml::array* arr = node.as_array();
  if (!arr || arr->empty()) fail(key, "expected a nonempty array of rows", &node);
  std::vector<Vector> rows;
  for (size_t i = 0; i < arr->size(); ++i) rows.push_back(as_vector(*arr->get(i), key));
  const auto cols = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != cols) fail(key, "rows have different lengths", &node);
  }
  Matrix M(static_cast<Eigen::Index>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i) M.row(i) = rows[i].transpose();
  return M;
}

struct Reader {
  const toml::table& root;

  const toml::node* get(const std::string& table, const std::string& key) const {
    return find(root, table, key);
  }
  const toml::node& need(const std::string& table, const std::string& key) const {
    const toml::node* n = get(table, key);
    if (!n) fail(path_of(table, key), "missing required key");
    return *n;
  }
  double number(const std::string& table, const std::string& key, double fallback) const {
    const toml::node* n = get(table, key);
    return n ? as_number(*n, path_of(table, key)) : fallback;
  }
  long integer(const std::string& table, const std::string& key, long fallback) const {
    const toml::node* n = get(table, key);
    if (!n) return fallback;
    if (auto v = n->value_exact<int64_t>()) return static_cast<long>(*v);
    fail(path_of(table, key), "expected an integer", n);
  }
  bool boolean(const std::string& table, const std::string& key, bool fallback) const {
    const toml::node* n = get(table, key);
    if (!n) return fallback;
    if (auto v = n->value_exact<bool>()) return *v;
    fail(path_of(table, key), "expected true or false", n);
  }
  Vector vector(const std::string& table, const std::string& key) const {
    return as_vector(need(table, key), path_of(table, key));
  }
  Matrix matrix(const std::string& table, const std::string& key) const {
    return as_matrix(need(table, key), path_of(table, key));
  }
};

HalfspaceSet read_set(const Reader& rd, const std::string& prefix, int dim) {
  const std::string lo = prefix + "_lower", hi = prefix + "_upper";
  const std::string nk = prefix + "_normals", ok = prefix + "_offsets";
  HalfspaceSet set = HalfspaceSet::unconstrained(dim);
  const bool has_lo = rd.get("constraints", lo), has_hi = rd.get("constraints", hi);
  if (has_lo || has_hi) {
    Vector lower = has_lo ? rd.vector("constraints", lo)
                          : Vector::Constant(dim, -std::numeric_limits<double>::infinity());
    Vector upper = has_hi ? rd.vector("constraints", hi)
                          : Vector::Constant(dim, std::numeric_limits<double>::infinity());
    if (lower.size() != dim) fail("constraints." + lo, "expected " + std::to_string(dim) + " entries");
    if (upper.size() != dim) fail("constraints." + hi, "expected " + std::to_string(dim) + " entries");
    try {
      set = HalfspaceSet::box(lower, upper);
    } catch (const Error& e) {
      fail("constraints." + prefix, e.what());
    }
  }
  const bool has_n = rd.get("constraints", nk), has_o = rd.get("constraints", ok);
  if (has_n != has_o) fail("constraints." + (has_n ? ok : nk), "missing (normals and offsets come in pairs)");
  if (has_n) {
    const Matrix N = rd.matrix("constraints", nk);
    const Vector o = rd.vector("constraints", ok);
    if (N.cols() != dim) fail("constraints." + nk, "rows must have " + std::to_string(dim) + " entries");
    try {
      set = set.append(HalfspaceSet(N, o));
    } catch (const Error& e) {
      fail("constraints." + nk, e.what());
    }
  }
  return set;
}

Matrix read_weight(const Reader& rd, const std::string& key, int dim) {
  const bool full = rd.get("cost", key), diag = rd.get("cost", key + "_diag");
  if (full == diag) fail("cost." + key, "give exactly one of " + key + " and " + key + "_diag");
  Matrix W = full ? rd.matrix("cost", key) : Matrix(rd.vector("cost", key + "_diag").asDiagonal());
  if (W.rows() != dim || W.cols() != dim) {
    fail("cost." + key, "must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  return W;
}

void apply_override(toml::table& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + text + "' must look like key=value");
  }
  std::string key = text.substr(0, eq), value = text.substr(eq + 1);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  key = trim(key);
  value = trim(value);
  toml::table parsed;
  try {
    parsed = toml::parse(key + " = " + value);
  } catch (const toml::parse_error&) {
    // Bare words are taken as strings (for example sigma=adaptive).
    try {
      parsed = toml::parse(key + " = \"" + value + "\"");
    } catch (const toml::parse_error& e) {
      throw ConfigError("override '" + text + "': " + std::string(e.description()));
    }
  }
  const auto dot = key.find('.');
  const std::string table = dot == std::string::npos ? "" : key.substr(0, dot);
  const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
  if (leaf.find('.') != std::string::npos) throw ConfigError("override '" + text + "': key nested too deep");
  const toml::node* node = table.empty() ? parsed.get(leaf) : parsed.at_path(key).node();
  if (!node) throw ConfigError("override '" + text + "': could not read value");
  const auto& tables = schema();
  if (table.empty()) {
    if (!tables.at("").count(leaf) || tables.count(leaf)) throw ConfigError("override: unknown key '" + key + "'");
    root.insert_or_assign(leaf, *node);
  } else {
    auto it = tables.find(table);
    if (it == tables.end() || !it->second.count(leaf)) throw ConfigError("override: unknown key '" + key + "'");
    toml::table* t = root.get_as<toml::table>(table);
    if (!t) {
      root.insert_or_assign(table, toml::table{});
      t = root.get_as<toml::table>(table);
    }
    t->insert_or_assign(leaf, *node);
  }
}

Scenario build(const toml::table& root) {
  check_keys(root);
  Reader rd{root};
  Scenario sc;
  if (const toml::node* n = rd.get("", "name")) {
    auto v = n->value_exact<std::string>();
    if (!v) fail("name", "expected a string", n);
    sc.name = *v;
  }
  const Matrix A = rd.matrix("model", "A");
  const Matrix B = rd.matrix("model", "B");
  const Matrix C = rd.matrix("model", "C");
  const Matrix D = rd.get("model", "D") ? rd.matrix("model", "D") : Matrix::Zero(C.rows(), B.cols());
  try {
    sc.model = validate_model(A, B, C, D);
  } catch (const Error& e) {
    fail("model", e.what());
  }
  const int n = sc.model.n(), p = sc.model.p(), m = sc.model.m();
  sc.X = read_set(rd, "state", n);
  sc.U = read_set(rd, "input", p);
  sc.Qx = read_weight(rd, "Qx", n);
  sc.Qu = read_weight(rd, "Qu", p);
  sc.horizon = static_cast<int>(rd.integer("", "horizon", 10));
  if (sc.horizon < 1) fail("horizon", "must be at least 1", rd.get("", "horizon"));
  sc.reference = rd.vector("", "reference");
  if (sc.reference.size() != m) fail("reference", "expected " + std::to_string(m) + " entries");

  sc.x0 = rd.vector("initial", "x0");
  if (sc.x0.size() != n) fail("initial.x0", "expected " + std::to_string(n) + " entries");
  sc.mc_center = rd.get("initial", "center") ? rd.vector("initial", "center") : sc.x0;
  sc.mc_spread = rd.get("initial", "spread") ? rd.vector("initial", "spread") : Vector::Zero(n);
  if (sc.mc_center.size() != n) fail("initial.center", "expected " + std::to_string(n) + " entries");
  if (sc.mc_spread.size() != n) fail("initial.spread", "expected " + std::to_string(n) + " entries");

  sc.steps = static_cast<int>(rd.integer("simulation", "steps", 150));
  const long seed = rd.integer("simulation", "seed", 1);
  if (seed < 0) fail("simulation.seed", "must be nonnegative");
  sc.rng_seed = static_cast<std::uint64_t>(seed);
  sc.admissibility_margin = rd.number("simulation", "admissibility_margin", 0.02);
  sc.violation_tol = rd.number("simulation", "violation_tol", 1e-9);

  ReapConfig& cfg = sc.reap;
  cfg.d_tau = rd.number("reap", "d_tau", cfg.d_tau);
  cfg.beta = rd.number("reap", "beta", cfg.beta);
  cfg.epsilon = rd.number("reap", "epsilon", cfg.epsilon);
  cfg.psi = rd.number("reap", "psi", cfg.psi);
  cfg.dual_floor_margin = rd.number("reap", "dual_floor_margin", cfg.dual_floor_margin);
  cfg.convergence_tol = rd.number("reap", "convergence_tol", cfg.convergence_tol);
  cfg.stall_detection = rd.boolean("reap", "stall_detection", cfg.stall_detection);
  cfg.early_exit = rd.boolean("reap", "early_exit", cfg.early_exit);
  cfg.record_trace = false;
  const bool cap = rd.boolean("reap", "curvature_cap", true);
  cfg.sigma_policy = AdaptiveSigma{cap};
  if (const toml::node* s = rd.get("reap", "sigma")) {
    if (auto str = s->value_exact<std::string>()) {
      if (*str != "adaptive") fail("reap.sigma", "expected \"adaptive\" or a number", s);
    } else {
      cfg.sigma_policy = FixedSigma{as_number(*s, "reap.sigma")};
    }
  }
  std::optional<long> iters = rd.integer("reap", "budget", 200);
  std::optional<std::chrono::nanoseconds> deadline;
  if (rd.get("reap", "deadline_ms")) {
    const double ms = rd.number("reap", "deadline_ms", 0.0);
    if (!(ms > 0.0)) fail("reap.deadline_ms", "must be positive");
    deadline = std::chrono::nanoseconds(static_cast<long long>(ms * 1e6));
    if (!rd.get("reap", "budget")) iters.reset();
  }
  cfg.budget = Budget{iters, deadline};

  if (rd.get("terminal", "K")) sc.terminal.K = rd.matrix("terminal", "K");
  if (rd.get("terminal", "omega")) sc.terminal.omega = static_cast<int>(rd.integer("terminal", "omega", 0));

  try {
    sc.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return sc;
}

}  // namespace

Scenario parse_scenario_text(std::string_view text, const std::vector<std::string>& overrides,
                             const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ConfigError(source + ": " + std::string(e.description()), static_cast<int>(b.line),
                      static_cast<int>(b.column));
  }
  for (const auto& o : overrides) apply_override(root, o);
  return build(root);
}

Scenario parse_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), overrides, path);
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_vector(const Vector& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v(i));
  return s + "]";
}

std::string format_matrix(const Matrix& M) {
  std::string s = "[";
  for (int i = 0; i < M.rows(); ++i) s += (i ? ", " : "") + format_vector(M.row(i).transpose());
  return s + "]";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_echo(const Scenario& sc) {
  const ReapConfig& c = sc.reap;
  std::vector<std::pair<std::string, std::string>> out = {
      {"name", sc.name},
      {"horizon", std::to_string(sc.horizon)},
      {"reference", format_vector(sc.reference)},
      {"initial.x0", format_vector(sc.x0)},
      {"initial.center", format_vector(sc.mc_center)},
      {"initial.spread", format_vector(sc.mc_spread)},
      {"cost.Qx", format_matrix(sc.Qx)},
      {"cost.Qu", format_matrix(sc.Qu)},
      {"simulation.steps", std::to_string(sc.steps)},
      {"simulation.seed", std::to_string(sc.rng_seed)},
      {"simulation.admissibility_margin", format_double(sc.admissibility_margin)},
      {"simulation.violation_tol", format_double(sc.violation_tol)},
      {"reap.d_tau", format_double(c.d_tau)},
      {"reap.beta", format_double(c.beta)},
      {"reap.epsilon", format_double(c.epsilon)},
      {"reap.psi", format_double(c.psi)},
      {"reap.dual_floor_margin", format_double(c.dual_floor_margin)},
  };
  if (const auto* f = std::get_if<FixedSigma>(&c.sigma_policy)) {
    out.emplace_back("reap.sigma", format_double(f->value));
  } else {
    out.emplace_back("reap.sigma", "adaptive");
    out.emplace_back("reap.curvature_cap",
                     std::get<AdaptiveSigma>(c.sigma_policy).curvature_cap ? "true" : "false");
  }
  out.emplace_back("reap.budget", c.budget.max_iterations ? std::to_string(*c.budget.max_iterations) : "none");
  out.emplace_back("reap.deadline_ms",
                   c.budget.deadline ? format_double(c.budget.deadline->count() / 1e6) : "none");
  out.emplace_back("reap.stall_detection", c.stall_detection ? "true" : "false");
  out.emplace_back("reap.early_exit", c.early_exit ? "true" : "false");
  out.emplace_back("reap.convergence_tol", format_double(c.convergence_tol));
  out.emplace_back("terminal.K", sc.terminal.K ? format_matrix(*sc.terminal.K) : "lqr");
  out.emplace_back("terminal.omega", sc.terminal.omega ? std::to_string(*sc.terminal.omega) : "auto");
  return out;
}

}  // namespace reap
