#include "nlch/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "nlch/errors.hpp"

namespace nlch {

namespace {

// Keys of every section, in the order they are documented.
const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"run", {"out", "seed"}},
      {"kernel", {"variant", "dim", "r", "R", "a", "s"}},
      {"potential", {"variant", "scale", "knots"}},
      {"grid", {"dim", "nodes", "extent", "origin", "boundary"}},
      {"solver", {"max_iters", "grad_tol", "precondition", "step_rule", "fixed_step", "clamp", "trace_every"}},
      {"cell", {"nodes_per_eps", "tangential_nodes", "margin_cells", "max_reach", "mass_tol", "eps_grid",
                "refine", "directions", "psi"}},
      {"field", {"epsilon", "init", "file", "normal", "offset", "sigma", "value", "amplitude", "seed",
                 "constraint", "halfwidth", "transitions", "pin_width"}},
      {"gamma", {"eps", "transitions", "nodes", "halfwidth", "pin_width"}},
      {"slice", {"domain", "integrand", "samples", "seed"}},
      {"interp", {"epsilon", "fields", "nodes", "seeds", "held_out_seed"}},
      {"compact", {"eps", "pinned", "random_fields", "seed", "nodes", "halfwidth", "pin_width"}},
      {"limsup", {"eps", "nodes_per_eps", "mollified_width"}},
  };
  return s;
}

class Reader {
 public:
  Reader(toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  std::vector<std::string> errors;

  void error(const toml::node* n, const std::string& path, const std::string& msg) {
    std::ostringstream os;
    os << source_;
    if (n && n->source().begin.line > 0)
      os << ':' << n->source().begin.line;
    else if (n)
      os << " (override)";
    os << ": " << path << ": " << msg;
    errors.push_back(os.str());
  }

  const toml::node* find(const std::string& sec, const std::string& key) {
    used_.insert(sec + "." + key);
    auto* t = root_[sec].as_table();
    if (!t) return nullptr;
    return t->get(key);
  }

  const toml::node* section(const std::string& sec) { return root_.get(sec); }

  bool has(const std::string& sec, const std::string& key) {
    auto* t = root_[sec].as_table();
    return t && t->contains(key);
  }

  using Check = std::function<std::string(double)>;

  void number(const std::string& sec, const std::string& key, double& out, const Check& check = {}) {
    const auto* n = find(sec, key);
    if (!n) return;
    auto v = n->value<double>();
    if (!v || !(n->is_floating_point() || n->is_integer())) {
      error(n, sec + "." + key, "expected a number");
      return;
    }
    if (check) {
      const std::string m = check(*v);
      if (!m.empty()) {
        error(n, sec + "." + key, m);
        return;
      }
    }
    out = *v;
  }

  template <class Int>
  void integer(const std::string& sec, const std::string& key, Int& out, long long lo,
               long long hi = std::numeric_limits<long long>::max()) {
    const auto* n = find(sec, key);
    if (!n) return;
    if (!n->is_integer()) {
      error(n, sec + "." + key, "expected an integer");
      return;
    }
    const long long v = *n->value<long long>();
    if (v < lo || v > hi) {
      std::ostringstream os;
      os << "must be in [" << lo << ", " << hi << "], got " << v;
      error(n, sec + "." + key, os.str());
      return;
    }
    out = static_cast<Int>(v);
  }

  void boolean(const std::string& sec, const std::string& key, bool& out) {
    const auto* n = find(sec, key);
    if (!n) return;
    if (!n->is_boolean()) {
      error(n, sec + "." + key, "expected true or false");
      return;
    }
    out = *n->value<bool>();
  }

  void string(const std::string& sec, const std::string& key, std::string& out,
              const std::vector<std::string>& allowed = {}) {
    const auto* n = find(sec, key);
    if (!n) return;
    if (!n->is_string()) {
      error(n, sec + "." + key, "expected a string");
      return;
    }
    const std::string v = *n->value<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      error(n, sec + "." + key, "'" + v + "' is not one of " + list);
      return;
    }
    out = v;
  }

  void numbers(const std::string& sec, const std::string& key, std::vector<double>& out,
               const Check& check = {}, std::size_t min_len = 1) {
    const auto* n = find(sec, key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) {
      error(n, sec + "." + key, "expected an array of numbers");
      return;
    }
    std::vector<double> v;
    for (const auto& e : *arr) {
      auto x = e.value<double>();
      if (!x || !(e.is_floating_point() || e.is_integer())) {
        error(n, sec + "." + key, "expected an array of numbers");
        return;
      }
      if (check) {
        const std::string m = check(*x);
        if (!m.empty()) {
          error(n, sec + "." + key, m);
          return;
        }
      }
      v.push_back(*x);
    }
    if (v.size() < min_len) {
      error(n, sec + "." + key, "needs at least " + std::to_string(min_len) + " entries");
      return;
    }
    out = std::move(v);
  }

  template <class Int>
  void integers(const std::string& sec, const std::string& key, std::vector<Int>& out, long long lo) {
    const auto* n = find(sec, key);
    if (!n) return;
    const auto* arr = n->as_array();
    std::vector<Int> v;
    if (arr) {
      for (const auto& e : *arr) {
        if (!e.is_integer() || *e.value<long long>() < lo) {
          error(n, sec + "." + key, "expected integers >= " + std::to_string(lo));
          return;
        }
        v.push_back(static_cast<Int>(*e.value<long long>()));
      }
    }
    if (!arr || v.empty()) {
      error(n, sec + "." + key, "expected a nonempty array of integers");
      return;
    }
    out = std::move(v);
  }

  // Array of two-element numeric arrays.
  bool pairs(const std::string& sec, const std::string& key, std::vector<std::array<double, 2>>& out) {
    const auto* n = find(sec, key);
    if (!n) return false;
    const auto* arr = n->as_array();
    std::vector<std::array<double, 2>> v;
    bool ok = arr != nullptr;
    if (arr)
      for (const auto& e : *arr) {
        const auto* p = e.as_array();
        if (!p || p->size() != 2 || !(*p)[0].value<double>() || !(*p)[1].value<double>()) {
          ok = false;
          break;
        }
        v.push_back({*(*p)[0].value<double>(), *(*p)[1].value<double>()});
      }
    if (!ok || v.empty()) {
      error(n, sec + "." + key, "expected an array of [a, b] pairs");
      return false;
    }
    out = std::move(v);
    return true;
  }

  void unknown_keys() {
    for (const auto& [k, v] : root_) {
      const std::string sec(k.str());
      const auto it = schema().find(sec);
      if (it == schema().end()) {
        error(&v, sec, "unknown section");
        continue;
      }
      const auto* t = v.as_table();
      if (!t) {
        error(&v, sec, "expected a [" + sec + "] table");
        continue;
      }
      for (const auto& [kk, vv] : *t) {
        const std::string key(kk.str());
        if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
          error(&vv, sec + "." + key, "unknown key");
      }
    }
  }

 private:
  toml::table& root_;
  std::string source_;
  std::set<std::string> used_;
};

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Reader::Check positive(const std::string& what = "must be > 0") {
  return [what](double v) { return v > 0.0 ? std::string() : what + ", got " + num(v); };
}
Reader::Check nonneg() {
  return [](double v) { return v >= 0.0 ? std::string() : "must be >= 0, got " + num(v); };
}
Reader::Check unit_open() {
  return [](double v) {
    return v > 0.0 && v < 1.0 ? std::string() : "must lie in (0, 1), got " + num(v);
  };
}

void apply_override(toml::table& root, const std::string& ov, std::vector<std::string>& errors) {
  const auto eq = ov.find('=');
  const auto dot = ov.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    errors.push_back("--set " + ov + ": expected section.key=value");
    return;
  }
  const std::string sec = ov.substr(0, dot);
  std::string key = ov.substr(dot + 1, eq - dot - 1);
  while (!key.empty() && key.back() == ' ') key.pop_back();
  const std::string value = ov.substr(eq + 1);
  toml::table parsed;
  try {
    parsed = toml::parse("v = " + value, std::string_view("--set"));
  } catch (const toml::parse_error& e) {
    // Bare words are taken as strings.
    try {
      parsed = toml::parse("v = \"" + value + "\"", std::string_view("--set"));
    } catch (const toml::parse_error&) {
      errors.push_back("--set " + ov + ": " + std::string(e.description()));
      return;
    }
  }
  if (!root.contains(sec)) root.insert(sec, toml::table{});
  auto* t = root[sec].as_table();
  if (!t) {
    errors.push_back("--set " + ov + ": '" + sec + "' is not a table");
    return;
  }
  t->insert_or_assign(key, *parsed.get("v"));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::vector<std::string>& overrides) {
  toml::table root;
  try {
    root = toml::parse(text, std::string_view(source));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ':' << e.source().begin.line << ": syntax: " << e.description();
    throw ConfigError({os.str()});
  }
  std::vector<std::string> ov_errors;
  for (const auto& ov : overrides) apply_override(root, ov, ov_errors);
  if (!ov_errors.empty()) throw ConfigError(ov_errors);

  RunConfig c;
  c.source = source;
  Reader r(root, source);

  // run
  r.string("run", "out", c.out_dir);
  std::optional<std::uint64_t> run_seed;
  if (r.has("run", "seed")) {
    std::uint64_t s = 0;
    r.integer("run", "seed", s, 0);
    run_seed = s;
  }

  // kernel
  {
    std::string variant = "band";
    r.string("kernel", "variant", variant, {"band", "smooth_bump", "gagliardo"});
    KernelSpec k;
    k.variant = variant == "band" ? KernelVariant::band
                : variant == "smooth_bump" ? KernelVariant::smooth_bump
                                           : KernelVariant::gagliardo;
    if (k.variant == KernelVariant::smooth_bump) k.R = 1.0;
    r.integer("kernel", "dim", k.dim, 1, 2);
    r.number("kernel", "r", k.r);
    r.number("kernel", "R", k.R);
    r.number("kernel", "a", k.a);
    r.number("kernel", "s", k.s);
    try {
      k.validate();
    } catch (const ParameterError& e) {
      // Anchor the message at the first key of the variant that the file sets.
      std::vector<const char*> keys{"s"};
      if (k.variant == KernelVariant::band) keys = {"r", "R", "a"};
      if (k.variant == KernelVariant::smooth_bump) keys = {"R", "a"};
      const char* key = "variant";
      for (const char* kk : keys)
        if (r.has("kernel", kk)) {
          key = kk;
          break;
        }
      const toml::node* n = r.find("kernel", key);
      if (!n) n = r.section("kernel");
      r.error(n, std::string("kernel.") + key, e.what());
    }
    c.kernel = k;
  }

  // potential
  {
    std::string variant = "quartic";
    r.string("potential", "variant", variant, {"quartic", "custom_piecewise"});
    double scale = 1.0;
    r.number("potential", "scale", scale, positive());
    std::vector<std::array<double, 2>> knots;
    const bool have_knots = r.pairs("potential", "knots", knots);
    try {
      if (variant == "quartic") {
        if (have_knots) r.error(r.find("potential", "knots"), "potential.knots", "only used by custom_piecewise");
        c.potential = Potential::quartic(scale);
      } else {
        if (!have_knots) throw ParameterError("custom_piecewise needs knots");
        std::vector<std::pair<double, double>> kn;
        for (auto [a, b] : knots) kn.push_back({a, b});
        c.potential = Potential::custom_piecewise(kn);
      }
      (void)c.potential.growth_constants();
    } catch (const ParameterError& e) {
      const toml::node* n = r.find("potential", variant == "quartic" ? "scale" : "knots");
      r.error(n ? n : r.section("potential"), "potential", e.what());
    }
  }

  // grid
  if (r.section("grid")) {
    GridSpec g;
    g.dim = c.kernel.dim;
    r.integer("grid", "dim", g.dim, 1, 2);
    std::vector<long long> nodes;
    if (r.has("grid", "nodes")) {
      r.integers("grid", "nodes", nodes, 2);
      for (std::size_t a = 0; a < std::min<std::size_t>(2, nodes.size()); ++a) g.nodes[a] = static_cast<int>(nodes[a]);
    }
    std::vector<double> ext, org;
    r.numbers("grid", "extent", ext, positive());
    r.numbers("grid", "origin", org);
    for (std::size_t a = 0; a < std::min<std::size_t>(2, ext.size()); ++a) g.extent[a] = ext[a];
    for (std::size_t a = 0; a < std::min<std::size_t>(2, org.size()); ++a) g.origin[a] = org[a];
    if (const auto* n = r.find("grid", "boundary")) {
      const auto* arr = n->as_array();
      bool ok = arr && !arr->empty();
      for (std::size_t a = 0; ok && a < std::min<std::size_t>(2, arr->size()); ++a) {
        auto v = (*arr)[a].value<std::string>();
        if (v == "periodic")
          g.boundary[a] = Boundary::periodic;
        else if (v == "fixed")
          g.boundary[a] = Boundary::fixed;
        else
          ok = false;
      }
      if (!ok) r.error(n, "grid.boundary", "expected an array of \"periodic\" or \"fixed\"");
    }
    if (g.dim != c.kernel.dim)
      r.error(r.section("grid"), "grid.dim", "grid dimension differs from kernel.dim");
    try {
      g.validate();
      c.grid = g;
    } catch (const ParameterError& e) {
      r.error(r.section("grid"), "grid", e.what());
    }
  }

  // solver
  {
    auto& s = c.solver;
    r.integer("solver", "max_iters", s.max_iters, 1);
    r.number("solver", "grad_tol", s.grad_tol, positive());
    r.boolean("solver", "precondition", s.precondition);
    std::string rule = "barzilai_borwein";
    r.string("solver", "step_rule", rule, {"barzilai_borwein", "fixed"});
    s.step_rule = rule == "fixed" ? StepRule::fixed : StepRule::barzilai_borwein;
    r.number("solver", "fixed_step", s.fixed_step, positive());
    if (r.has("solver", "clamp")) {
      double cl = 1.0;
      r.number("solver", "clamp", cl, [](double v) { return v >= 1.0 ? std::string() : "must be >= 1"; });
      s.clamp = cl;
    }
    r.integer("solver", "trace_every", s.trace_every, 1);
    if (run_seed) s.seed = *run_seed;
  }

  // cell
  {
    auto& res = c.oracle.resolution;
    r.number("cell", "nodes_per_eps", res.nodes_per_eps,
             [](double v) { return v >= 1.0 ? std::string() : "must be >= 1"; });
    r.integer("cell", "tangential_nodes", res.tangential_nodes, 0);
    if (res.tangential_nodes == 1) r.error(r.find("cell", "tangential_nodes"), "cell.tangential_nodes", "must be 0 or >= 2");
    r.integer("cell", "margin_cells", res.margin_cells, 1);
    r.number("cell", "max_reach", res.max_reach, positive());
    r.number("cell", "mass_tol", res.mass_tol, positive());
    r.numbers("cell", "eps_grid", c.oracle.psi.eps_grid, unit_open());
    r.integer("cell", "refine", c.oracle.psi.refine, 0, 64);
    std::vector<std::array<double, 2>> dirs;
    if (r.pairs("cell", "directions", dirs)) {
      c.directions.clear();
      for (auto [p, q] : dirs) {
        if (p != std::floor(p) || q != std::floor(q) || (p == 0 && q == 0)) {
          r.error(r.find("cell", "directions"), "cell.directions", "directions are nonzero integer pairs [p, q]");
          break;
        }
        c.directions.push_back({static_cast<int>(p), static_cast<int>(q)});
      }
    }
    if (r.has("cell", "psi")) {
      double v = 0.0;
      r.number("cell", "psi", v, positive());
      c.oracle.psi_value = v;
    }
  }

  // field
  {
    auto& f = c.field;
    r.number("field", "epsilon", f.epsilon, positive("epsilon must be > 0"));
    r.string("field", "init", f.init, {"tanh", "interface", "random", "constant", "file"});
    r.string("field", "file", f.file);
    if (f.init == "file" && f.file.empty())
      r.error(r.section("field"), "field.file", "init = \"file\" needs field.file");
    std::vector<double> nrm;
    r.numbers("field", "normal", nrm);
    if (!nrm.empty()) {
      const double len = std::hypot(nrm[0], nrm.size() > 1 ? nrm[1] : 0.0);
      if (nrm.size() > 2 || len == 0.0)
        r.error(r.find("field", "normal"), "field.normal", "expected a nonzero vector of length <= 2");
      else
        f.normal = {nrm[0] / len, (nrm.size() > 1 ? nrm[1] : 0.0) / len};
    }
    r.number("field", "offset", f.offset);
    r.number("field", "sigma", f.sigma, nonneg());
    r.number("field", "value", f.value);
    r.number("field", "amplitude", f.amplitude, nonneg());
    f.seed = run_seed.value_or(f.seed);
    r.integer("field", "seed", f.seed, 0);
    r.string("field", "constraint", f.constraint, {"free", "profile", "transitions"});
    r.number("field", "halfwidth", f.halfwidth, positive());
    r.integer("field", "transitions", f.transitions, 1, 64);
    r.number("field", "pin_width", f.pin_width, positive());
  }

  // gamma
  {
    auto& g = c.gamma;
    g.dim = c.kernel.dim;
    if (g.dim == 2) {
      g.nodes = 128;
      g.eps = {0.1, 0.05};
    }
    r.numbers("gamma", "eps", g.eps, positive("epsilon must be > 0"));
    r.integer("gamma", "transitions", g.transitions, 1, 64);
    r.integer("gamma", "nodes", g.nodes, 8);
    r.number("gamma", "halfwidth", g.halfwidth, positive());
    r.number("gamma", "pin_width", g.pin_width, positive());
    g.oracle = c.oracle;
    g.solver = c.solver;
  }

  // slice
  {
    auto& s = c.slice;
    s.domain = c.kernel.dim == 1 ? SliceDomain::interval : SliceDomain::square;
    std::string dom = to_string(s.domain), integ = to_string(s.integrand);
    r.string("slice", "domain", dom, {"interval", "square", "disk"});
    r.string("slice", "integrand", integ, {"constant", "gaussian", "separable"});
    s.domain = parse_slice_domain(dom);
    s.integrand = parse_slice_integrand(integ);
    r.integer("slice", "samples", s.samples, 2);
    s.seed = run_seed.value_or(s.seed);
    r.integer("slice", "seed", s.seed, 0);
  }

  // interp
  {
    auto& s = c.interp;
    if (c.kernel.dim == 2) s.nodes = 128;
    r.number("interp", "epsilon", s.epsilon, positive("epsilon must be > 0"));
    r.integer("interp", "fields", s.fields, 1);
    r.integer("interp", "nodes", s.nodes, 16);
    if (r.has("interp", "seeds")) {
      r.integers("interp", "seeds", s.seeds, 0);
      if (s.seeds.size() < 2) r.error(r.find("interp", "seeds"), "interp.seeds", "needs two calibration seeds");
    }
    r.integer("interp", "held_out_seed", s.held_out_seed, 0);
  }

  // compact
  {
    auto& s = c.compact;
    r.numbers("compact", "eps", s.eps, positive("epsilon must be > 0"));
    r.integers("compact", "pinned", s.pinned, 1);
    r.integer("compact", "random_fields", s.random_fields, 0);
    s.seed = run_seed.value_or(s.seed);
    r.integer("compact", "seed", s.seed, 0);
    r.integer("compact", "nodes", s.nodes, 8);
    r.number("compact", "halfwidth", s.halfwidth, positive());
    r.number("compact", "pin_width", s.pin_width, positive());
    s.oracle = c.oracle;
    s.solver = c.solver;
  }

  // limsup
  {
    auto& s = c.limsup;
    r.numbers("limsup", "eps", s.eps, positive("epsilon must be > 0"), 0);
    r.number("limsup", "nodes_per_eps", s.nodes_per_eps,
             [](double v) { return v >= 2.0 ? std::string() : "must be >= 2"; });
    r.number("limsup", "mollified_width", s.mollified_width, positive());
    s.oracle = c.oracle;
    s.solver = c.solver;
  }

  r.unknown_keys();
  if (!r.errors.empty()) throw ConfigError(r.errors);

  std::ostringstream js;
  js << toml::json_formatter{root};
  c.echo_json = js.str();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, overrides);
}

std::string config_schema() {
  std::ostringstream os;
  for (const auto& [sec, keys] : schema()) {
    os << '[' << sec << "]\n";
    for (const auto& k : keys) os << "  " << k << '\n';
  }
  return os.str();
}

}  // namespace nlch
