#include "randlr/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "randlr/errors.hpp"

namespace randlr {

namespace {

namespace pt = boost::property_tree;

class Reader {
 public:
  Reader(std::string text, std::string source) : source_(std::move(source)) {
    std::istringstream lines(text);
    std::string line, section;
    int no = 0;
    while (std::getline(lines, line)) {
      ++no;
      boost::algorithm::trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = boost::algorithm::trim_copy(line.substr(1, line.size() - 2));
        lines_[section] = no;
        sections_.push_back(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq != std::string::npos) lines_[section + '\x1f' + boost::algorithm::trim_copy(line.substr(0, eq))] = no;
    }
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      std::ostringstream os;
      os << source_ << ":" << e.line() << ": " << e.message();
      throw ConfigError(os.str());
    }
  }

  const pt::ptree& tree() const { return tree_; }
  /// Section names in file order, including empty ones.
  const std::vector<std::string>& sections() const { return sections_; }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    auto it = lines_.find(key.empty() ? section : section + '\x1f' + key);
    if (it != lines_.end()) os << ":" << it->second;
    os << ": [" << section << "]" << (key.empty() ? "" : " " + key) << ": " << msg;
    throw ConfigError(os.str());
  }

 private:
  std::string source_;
  pt::ptree tree_;
  std::map<std::string, int> lines_;
  std::vector<std::string> sections_;
};

class Section {
 public:
  Section(const Reader& r, std::string name, const pt::ptree& node) : r_(r), name_(std::move(name)), node_(node) {}

  bool has(const std::string& key) const { return node_.find(key) != node_.not_found(); }
  std::string str(const std::string& key, const std::string& def) const {
    auto it = node_.find(key);
    if (it == node_.not_found()) return def;
    used_.push_back(key);
    return boost::algorithm::trim_copy(it->second.data());
  }
  double num(const std::string& key, double def) const {
    if (!has(key)) return def;
    return parse_double(key, str(key, ""));
  }
  long integer(const std::string& key, long def, long lo) const {
    if (!has(key)) return def;
    const std::string s = str(key, "");
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) fail(key, "expected an integer, got '" + s + "'");
    if (v < lo) fail(key, "must be >= " + std::to_string(lo));
    return v;
  }
  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const auto s = boost::algorithm::to_lower_copy(str(key, ""));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    fail(key, "expected a boolean, got '" + s + "'");
  }
  std::vector<double> list(const std::string& key, const std::vector<double>& def) const {
    if (!has(key)) return def;
    return parse_list(key, str(key, ""));
  }
  std::vector<std::string> words(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    boost::algorithm::split(out, str(key, ""), boost::is_any_of(","));
    for (auto& w : out) boost::algorithm::trim(w);
    std::erase_if(out, [](const std::string& w) { return w.empty(); });
    return out;
  }
  std::vector<double> parse_list(const std::string& key, const std::string& s) const {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, s, boost::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) out.push_back(parse_double(key, boost::algorithm::trim_copy(p)));
    return out;
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const { r_.fail(name_, key, msg); }

  void check_unused() const {
    for (const auto& kv : node_)
      if (std::find(used_.begin(), used_.end(), kv.first) == used_.end()) fail(kv.first, "unknown key");
  }

 private:
  double parse_double(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) fail(key, "expected a number, got '" + s + "'");
    return v;
  }

  const Reader& r_;
  std::string name_;
  const pt::ptree& node_;
  mutable std::vector<std::string> used_;
};

void read_family(const Section& s, FamilySpec& f) {
  f.kind = boost::algorithm::to_lower_copy(s.str("kind", ""));
  if (f.kind.empty()) s.fail("kind", "missing map kind");
  try {
    map_kind_from_string(f.kind);
  } catch (const ConfigError& e) {
    s.fail("kind", e.what());
  }
  f.param = s.num("param", 0.0);
  f.weight = s.list("weight", {1.0});
  auto& d = f.dist;
  d.kind = boost::algorithm::to_lower_copy(s.str("dist.kind", "fixed"));
  d.a = s.num("dist.a", f.param);
  d.lo = s.num("dist.lo", d.lo);
  d.hi = s.num("dist.hi", d.hi);
  d.atoms = s.list("dist.atoms", {});
  if (s.has("dist.weights")) {
    std::vector<std::string> polys;
    boost::algorithm::split(polys, s.str("dist.weights", ""), boost::is_any_of(";"));
    for (const auto& p : polys) d.weights.push_back(s.parse_list("dist.weights", p));
  }
  d.alpha0 = s.num("dist.alpha0", f.param);
  d.alpha1 = s.num("dist.alpha1", 0.0);
  static const std::vector<std::string> kinds{"fixed", "dirac_translate", "dirac_mixture", "pm_smooth",
                                              "uniform_to_dirac"};
  if (std::find(kinds.begin(), kinds.end(), d.kind) == kinds.end()) s.fail("dist.kind", "unknown distribution '" + d.kind + "'");
  if (d.kind == "dirac_mixture" && d.atoms.size() != d.weights.size())
    s.fail("dist.weights", "need one weight polynomial per atom");
  s.check_unused();
}

ParameterDistribution make_dist(const DistSpec& d) {
  if (d.kind == "fixed") return ParameterDistribution::fixed(d.a);
  if (d.kind == "dirac_translate") return ParameterDistribution::dirac_translate(d.a, d.lo, d.hi);
  if (d.kind == "dirac_mixture") {
    std::vector<Polynomial> w;
    for (const auto& c : d.weights) w.emplace_back(c);
    return ParameterDistribution::dirac_mixture(d.atoms, std::move(w), d.lo, d.hi);
  }
  if (d.kind == "pm_smooth") return ParameterDistribution::pm_smooth(d.alpha0, d.alpha1);
  return ParameterDistribution::uniform_to_dirac(d.a, d.hi);
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::stringstream buf;
  buf << in.rdbuf();
  const Reader r(buf.str(), source);
  RunConfig cfg;
  cfg.source = source;
  for (const auto& name : r.sections()) {
    if (name == "inducing") cfg.inducing = true;
    if (!boost::algorithm::starts_with(name, "family.") && name != "solver" && name != "inducing" && name != "mc" &&
        name != "pm")
      r.fail(name, "", "unknown section");
  }
  for (const auto& [name, node] : r.tree()) {
    const Section s(r, name, node);
    if (!node.data().empty()) r.fail("", name, "key outside a section");
    if (boost::algorithm::starts_with(name, "family.")) {
      FamilySpec f;
      f.name = name.substr(7);
      read_family(s, f);
      cfg.families.push_back(std::move(f));
    } else if (name == "solver") {
      const auto basis = boost::algorithm::to_lower_copy(s.str("basis", "chebyshev"));
      if (basis == "chebyshev")
        cfg.solver.basis = BasisKind::Chebyshev;
      else if (basis == "fourier")
        cfg.solver.basis = BasisKind::Fourier;
      else if (basis == "ulam")
        cfg.solver.basis = BasisKind::PiecewiseConstant;
      else
        s.fail("basis", "unknown basis '" + basis + "'");
      cfg.solver.n = static_cast<int>(s.integer("n", cfg.solver.basis == BasisKind::Fourier ? 65 : 41, 4));
      cfg.solver.cutoff = static_cast<int>(s.integer("cutoff", cfg.solver.cutoff, 1));
      cfg.solver.quad_order = static_cast<int>(s.integer("quad_order", cfg.solver.quad_order, 1));
      cfg.ulam_bins = static_cast<int>(s.integer("ulam_bins", cfg.ulam_bins, 0));
      cfg.eps_list = s.list("eps", cfg.eps_list);
      cfg.observables = s.words("observables");
      cfg.grid_points = static_cast<int>(s.integer("grid_points", cfg.grid_points, 2));
      s.check_unused();
    } else if (name == "inducing") {
      cfg.inducing = s.flag("enabled", true);
      auto& o = cfg.induced;
      o.nmax = static_cast<int>(s.integer("nmax", o.nmax, 2));
      o.n_delta = static_cast<int>(s.integer("n_delta", o.n_delta, 4));
      o.panels = static_cast<int>(s.integer("panels", o.panels, 1));
      o.panel_nodes = static_cast<int>(s.integer("panel_nodes", o.panel_nodes, 4));
      o.quad_order = static_cast<int>(s.integer("quad_order", o.quad_order, 1));
      o.tail_threshold = s.num("tail_threshold", o.tail_threshold);
      o.gamma = s.num("gamma", o.gamma);
      if (!(o.gamma > 0.0 && o.gamma <= 1.0)) s.fail("gamma", "must lie in (0, 1]");
      s.check_unused();
    } else if (name == "mc") {
      cfg.mc.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long>(cfg.mc.seed), 0));
      cfg.mc.length = s.integer("length", cfg.mc.length, 1);
      cfg.mc.burn_in = s.integer("burn_in", cfg.mc.burn_in, 0);
      cfg.mc.bins = static_cast<int>(s.integer("bins", cfg.mc.bins, 1));
      cfg.mc.replicas = static_cast<int>(s.integer("replicas", cfg.mc.replicas, 1));
      cfg.mc.eps = s.num("eps", cfg.mc.eps);
      s.check_unused();
    } else if (name == "pm") {
      cfg.pm.alpha0 = s.num("alpha0", cfg.pm.alpha0);
      cfg.pm.alpha_hi = s.num("alpha_hi", cfg.pm.alpha_hi);
      s.check_unused();
    } else {
      r.fail(name, "", "unknown section");
    }
  }
  for (const auto& o : cfg.observables) {
    try {
      named_observable(o);
    } catch (const ConfigError& e) {
      r.fail("solver", "observables", e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

RandomSystem RunConfig::system() const {
  if (families.empty()) throw ConfigError(source + ": no [family.*] section");
  std::vector<Component> comps;
  for (const auto& f : families) {
    try {
      comps.push_back(Component{MapFamily(map_kind_from_string(f.kind), f.param), Polynomial(f.weight), make_dist(f.dist)});
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": [family." + f.name + "]: " + e.what());
    }
  }
  return RandomSystem(std::move(comps));
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["source"] = source;
  for (const auto& f : families) {
    nlohmann::json d{{"kind", f.dist.kind}, {"a", f.dist.a}, {"lo", finite_or_null(f.dist.lo)},
                     {"hi", finite_or_null(f.dist.hi)}, {"atoms", f.dist.atoms}, {"weights", f.dist.weights},
                     {"alpha0", f.dist.alpha0}, {"alpha1", f.dist.alpha1}};
    j["families"].push_back({{"name", f.name}, {"kind", f.kind}, {"param", f.param}, {"weight", f.weight}, {"dist", d}});
  }
  j["solver"] = {{"basis", to_string(solver.basis)}, {"n", solver.n},        {"cutoff", solver.cutoff},
                 {"quad_order", solver.quad_order},   {"ulam_bins", ulam_bins}, {"eps", eps_list},
                 {"observables", observables},        {"grid_points", grid_points}};
  j["inducing"] = {{"enabled", inducing},           {"nmax", induced.nmax},
                   {"n_delta", induced.n_delta},    {"panels", induced.panels},
                   {"panel_nodes", induced.panel_nodes}, {"quad_order", induced.quad_order},
                   {"tail_threshold", induced.tail_threshold}, {"gamma", induced.gamma}};
  j["mc"] = {{"seed", mc.seed}, {"length", mc.length},     {"burn_in", mc.burn_in},
             {"bins", mc.bins}, {"replicas", mc.replicas}, {"eps", mc.eps}};
  j["pm"] = {{"alpha0", pm.alpha0}, {"alpha_hi", pm.alpha_hi}};
  return j;
}

Observable named_observable(const std::string& name) {
  constexpr double tau = 2.0 * std::numbers::pi;
  if (name == "x") return {name, [](double x) { return x; }};
  if (name == "x2") return {name, [](double x) { return x * x; }};
  if (name == "cos2pi") return {name, [](double x) { return std::cos(tau * x); }};
  if (name == "sin2pi") return {name, [](double x) { return std::sin(tau * x); }};
  throw ConfigError("unknown observable '" + name + "' (x, x2, cos2pi, sin2pi)");
}

}  // namespace randlr
