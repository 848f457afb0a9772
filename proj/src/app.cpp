#include "randlr/app.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "randlr/errors.hpp"
#include "randlr/inducing.hpp"
#include "randlr/linear_response.hpp"
#include "randlr/montecarlo.hpp"

namespace randlr {

namespace {

using json = nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json spectrum_json(const SpectrumReport& s) {
  return {{"lambda1", num(s.lambda1)},     {"lambda2_abs", num(s.lambda2_abs)}, {"gap", num(s.gap)},
          {"min_value", num(s.min_value)}, {"residual", num(s.residual)},       {"warnings", s.warnings}};
}

class Context {
 public:
  Context(std::string command, RunConfig cfg, RunOptions opts)
      : command_(std::move(command)), cfg_(std::move(cfg)), opts_(std::move(opts)) {
    report_["command"] = command_;
  }

  const RunConfig& cfg() const { return cfg_; }
  json& report() { return report_; }

  void log(int level, const std::string& msg) const {
    if (opts_.verbosity >= level) std::cerr << "[randlr " << command_ << "] " << msg << "\n";
  }

  void csv(const std::string& suffix, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& columns) {
    const auto name = command_ + (suffix.empty() ? "" : "_" + suffix) + ".csv";
    std::ofstream out(path(name));
    if (!out) throw NumericalError("cannot write " + path(name), 0.0);
    write_csv(out, header, columns);
    report_["artifacts"].push_back(name);
    log(2, "wrote " + path(name));
  }

  void finish(int code, const std::string& error) {
    report_["exit_code"] = code;
    report_["status"] = code == kExitOk ? "ok" : "error";
    if (!error.empty()) report_["error"] = error;
    report_["config"] = cfg_.to_json();
    std::ofstream out(path(command_ + ".json"));
    out << report_.dump(2) << "\n";
  }

  int threads() const { return opts_.threads; }

 private:
  std::string path(const std::string& name) const { return (std::filesystem::path(opts_.out_dir) / name).string(); }

  std::string command_;
  RunConfig cfg_;
  RunOptions opts_;
  json report_;
};

std::vector<double> unit_grid(int n, bool open_left) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<std::size_t>(i)] = open_left ? (i + 1.0) / n : static_cast<double>(i) / (n - 1);
  return x;
}

std::vector<double> sample(const std::vector<double>& xs, const std::function<double(double)>& f) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(f(x));
  return out;
}

bool has_lsv(const RunConfig& cfg) {
  for (const auto& f : cfg.families)
    if (map_kind_from_string(f.kind) == MapKind::LSV) return true;
  return false;
}

void require_uniform(const RunConfig& cfg) {
  if (!has_lsv(cfg)) return;
  if (cfg.inducing) throw ConfigError("LSV systems go through induced-response (or density with [inducing])");
  throw HypothesisViolation("LSV map: |g'| -> 1 at the neutral fixed point 0; enable [inducing]", 1.0);
}

std::vector<Observable> observables(const RunConfig& cfg) {
  std::vector<Observable> out;
  for (const auto& n : cfg.observables) out.push_back(named_observable(n));
  return out;
}

json fd_json(const std::vector<FdEntry>& fd, const RunConfig& cfg) {
  json arr = json::array();
  for (const auto& e : fd) {
    json o{{"eps", e.eps},
           {"central", e.central},
           {"sup_error", num(e.sup_error)},
           {"c1_error", num(e.c1_error)},
           {"order", num(e.order)}};
    for (std::size_t k = 0; k < e.observable_errors.size(); ++k) o["observable_errors"][cfg.observables[k]] = e.observable_errors[k];
    arr.push_back(o);
  }
  return arr;
}

json response_json(const ResponseReport& r) {
  json j{{"spectrum", spectrum_json(r.spectrum)},
         {"q_mean", num(r.q_mean)},
         {"h_star_mean", num(r.h_star_mean)},
         {"resolvent_residual", num(r.resolvent_residual)},
         {"multiplier", num(r.multiplier)},
         {"tail_bound", num(r.tail_bound)}};
  j["observables"] = json::object();
  for (const auto& o : r.observables) j["observables"][o.name] = num(o.value);
  return j;
}

void response_csv(Context& ctx, const ResponseReport& r) {
  const auto xs = unit_grid(ctx.cfg().grid_points, false);
  ctx.csv("", {"x", "h0", "q", "h_star", "h_star_normalized"},
          {xs, sample(xs, [&](double x) { return r.h0(x); }), sample(xs, [&](double x) { return r.q(x); }),
           sample(xs, [&](double x) { return r.h_star(x); }),
           sample(xs, [&](double x) { return r.h_star_normalized(x); })});
}

json induced_json(const InducedResponse& r) {
  return {{"spectrum", spectrum_json(r.spectrum)},
          {"tail_mass", num(r.tail_mass)},
          {"q_hat_mean", num(r.q_hat_mean)},
          {"multiplier", num(r.multiplier)},
          {"resolvent_residual", num(r.resolvent_residual)},
          {"h_norm", num(r.h_norm)},
          {"h_integral", num(r.h.integral())},
          {"extrapolated_points", r.extrapolated}};
}

int check_hypotheses(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const auto sys = cfg.system();
  bool all_countable = true;
  double beta2 = 0.0;
  for (const auto& f : cfg.families) {
    const MapFamily fam(map_kind_from_string(f.kind), f.param);
    const auto e = check_expansion(fam, 1000, 100);
    json entry{{"family", f.name}, {"kind", f.kind}, {"param", f.param}, {"beta", num(e.beta)},
               {"satisfied", e.satisfied}, {"message", e.message}};
    if (e.satisfied) entry["distortion"] = num(check_distortion(fam, 200, 100));
    all_countable = all_countable && fam.countable();
    ctx.log(2, f.name + ": beta = " + std::to_string(e.beta));
    ctx.report()["families"].push_back(entry);
  }
  const double avg = average_expansion(sys, 0.0, 2001);
  ctx.report()["average_expansion"] = num(avg);
  bool ok = avg < 1.0;
  if (!ok && all_countable) {
    // Gauss and Renyi expand after two steps
    for (const auto& a : sys.components())
      for (const auto& b : sys.components())
        if (a.weight(0.0) > 0.0 && b.weight(0.0) > 0.0)
          beta2 = std::max(beta2, second_iterate_expansion(a.family, b.family, 100, 50));
    ctx.report()["second_iterate_expansion"] = num(beta2);
    ok = beta2 < 1.0;
  }
  if (has_lsv(cfg) && cfg.inducing) {
    const InducedSystem ind(sys, cfg.induced);
    const double b = induced_expansion(ind, 0.0, 200);
    ctx.report()["induced_expansion"] = num(b);
    ok = b <= 0.5 + 1e-12;
    const auto op = induced_operator(ind, 0.0);
    ctx.report()["induced_tail_mass"] = num(op.tail_mass);
    ctx.report()["spectrum"] = spectrum_json(induced_stationary(op).spectrum);
  } else if (ok) {
    const auto op = build_operator(sys, 0.0, cfg.solver.make_basis(), cfg.solver.cutoff, cfg.solver.quad_order);
    ctx.report()["spectrum"] = spectrum_json(stationary_solve(op).spectrum);
  }
  ctx.report()["satisfied"] = ok;
  ctx.log(1, "average expansion = " + std::to_string(avg) + (ok ? ", hypotheses hold" : ", violated"));
  return ok ? kExitOk : kExitHypothesis;
}

int density(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const auto sys = cfg.system();
  if (has_lsv(cfg) && cfg.inducing) {
    const InducedSystem ind(sys, cfg.induced);
    const auto op = induced_operator(ind, 0.0);
    const auto st = induced_stationary(op);
    const auto h = unfold(ind, op, st.density);
    const double mass = h.integral();
    ctx.report()["spectrum"] = spectrum_json(st.spectrum);
    ctx.report()["tail_mass"] = num(op.tail_mass);
    ctx.report()["unnormalized_integral"] = num(mass);
    ctx.report()["fixed_point_defect"] = num(unfold_fixed_point_defect(ind, h, 0.0, 0.1, 200));
    const auto xs = unit_grid(cfg.grid_points, true);
    ctx.csv("", {"x", "h"}, {xs, sample(xs, [&](double x) { return h(x) / mass; })});
    return kExitOk;
  }
  require_uniform(cfg);
  const auto op = cfg.solver.basis == BasisKind::PiecewiseConstant
                      ? ulam_operator(sys, 0.0, cfg.solver.n)
                      : build_operator(sys, 0.0, cfg.solver.make_basis(), cfg.solver.cutoff, cfg.solver.quad_order);
  const auto st = stationary_solve(op);
  ctx.report()["spectrum"] = spectrum_json(st.spectrum);
  ctx.report()["tail_bound"] = num(op.tail_bound);
  ctx.report()["basis"] = to_string(op.basis->kind());
  ctx.report()["size"] = op.size();
  ctx.log(1, "lambda1 = " + std::to_string(st.spectrum.lambda1));
  if (cfg.ulam_bins > 0 && !op.is_ulam()) {
    const auto hu = stationary_solve(ulam_operator(sys, 0.0, cfg.ulam_bins)).density;
    double l1 = 0.0;
    const int k = 20 * cfg.ulam_bins;
    for (int i = 0; i < k; ++i) {
      const double x = (i + 0.5) / k;
      l1 += std::abs(st.density(x) - hu(x)) / k;
    }
    ctx.report()["ulam_l1"] = num(l1);
  }
  const auto xs = unit_grid(cfg.grid_points, false);
  ctx.csv("", {"x", "h"}, {xs, sample(xs, [&](double x) { return st.density(x); })});
  return kExitOk;
}

int response_cmd(Context& ctx, bool fd) {
  const auto& cfg = ctx.cfg();
  require_uniform(cfg);
  const auto sys = cfg.system();
  const auto obs = observables(cfg);
  const auto r = response(sys, cfg.solver, obs);
  ctx.report()["response"] = response_json(r);
  ctx.log(1, "q_mean = " + std::to_string(r.q_mean) + ", residual = " + std::to_string(r.resolvent_residual));
  if (fd) ctx.report()["finite_differences"] = fd_json(finite_difference_check(sys, cfg.solver, cfg.eps_list, r, obs), cfg);
  response_csv(ctx, r);
  return kExitOk;
}

int induced_response_cmd(Context& ctx) {
  const auto& cfg = ctx.cfg();
  if (!cfg.inducing) throw ConfigError("induced-response needs an [inducing] section");
  const InducedSystem ind(cfg.system(), cfg.induced);
  const auto r = full_response(ind);
  ctx.report()["response"] = induced_json(r);
  ctx.report()["fixed_point_defect"] = num(unfold_fixed_point_defect(ind, r.h, 0.0, 0.1, 200));
  ctx.log(1, "h_norm = " + std::to_string(r.h_norm) + ", tail mass = " + std::to_string(r.tail_mass));
  json fd = json::array();
  for (const auto& e : induced_fd_check(ind, cfg.eps_list, r))
    fd.push_back({{"eps", e.eps}, {"central", e.central}, {"h_error", num(e.h_error)}, {"l1_error", num(e.l1_error)},
                  {"order", num(e.order)}});
  ctx.report()["finite_differences"] = fd;
  const auto xs = unit_grid(cfg.grid_points, true);
  ctx.csv("", {"x", "h", "h_star", "q_corr", "f_hstar"},
          {xs, sample(xs, [&](double x) { return r.h(x); }), sample(xs, [&](double x) { return r.h_star(x); }),
           sample(xs, [&](double x) { return r.q_corr(x); }), sample(xs, [&](double x) { return r.f_hstar(x); })});
  return kExitOk;
}

int mc_cmd(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const auto sys = cfg.system();
  const auto obs = observables(cfg);
  OrbitSpec spec{sys, 0.0, cfg.mc.seed, 0, cfg.mc.burn_in, cfg.mc.length, obs, cfg.mc.bins, 50};
  const auto runs = sample_replicas(spec, cfg.mc.replicas, ctx.threads());
  const auto pooled = pooled_histogram(runs);
  json reps = json::array();
  for (const auto& r : runs) {
    json o{{"replica", r.replica}, {"redraws", r.redraws}};
    for (const auto& e : r.observables) o["observables"][e.name] = {{"mean", e.mean}, {"std_error", e.std_error}};
    reps.push_back(o);
  }
  ctx.report()["replicas"] = reps;
  if (!has_lsv(cfg)) {
    const auto h = stationary_solve(build_operator(sys, 0.0, cfg.solver.make_basis(), cfg.solver.cutoff, cfg.solver.quad_order)).density;
    const auto b = bootstrap_l1(runs, [&](double x) { return h(x); });
    ctx.report()["spectral_l1"] = {{"distance", b.distance}, {"bootstrap_ci95", b.ci}, {"pass", b.pass}};
    if (!obs.empty() && sys.admissible(cfg.mc.eps) && sys.admissible(-cfg.mc.eps)) {
      for (const auto& o : obs) {
        const auto c = mc_response_check(sys, cfg.solver, o, cfg.mc.eps, cfg.mc.seed, cfg.mc.length, cfg.mc.replicas,
                                         ctx.threads());
        ctx.report()["response_check"][o.name] = {{"eps", cfg.mc.eps},
                                                  {"fd_estimate", c.fd_estimate},
                                                  {"fd_std_error", c.fd_std_error},
                                                  {"operator_prediction", c.operator_prediction},
                                                  {"bias", c.bias},
                                                  {"z_score", num(c.z_score)}};
      }
    }
  }
  std::vector<double> centers;
  for (int i = 0; i < cfg.mc.bins; ++i) centers.push_back((i + 0.5) / cfg.mc.bins);
  ctx.csv("histogram", {"x", "density"}, {centers, pooled});
  return kExitOk;
}

int gauss_renyi_expansion(Context& ctx) {
  const auto& cfg = ctx.cfg();
  require_uniform(cfg);
  const auto sys = cfg.system();
  const auto r = response(sys, cfg.solver, observables(cfg));
  const auto rem = second_order_remainder(sys, cfg.solver, cfg.eps_list, r);
  double worst = 0.0;
  for (double v : rem) worst = std::max(worst, std::abs(v / rem.front() - 1.0));
  ctx.report()["response"] = response_json(r);
  ctx.report()["eps"] = cfg.eps_list;
  ctx.report()["remainder_over_eps2"] = rem;
  ctx.report()["max_relative_spread"] = num(worst);
  ctx.report()["constant_within_30pct"] = worst <= 0.3;
  ctx.log(1, "remainder spread = " + std::to_string(worst));
  response_csv(ctx, r);
  return kExitOk;
}

int pm_half(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const auto hc = pm_half_check(cfg.pm.alpha0, cfg.pm.alpha_hi, cfg.induced);
  ctx.report()["alpha0"] = hc.alpha0;
  ctx.report()["alpha_hi"] = cfg.pm.alpha_hi;
  ctx.report()["gamma"] = hc.gamma;
  ctx.report()["random_h_norm"] = num(hc.random_norm);
  ctx.report()["deterministic_h_norm"] = num(hc.deterministic_norm);
  ctx.report()["ratio"] = num(hc.ratio);
  ctx.report()["defect"] = num(hc.defect);
  ctx.report()["tail_mass"] = num(hc.tail_mass);
  ctx.report()["within_band"] = hc.ratio >= 0.45 && hc.ratio <= 0.55;
  ctx.log(1, "ratio = " + std::to_string(hc.ratio));
  const auto xs = unit_grid(cfg.grid_points, true);
  ctx.csv("", {"x", "h_star_random", "h_star_deterministic"},
          {xs, sample(xs, [&](double x) { return hc.random->h_star(x); }),
           sample(xs, [&](double x) { return hc.deterministic->h_star(x); })});
  return kExitOk;
}

using Handler = std::function<int(Context&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"check-hypotheses", check_hypotheses},
      {"density", density},
      {"response", [](Context& c) { return response_cmd(c, false); }},
      {"fd-check", [](Context& c) { return response_cmd(c, true); }},
      {"induced-response", induced_response_cmd},
      {"mc", mc_cmd},
      {"gauss-renyi-expansion", gauss_renyi_expansion},
      {"pm-half-check", pm_half},
  };
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-hypotheses", "density", "response", "fd-check",
                                              "induced-response", "mc", "gauss-renyi-expansion", "pm-half-check"};
  return names;
}

int verbosity_from_env() {
  const char* v = std::getenv("RESPONSE_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet" || s == "0") return 0;
  if (s == "debug" || s == "2") return 2;
  return 1;
}

int run_command(const std::string& command, RunConfig cfg, const RunOptions& opts) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) {
    std::cerr << "unknown command '" << command << "'\n";
    return kExitConfig;
  }
  if (opts.seed) cfg.mc.seed = *opts.seed;
  std::filesystem::create_directories(opts.out_dir);
  Context ctx(command, std::move(cfg), opts);
  int code = kExitOk;
  std::string error;
  try {
    code = it->second(ctx);
  } catch (const ConfigError& e) {
    code = kExitConfig;
    error = e.what();
  } catch (const UnsupportedOperation& e) {
    code = kExitConfig;
    error = e.what();
  } catch (const HypothesisViolation& e) {
    code = kExitHypothesis;
    error = e.what();
    ctx.report()["measured"] = num(e.measured());
  } catch (const NumericalError& e) {
    code = kExitNumerical;
    error = e.what();
    ctx.report()["residual"] = num(e.residual());
  } catch (const PreconditionError& e) {
    code = kExitNumerical;
    error = e.what();
  }
  if (!error.empty()) std::cerr << "randlr " << command << ": " << error << "\n";
  ctx.finish(code, error);
  return code;
}

}  // namespace randlr
