#include <doctest.h>

#include <cmath>
#include <random>

#include "randlr/errors.hpp"
#include "randlr/inducing.hpp"

using namespace randlr;

namespace {

RandomSystem lsv_system(double u, ParameterDistribution eta) {
  return RandomSystem({Component{MapFamily::lsv(u), Polynomial::constant(1.0), std::move(eta)}});
}

RandomSystem dirac_lsv(double u) { return lsv_system(u, ParameterDistribution::dirac_translate(u, 0.05, 0.95)); }

RandomSystem pm_smooth_system() { return lsv_system(0.25, ParameterDistribution::pm_smooth(0.25, 0.45)); }

std::vector<double> random_word(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.25, 0.45);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& v : w) v = u(rng);
  return w;
}

}  // namespace

TEST_CASE("x_n sequence") {
  const std::vector<double> w(10, 0.3);
  CHECK(xn_sequence(w, 1).x == 0.5);
  CHECK(xn_sequence(w, 1).x_prime == 0.75);
  const Branch g(MapKind::LSV, 0, 0.3);
  CHECK(xn_sequence(w, 2).x == doctest::Approx(g(0.5)).epsilon(1e-15));
  for (int n = 1; n < 9; ++n) {
    CHECK(xn_sequence(w, n + 1).x < xn_sequence(w, n).x);
    CHECK(xn_sequence(w, n + 1).x_prime < xn_sequence(w, n).x_prime);
  }
  // constant words bracket every mixed word
  std::mt19937_64 rng(5);
  const std::vector<double> lo(12, 0.25), hi(12, 0.45);
  for (int k = 0; k < 50; ++k) {
    const auto word = random_word(rng, 12);
    const double x = xn_sequence(word, 12).x;
    CHECK(x >= xn_sequence(lo, 12).x);
    CHECK(x <= xn_sequence(hi, 12).x);
  }
  CHECK_THROWS_AS(xn_sequence(w, 11), PreconditionError);
}

TEST_CASE("first return time") {
  const std::vector<double> w(20, 0.3);
  CHECK(first_return_time(w, 0.8) == 1);
  CHECK(first_return_time(w, 1.0) == 1);
  CHECK(first_return_time(w, xn_sequence(w, 2).x_prime + 1e-12) == 2);
  CHECK_THROWS_AS(first_return_time(w, 0.4), PreconditionError);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(0.5, 1.0);
  int agree = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto word = random_word(rng, 400);
    const double x = std::max(ux(rng), 0.5 + 1e-6);
    const int r = first_return_time(word, x);
    const double hi = r == 1 ? 1.0 : xn_sequence(word, r - 1).x_prime;
    if (x > xn_sequence(word, r).x_prime && x <= hi) ++agree;
  }
  CHECK(agree == 1000);
}

TEST_CASE("panel grid") {
  const PanelGrid g(10, 12);
  CHECK(g.size() == 120);
  CHECK(g.lowest() == std::ldexp(1.0, -11));
  CHECK(g.panel_of(0.5) == 0);
  CHECK(g.panel_of(0.3) == 0);
  CHECK(g.panel_of(0.2) == 1);
  CHECK(g.panel_of(1e-9) == 9);
  CHECK(g.extrapolated(1e-4));
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = std::sqrt(g.points()[i]);
  CHECK(g.eval(v, 0.33) == doctest::Approx(std::sqrt(0.33)).epsilon(1e-10));
  CHECK(g.eval_derivative(v, 0.01) == doctest::Approx(0.5 / std::sqrt(0.01)).epsilon(1e-9));
  CHECK(g.weights().dot(v) == doctest::Approx((2.0 / 3.0) * (std::pow(0.5, 1.5) - std::pow(2.0, -16.5))).epsilon(1e-12));
}

TEST_CASE("dirac eta: nested operator equals classical induced operator") {
  InducedOptions o;
  const InducedSystem ind(dirac_lsv(0.3), o);
  const auto op = induced_operator(ind, 0.0);
  double tail = 0.0;
  const auto en = enumerated_induced_operator(0.3, ind.delta_basis(), o.nmax, &tail);
  CHECK((op.op.matrix - en.matrix).cwiseAbs().maxCoeff() <= 1e-8);
  // cylinder partition and the x_N / 2 tail
  CHECK(op.tail_mass == doctest::Approx(tail).epsilon(1e-6));
  const std::vector<double> w(static_cast<std::size_t>(o.nmax), 0.3);
  CHECK(std::abs(tail - 0.5 * xn_sequence(w, o.nmax).x) <= 1e-15);
  double mass = 0.0;
  for (double m : op.length_mass) mass += m;
  CHECK(std::abs(mass + op.tail_mass - 0.5) <= 1e-9);
  // length masses are the cylinder lengths x'_{n-1} - x'_n
  for (int n = 1; n <= 10; ++n) {
    const double hi = n == 1 ? 1.0 : xn_sequence(w, n - 1).x_prime;
    CHECK(op.length_mass[static_cast<std::size_t>(n - 1)] == doctest::Approx(hi - xn_sequence(w, n).x_prime).epsilon(1e-9));
  }
  const auto st = induced_stationary(op);
  CHECK(std::abs(st.spectrum.lambda1 - 1.0) <= 10 * op.tail_mass);
  CHECK(st.density.values().minCoeff() > 0.5);
}

TEST_CASE("induced duality, expansion, truncation error") {
  const InducedSystem ind(pm_smooth_system());
  const auto op = induced_operator(ind, 0.01);
  CHECK(op.tail_mass > 0.0);
  CHECK(op.tail_mass < 1e-3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const auto& b = ind.delta_basis();
  for (int k = 0; k < 20; ++k) {
    std::vector<double> c(7);
    for (auto& v : c) v = nd(rng);
    const auto phi = DensityFunction::sample(b, [&](double x) {
      double s = 0.0;
      for (int d = 6; d >= 0; --d) s = s * x + c[static_cast<std::size_t>(d)];
      return std::abs(s);
    });
    // positive Phi: the lost mass is at most the tail times sup Phi
    const double lost = integrate(phi) - integrate(op.op.apply(phi));
    CHECK(lost >= -1e-9);
    CHECK(lost <= op.tail_mass * phi.values().cwiseAbs().maxCoeff() * 1.01 + 1e-9);
  }
  CHECK(induced_expansion(ind, 0.0, 100) <= 0.5);

  InducedOptions short_words;
  short_words.nmax = 3;
  CHECK_THROWS_AS(induced_operator(InducedSystem(pm_smooth_system(), short_words), 0.0), NumericalError);
  CHECK_THROWS_AS(InducedSystem(RandomSystem::single(MapFamily::gauss())), ConfigError);
}

TEST_CASE("unfold: linearity, fixed point, Ulam oracle") {
  const InducedSystem ind(pm_smooth_system());
  const auto op = induced_operator(ind, 0.0);
  const auto& b = ind.delta_basis();
  const auto p1 = DensityFunction::sample(b, [](double x) { return 1.0 + x; });
  const auto p2 = DensityFunction::sample(b, [](double x) { return std::cos(x); });
  const auto lhs = unfold(ind, op, p1 * 2.0 + p2 * -3.0);
  const auto rhs = unfold(ind, op, p1) * 2.0 + unfold(ind, op, p2) * -3.0;
  CHECK((lhs.left - rhs.left).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(lhs(0.7) == doctest::Approx(2 * 1.7 - 3 * std::cos(0.7)));

  const auto st = induced_stationary(op);
  const auto h = unfold(ind, op, st.density);
  const double defect = unfold_fixed_point_defect(ind, h, 0.0, 0.1, 200);
  // on Δ the defect is (1 - lambda) h-hat
  CHECK(defect <= (1.0 - st.spectrum.lambda1) * st.density.values().maxCoeff() * 1.01 + 1e-7);
  CHECK(unfold_fixed_point_defect(ind, h, 0.0, 0.1, 40) >= 0.0);
  // below 1/2 the defect is the first omitted term A^N W h-hat
  const auto terms = word_terms(ind, op, st.density);
  const Eigen::VectorXd next = op.a_grid * terms.back();
  const auto& pts = ind.grid()->points();
  int tested = 0;
  for (int i = 0; i < pts.size(); ++i) {
    const double x = pts[i];
    if (x < 0.1) continue;
    double lx = 0.5 * h(0.5 * (x + 1.0));
    for (const auto& node : ParameterDistribution::pm_smooth(0.25, 0.45).eta_rule(0.0, 24)) {
      const auto j = Branch(MapKind::LSV, 0, node.u).jet(x);
      lx += node.w * h(j.g) * j.d1;
    }
    CHECK(std::abs(lx - h(x) - next[i]) <= 1e-10);
    ++tested;
  }
  CHECK(tested > 20);

  const auto hu = stationary_solve(ulam_operator(ind.base(), 0.0, 4096)).density;
  const double m = h.integral();
  double l1 = 0.0;
  const int k = 20000;
  for (int i = 0; i < k; ++i) {
    const double x = 0.05 + 0.95 * (i + 0.5) / k;
    l1 += std::abs(h(x) / m - hu(x)) * 0.95 / k;
  }
  CHECK(l1 <= 2e-2);
}

TEST_CASE("q correction") {
  // eps-independent law
  const InducedSystem frozen(lsv_system(0.3, ParameterDistribution::fixed(0.3)));
  const auto op = induced_operator(frozen, 0.0);
  const auto st = induced_stationary(op);
  const auto q = q_correction(frozen, st.density);
  CHECK(q.left.cwiseAbs().maxCoeff() == 0.0);
  CHECK(q.delta.values().cwiseAbs().maxCoeff() == 0.0);
  const auto r = full_response(frozen);
  CHECK(r.h_star.left.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(r.hhat_star.values().cwiseAbs().maxCoeff() <= 1e-10);

  // per-length terms against central differences at 20 grid points
  const InducedSystem ind(pm_smooth_system());
  const auto op0 = induced_operator(ind, 0.0);
  const auto hh = induced_stationary(op0).density;
  const auto der = induced_derivative(ind, op0, hh);
  CHECK(der.q_corr(0.75) == 0.0);
  const std::vector<double> eps{1e-2, 5e-3};
  std::vector<double> errs;
  for (double e : eps) {
    const auto tp = word_terms(ind, induced_operator(ind, e), hh);
    const auto tm = word_terms(ind, induced_operator(ind, -e), hh);
    double worst = 0.0;
    for (int n : {1, 2, 5, 10, 20}) {
      const auto& d = der.term_derivatives[static_cast<std::size_t>(n)];
      for (int i = 0; i < 4; ++i) {
        const int idx = 5 * i + 7;
        const double fd = (tp[static_cast<std::size_t>(n)][idx] - tm[static_cast<std::size_t>(n)][idx]) / (2 * e);
        worst = std::max(worst, std::abs(fd - d[idx]) / std::max(1.0, std::abs(d[idx])));
      }
    }
    errs.push_back(worst);
  }
  CHECK(std::log(errs[0] / errs[1]) / std::log(2.0) >= 1.8);
}

TEST_CASE("dirac eta response equals the deterministic induced response") {
  InducedOptions o;
  const InducedSystem ind(dirac_lsv(0.3), o);
  const auto r = full_response(ind);
  const auto d = deterministic_induced_response(0.3, o);
  CHECK((r.hhat_star.values() - d.hhat_star.values()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((r.q_hat.values() - d.q_hat.values()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((r.h_star.left - d.h_star.left).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, d.h_star.left.cwiseAbs().maxCoeff()));
  CHECK(r.h_norm == doctest::Approx(d.h_norm).epsilon(1e-8));
}

TEST_CASE("pm smooth family: finite differences in the H-norm") {
  const InducedSystem ind(pm_smooth_system());
  const auto r = full_response(ind);
  CHECK(std::isfinite(r.h_norm));
  CHECK(r.h.integral() > 1.0);
  const auto fd = induced_fd_check(ind, {0.02, 0.01}, r);
  CHECK(fd[1].h_error < fd[0].h_error);
  CHECK(fd[1].order >= 0.8);
  CHECK(fd[1].l1_error < fd[0].l1_error);
}

TEST_CASE("uniform to dirac: half the deterministic response") {
  const auto hc = pm_half_check(0.25, 0.45, InducedOptions{});
  CHECK(hc.ratio >= 0.45);
  CHECK(hc.ratio <= 0.55);
  CHECK(hc.defect <= 1e-8 * hc.deterministic_norm);
}
