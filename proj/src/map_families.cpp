#include "randlr/map_families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "randlr/errors.hpp"

namespace randlr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Safeguarded Newton for an increasing function f on [lo, hi] with f(lo) <= 0 <= f(hi).
template <typename F, typename DF>
double monotone_root(F f, DF df, double lo, double hi, double guess) {
  double y = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double fy = f(y);
    if (fy == 0.0) return y;
    if (fy < 0.0)
      lo = y;
    else
      hi = y;
    const double d = df(y);
    double next = y - fy / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - y);
    y = next;
    if (step <= 4e-16 * std::max(std::abs(y), 1e-300) || hi - lo <= 4e-16 * std::max(std::abs(y), 1e-300))
      return y;
  }
  const double r = f(y);
  if (std::abs(r) > 1e-12) throw NumericalError("inverse branch root finder did not converge", r);
  return y;
}

// Jet of the inverse from the forward derivatives at y = g(x).
BranchJet inverse_jet(double y, double t1, double t2, double t3) {
  const double g1 = 1.0 / t1;
  BranchJet j;
  j.g = y;
  j.d1 = g1;
  j.d2 = -t2 * g1 * g1 * g1;
  j.d3 = -t3 * std::pow(g1, 4) + 3.0 * t2 * t2 * std::pow(g1, 5);
  return j;
}

struct LsvForward {
  double t, t1, t2, t3;
};

LsvForward lsv_left(double y, double u) {
  const double p = std::pow(2.0 * y, u);
  LsvForward f{};
  f.t = y * (1.0 + p);
  f.t1 = 1.0 + (1.0 + u) * p;
  if (y > 0.0) {
    f.t2 = u * (1.0 + u) * p / y;
    f.t3 = u * (1.0 + u) * (u - 1.0) * p / (y * y);
  }
  return f;
}

double lsv_left_inverse(double x, double u) {
  if (x <= 0.0) return 0.0;
  return monotone_root([&](double y) { return lsv_left(y, u).t - x; },
                       [&](double y) { return lsv_left(y, u).t1; }, 0.0, std::min(x, 0.5), x / (1.0 + std::pow(2.0 * x, u)));
}

double circle_inverse(double target, double lambda) {
  return monotone_root([&](double y) { return 2.0 * y + lambda * std::sin(kTwoPi * y) - target; },
                       [&](double y) { return 2.0 + kTwoPi * lambda * std::cos(kTwoPi * y); }, 0.0, 1.0,
                       0.5 * target);
}

void validate(MapKind kind, double param) {
  if (kind == MapKind::ExpandingCircle && !(std::abs(param) < 1.0 / kTwoPi)) {
    std::ostringstream os;
    os << "ExpandingCircle requires |lambda| < 1/(2 pi), got " << param;
    throw ConfigError(os.str());
  }
  if (kind == MapKind::LSV && !(param > 0.0 && param < 1.0)) {
    std::ostringstream os;
    os << "LSV requires u in (0,1), got " << param;
    throw ConfigError(os.str());
  }
}

}  // namespace

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::ExpandingCircle: return "circle";
    case MapKind::Gauss: return "gauss";
    case MapKind::Renyi: return "renyi";
    case MapKind::LSV: return "lsv";
  }
  return "?";
}

MapKind map_kind_from_string(const std::string& name) {
  if (name == "circle" || name == "expanding_circle") return MapKind::ExpandingCircle;
  if (name == "gauss") return MapKind::Gauss;
  if (name == "renyi") return MapKind::Renyi;
  if (name == "lsv" || name == "pm") return MapKind::LSV;
  throw ConfigError("unknown map kind '" + name + "'");
}

BranchJet Branch::jet(double x) const {
  switch (kind_) {
    case MapKind::Gauss: {
      const double s = 1.0 / (index_ + x);
      return {s, -s * s, 2.0 * s * s * s, -6.0 * s * s * s * s};
    }
    case MapKind::Renyi: {
      const double s = 1.0 / (index_ + x);
      return {1.0 - s, s * s, -2.0 * s * s * s, 6.0 * s * s * s * s};
    }
    case MapKind::ExpandingCircle: {
      if (x < 0.0 || x > 1.0) x -= std::floor(x);
      const double y = circle_inverse(x + index_, param_);
      const double c = std::cos(kTwoPi * y), s = std::sin(kTwoPi * y);
      return inverse_jet(y, 2.0 + kTwoPi * param_ * c, -kTwoPi * kTwoPi * param_ * s,
                         -kTwoPi * kTwoPi * kTwoPi * param_ * c);
    }
    case MapKind::LSV: {
      if (index_ == 1) return {0.5 * (x + 1.0), 0.5, 0.0, 0.0};
      const double y = lsv_left_inverse(x, param_);
      const auto f = lsv_left(y, param_);
      return inverse_jet(y, f.t1, f.t2, f.t3);
    }
  }
  return {};
}

double Branch::derivative(double x, int order) const {
  const auto j = jet(x);
  switch (order) {
    case 0: return j.g;
    case 1: return j.d1;
    case 2: return j.d2;
    case 3: return j.d3;
    default: throw ConfigError("inverse_branch_derivative: order must be in 0..3");
  }
}

ParamJet Branch::param_jet(double x) const {
  // g_u(x) solves T_u(g) = x, so dg/du = -dT/du / T' and
  // d(g')/du = -(dT'/du + T'' dg/du) / T'^2, all evaluated at g.
  switch (kind_) {
    case MapKind::Gauss:
    case MapKind::Renyi: return {};
    case MapKind::ExpandingCircle: {
      if (x < 0.0 || x > 1.0) x -= std::floor(x);
      const double y = circle_inverse(x + index_, param_);
      const double c = std::cos(kTwoPi * y), s = std::sin(kTwoPi * y);
      const double t1 = 2.0 + kTwoPi * param_ * c;
      const double t2 = -kTwoPi * kTwoPi * param_ * s;
      const double dg = -s / t1;
      return {dg, -(kTwoPi * c + t2 * dg) / (t1 * t1)};
    }
    case MapKind::LSV: {
      if (index_ == 1) return {};
      const double y = lsv_left_inverse(x, param_);
      if (y <= 0.0) return {};
      const auto f = lsv_left(y, param_);
      const double p = std::pow(2.0 * y, param_);
      const double l = std::log(2.0 * y);
      const double dt = y * p * l;
      const double dt1 = p + (1.0 + param_) * p * l;
      const double dg = -dt / f.t1;
      return {dg, -(dt1 + f.t2 * dg) / (f.t1 * f.t1)};
    }
  }
  return {};
}

std::pair<double, double> Branch::range() const {
  switch (kind_) {
    case MapKind::Gauss: return {1.0 / (index_ + 1.0), 1.0 / index_};
    case MapKind::Renyi: return {1.0 - 1.0 / index_, 1.0 - 1.0 / (index_ + 1.0)};
    case MapKind::ExpandingCircle:
    case MapKind::LSV: return index_ == 0 ? std::pair{0.0, 0.5} : std::pair{0.5, 1.0};
  }
  return {0.0, 0.0};
}

MapFamily::MapFamily(MapKind kind, double param) : kind_(kind), param_(param) { validate(kind, param); }

Domain MapFamily::domain() const {
  return kind_ == MapKind::ExpandingCircle ? Domain::Circle : Domain::UnitInterval;
}

std::pair<double, double> MapFamily::param_range() const {
  switch (kind_) {
    case MapKind::ExpandingCircle: return {-1.0 / kTwoPi, 1.0 / kTwoPi};
    case MapKind::LSV: return {0.0, 1.0};
    default: return {0.0, 0.0};
  }
}

double MapFamily::forward(double x) const {
  switch (kind_) {
    case MapKind::ExpandingCircle: {
      const double t = 2.0 * x + param_ * std::sin(kTwoPi * x);
      return t - std::floor(t);
    }
    case MapKind::Gauss: {
      if (x <= 0.0) return 0.0;
      const double t = 1.0 / x;
      return t - std::floor(t);
    }
    case MapKind::Renyi: {
      if (x >= 1.0) return 0.0;
      const double t = 1.0 / (1.0 - x);
      return t - std::floor(t);
    }
    case MapKind::LSV:
      // Left branch closed at 1/2.
      if (x <= 0.5) return x * (1.0 + std::pow(2.0 * x, param_));
      return 2.0 * x - 1.0;
  }
  return 0.0;
}

void MapFamily::forward_jet(double x, double& t, double& t1, double& t2) const {
  switch (kind_) {
    case MapKind::ExpandingCircle:
      t = 2.0 * x + param_ * std::sin(kTwoPi * x);
      t1 = 2.0 + kTwoPi * param_ * std::cos(kTwoPi * x);
      t2 = -kTwoPi * kTwoPi * param_ * std::sin(kTwoPi * x);
      return;
    case MapKind::Gauss:
      t = 1.0 / x;
      t1 = -1.0 / (x * x);
      t2 = 2.0 / (x * x * x);
      return;
    case MapKind::Renyi: {
      const double s = 1.0 / (1.0 - x);
      t = s;
      t1 = s * s;
      t2 = 2.0 * s * s * s;
      return;
    }
    case MapKind::LSV:
      if (x <= 0.5) {
        const auto f = lsv_left(x, param_);
        t = f.t;
        t1 = f.t1;
        t2 = f.t2;
      } else {
        t = 2.0 * x - 1.0;
        t1 = 2.0;
        t2 = 0.0;
      }
      return;
  }
}

BranchSet MapFamily::branches(int cutoff) const {
  BranchSet set;
  if (countable()) {
    if (cutoff < 1) throw ConfigError("branch cutoff must be >= 1");
    set.branches.reserve(static_cast<std::size_t>(cutoff));
    for (int n = 1; n <= cutoff; ++n) set.branches.emplace_back(kind_, n, param_);
    // sup_x (n+x)^-2 = n^-2 and sum_{n>N} n^-2 <= 1/N.
    set.tail_bound = 1.0 / cutoff;
  } else {
    set.branches.emplace_back(kind_, 0, param_);
    set.branches.emplace_back(kind_, 1, param_);
  }
  return set;
}

TailPiece MapFamily::tail_piece(int cutoff, double x) const {
  // sum_{n>N} Phi(1/(n+x)) (n+x)^-2 ~ int_{N+1/2}^inf Phi(1/(t+x)) (t+x)^-2 dt
  //                                  = int_0^{1/(N+1/2+x)} Phi(s) ds.
  const double s = 1.0 / (cutoff + 0.5 + x);
  if (kind_ == MapKind::Gauss) return {0.0, s};
  if (kind_ == MapKind::Renyi) return {1.0 - s, 1.0};
  return {};
}

void MapFamily::param_forward_jet(double x, double& dt, double& dt1) const {
  dt = dt1 = 0.0;
  switch (kind_) {
    case MapKind::ExpandingCircle:
      dt = std::sin(kTwoPi * x);
      dt1 = kTwoPi * std::cos(kTwoPi * x);
      return;
    case MapKind::LSV:
      if (x > 0.0 && x <= 0.5) {
        const double p = std::pow(2.0 * x, param_), l = std::log(2.0 * x);
        dt = x * p * l;
        dt1 = p + (1.0 + param_) * p * l;
      }
      return;
    default: return;
  }
}

double forward_map(const MapFamily& family, double x) { return family.forward(x); }

BranchSet branches(const MapFamily& family, int cutoff) { return family.branches(cutoff); }

double inverse_branch_derivative(const Branch& branch, double x, int order) { return branch.derivative(x, order); }

ExpansionReport check_expansion(const MapFamily& family, int grid_size, int cutoff) {
  if (grid_size < 2) throw ConfigError("check_expansion: grid_size must be >= 2");
  const auto set = family.branches(cutoff);
  double beta = 0.0;
  for (const auto& b : set.branches)
    for (int i = 0; i < grid_size; ++i) {
      const double x = static_cast<double>(i) / (grid_size - 1);
      beta = std::max(beta, std::abs(b.jet(x).d1));
    }
  ExpansionReport rep;
  rep.beta = beta;
  rep.satisfied = beta < 1.0;
  std::ostringstream os;
  if (rep.satisfied)
    os << "uniform expansion holds with beta = " << beta;
  else
    os << "uniform expansion fails for " << to_string(family.kind()) << ": sup |g'| = " << beta << " >= 1";
  rep.message = os.str();
  return rep;
}

double check_distortion(const MapFamily& family, int grid_size, int cutoff) {
  if (grid_size < 2) throw ConfigError("check_distortion: grid_size must be >= 2");
  const auto set = family.branches(cutoff);
  std::vector<double> xs(static_cast<std::size_t>(grid_size)), d(xs.size());
  for (int i = 0; i < grid_size; ++i) xs[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_size - 1);
  double best = 0.0;
  for (const auto& b : set.branches) {
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = b.jet(xs[i]).d1;
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = i + 1; j < xs.size(); ++j)
        best = std::max({best, std::abs(d[i] / d[j] - 1.0) / (xs[j] - xs[i]),
                         std::abs(d[j] / d[i] - 1.0) / (xs[j] - xs[i])});
  }
  return best;
}

}  // namespace randlr
