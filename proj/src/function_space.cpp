#include "randlr/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "randlr/errors.hpp"

namespace randlr {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Chebyshev: return "chebyshev";
    case BasisKind::Fourier: return "fourier";
    case BasisKind::PiecewiseConstant: return "ulam";
  }
  return "?";
}

Basis::Basis(BasisKind kind, int n, double lo, double hi) : kind_(kind), n_(n), lo_(lo), hi_(hi) {
  if (n < 4) throw ConfigError("basis size must be >= 4");
  if (!(hi > lo)) throw ConfigError("basis interval is empty");
  nodes_.resize(n);
  weights_.resize(n);
  switch (kind) {
    case BasisKind::Chebyshev: {
      const int m = n - 1;
      bary_.resize(n);
      for (int j = 0; j < n; ++j) {
        nodes_[j] = lo + (hi - lo) * 0.5 * (1.0 - std::cos(kPi * j / m));
        bary_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == m) ? 0.5 : 1.0);
      }
      nodes_[0] = lo;
      nodes_[m] = hi;
      // Clenshaw-Curtis.
      for (int j = 0; j < n; ++j) {
        const double theta = kPi * j / m;
        double s = 0.0;
        for (int k = 1; k <= m / 2; ++k) {
          const double b = (2 * k == m) ? 1.0 : 2.0;
          s += b / (4.0 * k * k - 1.0) * std::cos(2.0 * k * theta);
        }
        const double c = (j == 0 || j == m) ? 1.0 : 2.0;
        weights_[j] = c / m * (1.0 - s) * 0.5 * (hi - lo);
      }
      diff_ = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          diff_(i, j) = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
          diag -= diff_(i, j);
        }
        diff_(i, i) = diag;
      }
      break;
    }
    case BasisKind::Fourier: {
      lo_ = 0.0;
      hi_ = 1.0;
      for (int j = 0; j < n; ++j) {
        nodes_[j] = static_cast<double>(j) / n;
        weights_[j] = 1.0 / n;
      }
      diff_.resize(n, n);
      std::vector<double> row(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        deriv_row(nodes_[i], row);
        for (int j = 0; j < n; ++j) diff_(i, j) = row[static_cast<std::size_t>(j)];
      }
      break;
    }
    case BasisKind::PiecewiseConstant: {
      const double h = (hi - lo) / n;
      for (int j = 0; j < n; ++j) {
        nodes_[j] = lo + (j + 0.5) * h;
        weights_[j] = h;
      }
      break;
    }
  }
}

std::shared_ptr<const Basis> Basis::chebyshev(int n, double lo, double hi) {
  return std::make_shared<const Basis>(BasisKind::Chebyshev, n, lo, hi);
}
std::shared_ptr<const Basis> Basis::fourier(int n) { return std::make_shared<const Basis>(BasisKind::Fourier, n, 0.0, 1.0); }
std::shared_ptr<const Basis> Basis::piecewise_constant(int k, double lo, double hi) {
  return std::make_shared<const Basis>(BasisKind::PiecewiseConstant, k, lo, hi);
}

const Eigen::MatrixXd& Basis::diff_matrix() const {
  if (kind_ == BasisKind::PiecewiseConstant) throw UnsupportedOperation("differentiation is not defined on the Ulam basis");
  return diff_;
}

void Basis::interp_row(double x, std::span<double> out) const {
  switch (kind_) {
    case BasisKind::Chebyshev: {
      double denom = 0.0;
      for (int j = 0; j < n_; ++j) {
        const double d = x - nodes_[j];
        if (d == 0.0) {
          std::fill(out.begin(), out.end(), 0.0);
          out[static_cast<std::size_t>(j)] = 1.0;
          return;
        }
        out[static_cast<std::size_t>(j)] = bary_[j] / d;
        denom += out[static_cast<std::size_t>(j)];
      }
      for (auto& v : out) v /= denom;
      return;
    }
    case BasisKind::Fourier: {
      x -= std::floor(x);
      const bool odd = n_ % 2 == 1;
      for (int j = 0; j < n_; ++j) {
        const double t = x - nodes_[j];
        const double s = std::sin(kPi * t);
        double v;
        if (std::abs(s) < 1e-15)
          v = 1.0;
        else if (odd)
          v = std::sin(n_ * kPi * t) / (n_ * s);
        else
          v = std::sin(n_ * kPi * t) * std::cos(kPi * t) / (n_ * s);
        out[static_cast<std::size_t>(j)] = v;
      }
      return;
    }
    case BasisKind::PiecewiseConstant: {
      std::fill(out.begin(), out.end(), 0.0);
      int k = static_cast<int>(std::floor((x - lo_) / (hi_ - lo_) * n_));
      k = std::clamp(k, 0, n_ - 1);
      out[static_cast<std::size_t>(k)] = 1.0;
      return;
    }
  }
}

void Basis::deriv_row(double x, std::span<double> out) const {
  switch (kind_) {
    case BasisKind::Chebyshev: {
      std::vector<double> r(static_cast<std::size_t>(n_));
      interp_row(x, r);
      for (int j = 0; j < n_; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) acc += r[static_cast<std::size_t>(i)] * diff_(i, j);
        out[static_cast<std::size_t>(j)] = acc;
      }
      return;
    }
    case BasisKind::Fourier: {
      x -= std::floor(x);
      const bool odd = n_ % 2 == 1;
      for (int j = 0; j < n_; ++j) {
        const double t = x - nodes_[j];
        const double s = std::sin(kPi * t), c = std::cos(kPi * t);
        const double S = std::sin(n_ * kPi * t), C = std::cos(n_ * kPi * t);
        double v;
        if (std::abs(s) < 1e-15)
          v = 0.0;
        else if (odd)
          v = kPi * (n_ * C * s - S * c) / (n_ * s * s);
        else
          v = kPi * (n_ * C * c / s - S / (s * s)) / n_;
        out[static_cast<std::size_t>(j)] = v;
      }
      return;
    }
    case BasisKind::PiecewiseConstant: throw UnsupportedOperation("differentiation is not defined on the Ulam basis");
  }
}

DensityFunction::DensityFunction(BasisPtr basis, Eigen::VectorXd values) : basis_(std::move(basis)), values_(std::move(values)) {
  if (values_.size() != basis_->size()) throw ConfigError("DensityFunction: coefficient count does not match basis");
}

DensityFunction DensityFunction::sample(BasisPtr basis, const std::function<double(double)>& f) {
  Eigen::VectorXd v(basis->size());
  for (int j = 0; j < basis->size(); ++j) v[j] = f(basis->nodes()[j]);
  return {std::move(basis), std::move(v)};
}

DensityFunction DensityFunction::zero(BasisPtr basis) {
  const int n = basis->size();
  return {std::move(basis), Eigen::VectorXd::Zero(n)};
}

double DensityFunction::operator()(double x) const {
  std::vector<double> r(static_cast<std::size_t>(basis_->size()));
  basis_->interp_row(x, r);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), basis_->size()).dot(values_);
}

double DensityFunction::derivative_at(double x) const {
  std::vector<double> r(static_cast<std::size_t>(basis_->size()));
  basis_->deriv_row(x, r);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), basis_->size()).dot(values_);
}

DensityFunction DensityFunction::operator+(const DensityFunction& o) const { return {basis_, values_ + o.values_}; }
DensityFunction DensityFunction::operator-(const DensityFunction& o) const { return {basis_, values_ - o.values_}; }
DensityFunction DensityFunction::operator*(double s) const { return {basis_, values_ * s}; }

double eval(const DensityFunction& f, double x) { return f(x); }

double integrate(const DensityFunction& f) { return f.basis()->weights().dot(f.values()); }

DensityFunction differentiate(const DensityFunction& f) {
  return {f.basis(), f.basis()->diff_matrix() * f.values()};
}

namespace {
std::vector<double> refined_grid(const Basis& b, int grid) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(grid + b.size()));
  const double hi = b.periodic() ? 1.0 - 1.0 / grid : b.hi();
  for (int i = 0; i < grid; ++i) xs.push_back(b.lo() + (hi - b.lo()) * i / (grid - 1));
  for (int j = 0; j < b.size(); ++j) xs.push_back(b.nodes()[j]);
  return xs;
}
}  // namespace

double sup_norm(const DensityFunction& f, int grid) {
  double m = 0.0;
  if (f.basis()->kind() == BasisKind::PiecewiseConstant) return f.values().cwiseAbs().maxCoeff();
  for (double x : refined_grid(*f.basis(), grid)) m = std::max(m, std::abs(f(x)));
  return m;
}

double c1_norm(const DensityFunction& f, int grid) {
  const auto df = differentiate(f);
  double m0 = 0.0, m1 = 0.0;
  for (double x : refined_grid(*f.basis(), grid)) {
    m0 = std::max(m0, std::abs(f(x)));
    m1 = std::max(m1, std::abs(df(x)));
  }
  return m0 + m1;
}

std::vector<double> h_norm_grid(int points, double smallest) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(points));
  const int geo = points / 2;
  const int uni = points - geo;
  for (int i = 0; i < geo; ++i) xs.push_back(smallest * std::pow(0.5 / smallest, static_cast<double>(i) / (geo - 1)));
  for (int i = 1; i <= uni; ++i) xs.push_back(static_cast<double>(i) / uni);
  std::sort(xs.begin(), xs.end());
  return xs;
}

double h_norm(const std::function<double(double)>& f, double gamma, const std::vector<double>& grid) {
  if (gamma < 0.0) throw ConfigError("h_norm: gamma must be >= 0");
  double m = 0.0;
  for (double x : grid) m = std::max(m, std::abs(std::pow(x, gamma) * f(x)));
  return m;
}

double h_norm(const DensityFunction& f, double gamma) {
  return h_norm([&](double x) { return f(x); }, gamma, h_norm_grid());
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  os << std::setprecision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c][r];
    os << '\n';
  }
}

}  // namespace randlr
