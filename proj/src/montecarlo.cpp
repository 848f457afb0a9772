#include "randlr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "randlr/errors.hpp"
#include "randlr/quadrature.hpp"

namespace randlr {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kComponent = 0, kParameter = 1, kJitter = 2, kRedraw = 3 };

constexpr std::uint64_t kInitialStep = ~0ULL;
// low-bit refresh for circle maps (the doubling map empties the mantissa otherwise)
const double kJitterScale = std::ldexp(1.0, -40);

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t step, std::uint64_t stream) const {
  std::uint64_t z = mix(seed);
  z = mix(z ^ (replica * 0xD1B54A32D192ED03ULL));
  z = mix(z ^ step);
  return mix(z ^ (stream * 0x8CB92BA72F3D8DD7ULL));
}

double CounterRng::uniform(std::uint64_t step, std::uint64_t stream) const {
  return static_cast<double>(bits(step, stream) >> 11) * 0x1.0p-53;
}

double random_step(const RandomSystem& system, double eps, const CounterRng& rng, std::uint64_t step, double x) {
  const auto& comps = system.components();
  const double u0 = rng.uniform(step, kComponent);
  std::size_t k = 0;
  double acc = comps[0].weight(eps);
  while (u0 >= acc && k + 1 < comps.size()) acc += comps[++k].weight(eps);
  const auto& c = comps[k];
  const double p = c.eta.sample(eps, rng.uniform(step, kParameter));
  double y = c.family.with_param(p).forward(x);
  if (system.domain() == Domain::Circle) {
    y += (rng.uniform(step, kJitter) - 0.5) * kJitterScale;
    y -= std::floor(y);
  }
  return y;
}

OrbitStats sample_orbit(const OrbitSpec& spec) {
  if (spec.length < 1 || spec.burn_in < 0 || spec.bins < 1 || spec.batches < 2)
    throw ConfigError("orbit spec needs length >= 1, burn_in >= 0, bins >= 1, batches >= 2");
  spec.system.check_eps(spec.eps);
  const CounterRng rng{spec.seed, spec.replica};
  OrbitStats out;
  out.seed = spec.seed;
  out.replica = spec.replica;
  out.length = spec.length;
  out.histogram.assign(static_cast<std::size_t>(spec.bins), 0.0);
  const std::size_t nobs = spec.observables.size();
  const long batch = std::max(1L, spec.length / spec.batches);
  std::vector<std::vector<double>> batch_means(nobs);
  std::vector<double> batch_sum(nobs, 0.0);
  long in_batch = 0;

  double x = rng.uniform(kInitialStep, kRedraw);
  const bool interval = spec.system.domain() == Domain::UnitInterval;
  const long total = spec.burn_in + spec.length;
  for (long n = 0; n < total; ++n) {
    const auto step = static_cast<std::uint64_t>(n);
    x = random_step(spec.system, spec.eps, rng, step, x);
    if (interval && !(x > 0.0 && x < 1.0)) {
      x = rng.uniform(step, kRedraw);
      ++out.redraws;
    }
    if (n < spec.burn_in) continue;
    const auto bin = std::min(static_cast<std::size_t>(x * spec.bins), static_cast<std::size_t>(spec.bins - 1));
    out.histogram[bin] += 1.0;
    for (std::size_t j = 0; j < nobs; ++j) batch_sum[j] += spec.observables[j].phi(x);
    if (++in_batch == batch) {
      for (std::size_t j = 0; j < nobs; ++j) {
        batch_means[j].push_back(batch_sum[j] / static_cast<double>(batch));
        batch_sum[j] = 0.0;
      }
      in_batch = 0;
    }
  }
  for (auto& h : out.histogram) h *= static_cast<double>(spec.bins) / static_cast<double>(spec.length);
  for (std::size_t j = 0; j < nobs; ++j) {
    const auto& bm = batch_means[j];
    ObservableEstimate e{spec.observables[j].name, 0.0, 0.0};
    const auto b = static_cast<double>(bm.size());
    for (double v : bm) e.mean += v / b;
    double ss = 0.0;
    for (double v : bm) ss += (v - e.mean) * (v - e.mean);
    e.std_error = bm.size() > 1 ? std::sqrt(ss / (b - 1.0) / b) : 0.0;
    out.observables.push_back(e);
  }
  return out;
}

std::vector<OrbitStats> sample_replicas(const OrbitSpec& spec, int replicas, int threads) {
  std::vector<OrbitStats> out(static_cast<std::size_t>(replicas));
  const int nt = std::clamp(threads, 1, std::max(1, replicas));
  auto work = [&](int t) {
    for (int r = t; r < replicas; r += nt) {
      OrbitSpec s = spec;
      s.replica = static_cast<std::uint64_t>(r);
      out[static_cast<std::size_t>(r)] = sample_orbit(s);
    }
  };
  if (nt == 1) {
    work(0);
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(work, t);
  for (auto& th : pool) th.join();
  return out;
}

std::vector<double> pooled_histogram(const std::vector<OrbitStats>& runs) {
  if (runs.empty()) throw PreconditionError("pooled_histogram: no runs");
  std::vector<double> h(runs.front().histogram.size(), 0.0);
  for (const auto& r : runs)
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += r.histogram[i] / static_cast<double>(runs.size());
  return h;
}

double histogram_l1(const std::vector<double>& histogram, const std::function<double(double)>& f) {
  const auto k = static_cast<double>(histogram.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    const double a = static_cast<double>(i) / k, b = static_cast<double>(i + 1) / k;
    double avg = 0.0;
    for (const auto& n : gauss_legendre(8, a, b)) avg += n.w * f(n.u);
    l1 += std::abs(histogram[i] - avg * k) / k;
  }
  return l1;
}

BootstrapL1 bootstrap_l1(const std::vector<OrbitStats>& runs, const std::function<double(double)>& density,
                         int resamples, std::uint64_t seed, double factor) {
  const auto pooled = pooled_histogram(runs);
  BootstrapL1 out;
  out.distance = histogram_l1(pooled, density);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, runs.size() - 1);
  std::vector<double> dist;
  std::vector<OrbitStats> sample(runs.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& s : sample) s = runs[pick(rng)];
    const auto h = pooled_histogram(sample);
    double l1 = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) l1 += std::abs(h[i] - pooled[i]) / static_cast<double>(h.size());
    dist.push_back(l1);
  }
  std::sort(dist.begin(), dist.end());
  out.ci = dist[static_cast<std::size_t>(0.95 * static_cast<double>(dist.size() - 1))];
  out.pass = out.distance <= factor * out.ci;
  return out;
}

namespace {

double pair(const Observable& o, const DensityFunction& f) {
  const auto& b = *f.basis();
  double s = 0.0;
  for (int j = 0; j < b.size(); ++j) s += b.weights()[j] * o.phi(b.nodes()[j]) * f.values()[j];
  return s;
}

}  // namespace

McResponseCheck mc_response_check(const RandomSystem& system, const SolverOptions& opts, const Observable& phi,
                                  double eps, std::uint64_t seed, long length, int replicas, int threads) {
  if (!system.admissible(eps) || !system.admissible(-eps))
    throw ConfigError("mc_response_check needs both +eps and -eps admissible");
  McResponseCheck out;
  const auto r = response(system, opts, {phi});
  out.operator_prediction = r.observables.front().value;
  const auto basis = r.h0.basis();
  auto h = [&](double e) {
    return stationary_solve(build_operator(system, e, basis, opts.cutoff, opts.quad_order)).density;
  };
  out.bias = (pair(phi, h(eps)) - pair(phi, h(-eps))) / (2 * eps) - out.operator_prediction;

  OrbitSpec spec{system, eps, seed, 0, 1000, length, {phi}, 16, 50};
  const auto plus = sample_replicas(spec, replicas, threads);
  spec.eps = -eps;
  const auto minus = sample_replicas(spec, replicas, threads);
  double var = 0.0;
  for (int k = 0; k < replicas; ++k) {
    const auto& a = plus[static_cast<std::size_t>(k)].observables.front();
    const auto& b = minus[static_cast<std::size_t>(k)].observables.front();
    out.fd_estimate += (a.mean - b.mean) / (2 * eps) / replicas;
    var += (a.std_error * a.std_error + b.std_error * b.std_error) / (4 * eps * eps);
  }
  out.fd_std_error = std::sqrt(var) / replicas;
  out.z_score = (out.fd_estimate - out.operator_prediction) /
                std::sqrt(out.fd_std_error * out.fd_std_error + out.bias * out.bias);
  return out;
}

}  // namespace randlr
