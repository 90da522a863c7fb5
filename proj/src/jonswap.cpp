#include "vtoldock/jonswap.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vtoldock/errors.hpp"
#include "vtoldock/rng.hpp"

namespace vtoldock::wave {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_positive(std::ostringstream& bad, const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) bad << ' ' << name << '=' << v;
}

}  // namespace

void JonswapParams::validate() const {
  std::ostringstream bad;
  check_positive(bad, "alpha_w", alpha_w);
  check_positive(bad, "k_w", k_w);
  check_positive(bad, "f_p", f_p);
  check_positive(bad, "sigma_low", sigma_low);
  check_positive(bad, "sigma_high", sigma_high);
  check_positive(bad, "g", g);
  if (!(gamma_w >= 1.0) || !std::isfinite(gamma_w)) bad << " gamma_w=" << gamma_w;
  if (!bad.str().empty()) throw ConfigError("invalid JONSWAP parameters:" + bad.str());
}

void FrequencyGrid::validate() const {
  std::ostringstream bad;
  if (!(f_min > 0.0)) bad << " f_min=" << f_min;
  if (!(f_max > f_min)) bad << " f_max=" << f_max;
  if (n_bins < 2) bad << " n_bins=" << n_bins;
  if (!bad.str().empty()) throw ConfigError("invalid frequency grid:" + bad.str());
}

WaveRealization WaveRealization::calm(std::size_t samples, double dt) {
  WaveRealization w;
  w.dt = dt;
  w.z_w.assign(samples, 0.0);
  w.zdot_w.assign(samples, 0.0);
  return w;
}

double spectral_density(const JonswapParams& p, double f) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    std::ostringstream msg;
    msg << "spectral_density requires f > 0, got " << f;
    throw DomainError(msg.str());
  }
  const double sigma = f <= p.f_p ? p.sigma_low : p.sigma_high;
  const double scale = p.alpha_w * p.g * p.g / std::pow(p.k_w, 4);
  const double ratio = p.f_p / f;
  const double shape = std::exp(-1.25 * ratio * ratio * ratio * ratio);
  const double df = f - p.f_p;
  const double b = std::exp(-(df * df) / (2.0 * sigma * sigma * p.f_p * p.f_p));
  return scale * std::pow(f, -5.0) * shape * std::pow(p.gamma_w, b);
}

std::vector<SpectrumSample> sample_spectrum(const JonswapParams& params,
                                            const FrequencyGrid& grid) {
  grid.validate();
  std::vector<SpectrumSample> out;
  out.reserve(static_cast<std::size_t>(grid.n_bins));
  for (int i = 0; i < grid.n_bins; ++i) {
    const double f = grid.at(i);
    out.push_back({f, spectral_density(params, f)});
  }
  return out;
}

double spectral_variance(std::span<const SpectrumSample> spectrum, double df) {
  double m0 = 0.0;
  for (const auto& s : spectrum) m0 += s.density * df;
  return m0;
}

WaveRealization synthesize_wave(const JonswapParams& params,
                                const FrequencyGrid& grid, double duration,
                                double dt, std::uint64_t seed) {
  params.validate();
  grid.validate();
  if (!(dt > 0.0) || !(grid.f_max < 0.5 / dt)) {
    std::ostringstream msg;
    msg << "frequency grid f_max=" << grid.f_max
        << " Hz violates the Nyquist limit for dt=" << dt << " s";
    throw ConfigError(msg.str());
  }
  const auto spectrum = sample_spectrum(params, grid);
  return synthesize_from_spectrum(spectrum, grid.step(), duration, dt, seed);
}

WaveRealization synthesize_from_spectrum(
    std::span<const SpectrumSample> spectrum, double df, double duration,
    double dt, std::uint64_t seed) {
  if (!(duration > 0.0) || !(dt > 0.0) || !(dt < duration)) {
    std::ostringstream msg;
    msg << "wave synthesis needs 0 < dt < duration, got dt=" << dt
        << " duration=" << duration;
    throw ConfigError(msg.str());
  }
  if (!(df > 0.0)) throw ConfigError("wave synthesis needs df > 0");
  for (const auto& s : spectrum) {
    if (!(s.f < 0.5 / dt)) {
      std::ostringstream msg;
      msg << "spectrum component f=" << s.f
          << " Hz violates the Nyquist limit for dt=" << dt << " s";
      throw ConfigError(msg.str());
    }
  }

  WaveRealization w;
  w.dt = dt;
  // Small epsilon so that duration an exact multiple of dt keeps its endpoint.
  const auto samples = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  w.z_w.assign(samples, 0.0);
  w.zdot_w.assign(samples, 0.0);

  Rng rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
  w.phases.reserve(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    double phi = phase_dist(rng);
    if (phi >= kTwoPi) phi = 0.0;
    w.phases.push_back(phi);
  }

  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double a = std::sqrt(2.0 * spectrum[i].density * df);
    if (a == 0.0) continue;
    const double omega = kTwoPi * spectrum[i].f;
    const double phi = w.phases[i];
    for (std::size_t k = 0; k < samples; ++k) {
      const double arg = omega * (static_cast<double>(k) * dt) + phi;
      w.z_w[k] += a * std::cos(arg);
      w.zdot_w[k] -= a * omega * std::sin(arg);
    }
  }
  return w;
}

}  // namespace vtoldock::wave
