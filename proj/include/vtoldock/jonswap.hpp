#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vtoldock::wave {

// JONSWAP spectral model parameters. The spectrum is scaled by
// alpha_w * g^2 / k_w^4, with k_w exposed as a tunable constant.
struct JonswapParams {
  double alpha_w = 0.0081;   // Phillips constant
  double k_w = 0.016;        // von Karman constant
  double f_p = 0.1;          // peak frequency [Hz]
  double gamma_w = 3.3;      // peak enhancement
  double sigma_low = 0.07;   // width for f <= f_p
  double sigma_high = 0.09;  // width for f > f_p
  double g = 9.81;

  // Throws ConfigError listing every invalid field.
  void validate() const;
};

// Uniformly spaced frequency samples f_i = f_min + i * step(), i < n_bins.
struct FrequencyGrid {
  double f_min = 0.02;
  double f_max = 1.0;
  int n_bins = 256;

  double step() const { return (f_max - f_min) / (n_bins - 1); }
  double at(int i) const { return f_min + i * step(); }
  void validate() const;
};

struct SpectrumSample {
  double f;
  double density;
};

// One episode of platform motion sampled at t_k = k * dt.
struct WaveRealization {
  double dt = 0.0;
  std::vector<double> z_w;
  std::vector<double> zdot_w;
  std::vector<double> phases;

  std::size_t size() const { return z_w.size(); }

  // Flat sea of `samples` points; used for deterministic environment tests.
  static WaveRealization calm(std::size_t samples, double dt);
};

// S(f) in m^2 s. Throws DomainError for f <= 0 or non-finite f.
double spectral_density(const JonswapParams& params, double f);

std::vector<SpectrumSample> sample_spectrum(const JonswapParams& params,
                                            const FrequencyGrid& grid);

// Sum of S(f_i) * df, the variance the synthesized signal should carry.
double spectral_variance(std::span<const SpectrumSample> spectrum, double df);

// Random-phase Fourier synthesis:
//   z_w(t)    =  sum_i a_i cos(2 pi f_i t + phi_i)
//   zdot_w(t) = -sum_i a_i 2 pi f_i sin(2 pi f_i t + phi_i)
// with a_i = sqrt(2 S(f_i) df) and phi_i ~ U[0, 2 pi) drawn from `seed`.
// The realization has floor(duration / dt) + 1 samples starting at t = 0.
// Throws ConfigError if the grid's f_max is at or above the Nyquist limit.
WaveRealization synthesize_wave(const JonswapParams& params,
                                const FrequencyGrid& grid, double duration,
                                double dt, std::uint64_t seed);

// Same synthesis from explicit spectrum samples spaced `df` apart.
WaveRealization synthesize_from_spectrum(
    std::span<const SpectrumSample> spectrum, double df, double duration,
    double dt, std::uint64_t seed);

}  // namespace vtoldock::wave
