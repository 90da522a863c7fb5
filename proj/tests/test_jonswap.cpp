#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vtoldock/errors.hpp"
#include "vtoldock/jonswap.hpp"

using namespace vtoldock;
using namespace vtoldock::wave;

namespace {

// Reference values from a 40-digit evaluation of the closed form with the
// default parameters (0.0081, 0.016, 0.1 Hz, 3.3, 0.07, 0.09, 9.81).
constexpr double kS_0_10 = 1124576335806.66476430648442424078760748;
constexpr double kS_0_08 = 175099152968.7096495229932020701499576451;
constexpr double kS_0_13 = 207757955290.3066169376653479199542603069;

double sample_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST(Spectrum, MatchesHighPrecisionReference) {
  const JonswapParams p;
  EXPECT_NEAR(spectral_density(p, 0.10) / kS_0_10, 1.0, 1e-12);
  EXPECT_NEAR(spectral_density(p, 0.08) / kS_0_08, 1.0, 1e-12);
  EXPECT_NEAR(spectral_density(p, 0.13) / kS_0_13, 1.0, 1e-12);
}

TEST(Spectrum, PeakValueCollapsesExponent) {
  JonswapParams p;
  p.f_p = 0.25;
  p.gamma_w = 2.0;
  const double expected = p.alpha_w * p.g * p.g / std::pow(p.k_w, 4) * std::pow(p.f_p, -5) *
                          std::exp(-1.25) * p.gamma_w;
  EXPECT_NEAR(spectral_density(p, p.f_p) / expected, 1.0, 1e-13);
}

TEST(Spectrum, DecaysFarAbovePeak) {
  const JonswapParams p;
  EXPECT_LT(spectral_density(p, 100.0 * p.f_p), 1e-6 * spectral_density(p, p.f_p));
}

TEST(Spectrum, RejectsNonPositiveFrequency) {
  const JonswapParams p;
  EXPECT_THROW(spectral_density(p, 0.0), DomainError);
  EXPECT_THROW(spectral_density(p, -1.0), DomainError);
  EXPECT_THROW(spectral_density(p, std::nan("")), DomainError);
}

TEST(Spectrum, ValidateListsEveryBadField) {
  JonswapParams p;
  p.k_w = 0.0;
  p.gamma_w = 0.5;
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("k_w"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("gamma_w"), std::string::npos);
  }
}

TEST(SampleSpectrum, TwoPointGridMatchesSingleCalls) {
  const JonswapParams p;
  const FrequencyGrid grid{p.f_p, 2.0 * p.f_p, 2};
  const auto s = sample_spectrum(p, grid);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].density, spectral_density(p, p.f_p));
  EXPECT_EQ(s[1].density, spectral_density(p, 2.0 * p.f_p));
}

TEST(SampleSpectrum, PeakWithinOneBinOnDefaultGrid) {
  const JonswapParams p;
  const FrequencyGrid grid;
  const auto s = sample_spectrum(p, grid);
  ASSERT_EQ(s.size(), 256u);
  const auto peak = std::max_element(s.begin(), s.end(), [](auto& a, auto& b) {
    return a.density < b.density;
  });
  EXPECT_LE(std::abs(peak->f - p.f_p), grid.step());
  for (const auto& x : s) EXPECT_GE(x.density, 0.0);
}

TEST(SampleSpectrum, PeakWithinOneBinOnDenseGrid) {
  JonswapParams p;
  p.f_p = 0.17;
  const FrequencyGrid grid{p.f_p / 4.0, 4.0 * p.f_p, 2001};
  const auto s = sample_spectrum(p, grid);
  const auto peak = std::max_element(s.begin(), s.end(), [](auto& a, auto& b) {
    return a.density < b.density;
  });
  EXPECT_LE(std::abs(peak->f - p.f_p), grid.step());
}

TEST(Synthesis, VarianceMatchesSpectralIntegral) {
  const JonswapParams p;
  const FrequencyGrid grid;
  const auto w = synthesize_wave(p, grid, 2000.0, 0.1, 7);
  const auto s = sample_spectrum(p, grid);
  const double m0 = spectral_variance(s, grid.step());
  EXPECT_NEAR(sample_variance(w.z_w) / m0, 1.0, 0.05);
}

TEST(Synthesis, DerivativeIsConsistent) {
  const JonswapParams p;
  const FrequencyGrid grid;
  const auto w = synthesize_wave(p, grid, 60.0, 0.01, 3);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 1; k + 1 < w.size(); ++k) {
    const double fd = (w.z_w[k + 1] - w.z_w[k - 1]) / (2.0 * w.dt);
    worst = std::max(worst, std::abs(fd - w.zdot_w[k]));
    scale = std::max(scale, std::abs(w.zdot_w[k]));
  }
  EXPECT_LT(worst / scale, 0.01);
}

TEST(Synthesis, SameSeedSameRealization) {
  const JonswapParams p;
  const FrequencyGrid grid;
  const auto a = synthesize_wave(p, grid, 10.0, 0.01, 99);
  const auto b = synthesize_wave(p, grid, 10.0, 0.01, 99);
  const auto c = synthesize_wave(p, grid, 10.0, 0.01, 100);
  EXPECT_EQ(a.z_w, b.z_w);
  EXPECT_EQ(a.phases, b.phases);
  EXPECT_NE(a.z_w, c.z_w);
}

TEST(Synthesis, PhasesInHalfOpenRangeAndSampleCount) {
  const auto w = synthesize_wave(JonswapParams{}, FrequencyGrid{}, 10.0, 0.01, 5);
  EXPECT_EQ(w.size(), 1001u);
  EXPECT_EQ(w.zdot_w.size(), w.size());
  ASSERT_EQ(w.phases.size(), 256u);
  for (double ph : w.phases) {
    EXPECT_GE(ph, 0.0);
    EXPECT_LT(ph, 2.0 * std::numbers::pi);
  }
}

TEST(Synthesis, ZeroSpectrumGivesFlatSea) {
  std::vector<SpectrumSample> zero(32);
  for (int i = 0; i < 32; ++i) zero[i] = {0.05 + 0.01 * i, 0.0};
  const auto w = synthesize_from_spectrum(zero, 0.01, 5.0, 0.01, 1);
  for (std::size_t k = 0; k < w.size(); ++k) {
    EXPECT_EQ(w.z_w[k], 0.0);
    EXPECT_EQ(w.zdot_w[k], 0.0);
  }
}

TEST(Synthesis, SingleComponentIsACosine) {
  const std::vector<SpectrumSample> one{{0.2, 2.0}};
  const double df = 0.25;
  const auto w = synthesize_from_spectrum(one, df, 10.0, 0.05, 11);
  const double a = std::sqrt(2.0 * 2.0 * df);
  const double phi = w.phases[0];
  for (std::size_t k = 0; k < w.size(); k += 17) {
    const double t = static_cast<double>(k) * 0.05;
    EXPECT_NEAR(w.z_w[k], a * std::cos(2 * std::numbers::pi * 0.2 * t + phi), 1e-12);
    EXPECT_NEAR(w.zdot_w[k], -a * 2 * std::numbers::pi * 0.2 * std::sin(2 * std::numbers::pi * 0.2 * t + phi), 1e-12);
  }
}

TEST(Synthesis, RejectsNyquistViolationAndBadDurations) {
  const JonswapParams p;
  const FrequencyGrid grid;  // f_max = 1 Hz
  EXPECT_THROW(synthesize_wave(p, grid, 10.0, 0.5, 1), ConfigError);
  EXPECT_THROW(synthesize_wave(p, grid, 0.0, 0.01, 1), ConfigError);
  EXPECT_THROW(synthesize_wave(p, grid, 0.01, 0.01, 1), ConfigError);
}

TEST(FrequencyGridTest, ValidateRejectsDegenerateGrids) {
  EXPECT_THROW((FrequencyGrid{0.0, 1.0, 10}.validate()), ConfigError);
  EXPECT_THROW((FrequencyGrid{0.5, 0.4, 10}.validate()), ConfigError);
  EXPECT_THROW((FrequencyGrid{0.1, 1.0, 1}.validate()), ConfigError);
  EXPECT_NO_THROW(FrequencyGrid{}.validate());
}
