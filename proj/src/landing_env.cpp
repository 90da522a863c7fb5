#include "vtoldock/landing_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "vtoldock/errors.hpp"

namespace vtoldock::env {

void UavParams::validate() const {
  std::ostringstream bad;
  if (!(mass > 0.0)) bad << " uav.mass=" << mass;
  if (!(k_fdz >= 0.0)) bad << " uav.k_fdz=" << k_fdz;
  if (!(g > 0.0)) bad << " uav.g=" << g;
  if (!(h0 > 0.0)) bad << " uav.h0=" << h0;
  if (!bad.str().empty()) throw ConfigError("invalid UAV parameters:" + bad.str());
}

void RewardParams::validate() const {
  std::ostringstream bad;
  if (!(k1 >= 0.0)) bad << " reward.k1=" << k1;
  if (!(k2 >= 0.0)) bad << " reward.k2=" << k2;
  if (!(v_td >= 0.0)) bad << " reward.v_td=" << v_td;
  if (!(v_max > v_td)) bad << " reward.v_max=" << v_max;
  if (!(h_c > 0.0)) bad << " reward.h_c=" << h_c;
  if (!bad.str().empty()) throw ConfigError("invalid reward parameters:" + bad.str());
}

void PlatformWaveConfig::validate() const {
  spectrum.validate();
  grid.validate();
  if (!(significant_height >= 0.0) || !std::isfinite(significant_height))
    throw ConfigError("invalid wave parameters: wave.significant_height=" +
                      std::to_string(significant_height));
}

double PlatformWaveConfig::amplitude_scale() const {
  if (!rescale) return 1.0;
  const auto s = wave::sample_spectrum(spectrum, grid);
  const double m0 = wave::spectral_variance(s, grid.step());
  return m0 > 0.0 ? significant_height / (4.0 * std::sqrt(m0)) : 0.0;
}

wave::WaveRealization make_platform_wave(const PlatformWaveConfig& cfg,
                                         double duration, double dt,
                                         std::uint64_t seed) {
  auto w = wave::synthesize_wave(cfg.spectrum, cfg.grid, duration, dt, seed);
  const double scale = cfg.amplitude_scale();
  if (scale != 1.0) {
    for (auto& v : w.z_w) v *= scale;
    for (auto& v : w.zdot_w) v *= scale;
  }
  return w;
}

double hover_control(const UavParams& p, double z) {
  return (p.k_fdz / p.mass) * z + p.g;
}

double thrust_from_virtual(const UavParams& p, double U, double phi,
                           double theta) {
  const double c = std::cos(phi) * std::cos(theta);
  if (std::abs(c) < 1e-12) {
    std::ostringstream msg;
    msg << "thrust conversion is singular at phi=" << phi << " theta=" << theta;
    throw DomainError(msg.str());
  }
  return p.mass * U / c;
}

double reference_descent_velocity(double e_p, const RewardParams& rp) {
  const double h = std::max(e_p, 0.0);
  return -rp.v_td - (rp.v_max - rp.v_td) * (1.0 - std::exp(-h / rp.h_c));
}

double reward(const EnvState& s, double zdot_d, const RewardParams& rp) {
  return -rp.k1 * std::abs(s.e_z) - rp.k2 * std::abs(s.zdot - zdot_d);
}

VerticalState vertical_dynamics(const UavParams& p, VerticalState x,
                                double U) {
  return {x.zdot, -(p.k_fdz / p.mass) * x.z - p.g + U};
}

VerticalState rk4_step(const UavParams& p, VerticalState x, double U,
                       double dt) {
  auto axpy = [](VerticalState a, double h, VerticalState d) {
    return VerticalState{a.z + h * d.z, a.zdot + h * d.zdot};
  };
  const auto k1 = vertical_dynamics(p, x, U);
  const auto k2 = vertical_dynamics(p, axpy(x, 0.5 * dt, k1), U);
  const auto k3 = vertical_dynamics(p, axpy(x, 0.5 * dt, k2), U);
  const auto k4 = vertical_dynamics(p, axpy(x, dt, k3), U);
  return {x.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
          x.zdot + dt / 6.0 * (k1.zdot + 2.0 * k2.zdot + 2.0 * k3.zdot + k4.zdot)};
}

void EnvConfig::validate() const {
  uav.validate();
  reward.validate();
  wave.validate();
  std::ostringstream bad;
  if (!(dt > 0.0)) bad << " env.dt=" << dt;
  if (substeps < 1) bad << " env.substeps=" << substeps;
  if (max_steps < 1) bad << " env.max_steps=" << max_steps;
  if (!(delta_u > 0.0)) bad << " env.delta_u=" << delta_u;
  const double u0 = hover_control(uav, uav.h0);
  if (!(u_min < u0 && u0 < u_max))
    bad << " env.u_min=" << u_min << " env.u_max=" << u_max << " (must bracket U0=" << u0 << ')';
  if (!(e_max > uav.h0)) bad << " env.e_max=" << e_max;
  if (!(v_limit > 0.0)) bad << " env.v_limit=" << v_limit;
  if (dt > 0.0 && !(wave.grid.f_max < 0.5 / dt)) bad << " wave.f_max=" << wave.grid.f_max << " (Nyquist)";
  if (!bad.str().empty()) throw ConfigError("invalid environment parameters:" + bad.str());
}

LandingEnv::LandingEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
}

EnvState LandingEnv::reset(std::uint64_t seed) {
  const double duration = static_cast<double>(config_.wave_samples() - 1) * config_.dt;
  return reset(make_platform_wave(config_.wave, duration, config_.dt, seed));
}

EnvState LandingEnv::reset(wave::WaveRealization wave) {
  if (wave.size() < config_.wave_samples()) {
    std::ostringstream msg;
    msg << "wave realization has " << wave.size() << " samples, episode needs "
        << config_.wave_samples();
    throw ConfigError(msg.str());
  }
  wave_ = std::move(wave);
  x_ = {wave_.z_w[0] + config_.uav.h0, 0.0};
  k_ = 0;
  n_ = 0;
  done_ = false;
  trace_.clear();
  return state();
}

EnvState LandingEnv::state() const {
  return {x_.z - wave_.z_w[static_cast<std::size_t>(n_)], x_.zdot};
}

double LandingEnv::discrete_control(int action) const {
  if (action < 0 || action >= kNumDiscreteActions)
    throw std::out_of_range("discrete action index out of range");
  const double u0 = hover_control(config_.uav, x_.z);
  return u0 + (1 - action) * config_.delta_u;
}

StepResult LandingEnv::step_discrete(int action) {
  return step(discrete_control(action));
}

StepResult LandingEnv::step(double control) {
  if (done_) throw std::logic_error("step called on a finished episode");
  const double u = std::clamp(control, config_.u_min, config_.u_max);
  const auto& rp = config_.reward;

  StepResult r;
  r.control = u;
  r.impact_velocity = std::numeric_limits<double>::quiet_NaN();
  for (int sub = 0; sub < config_.substeps && !r.done; ++sub) {
    x_ = rk4_step(config_.uav, x_, u, config_.dt);
    ++n_;
    r.state = state();
    const auto& s = r.state;
    if (!std::isfinite(s.e_z) || !std::isfinite(s.zdot)) {
      r.aborted = r.done = true;
    } else if (s.e_z <= 0.0) {
      r.landed = r.done = true;
      r.impact_velocity = std::abs(s.zdot - wave_.zdot_w[static_cast<std::size_t>(n_)]);
    } else if (s.e_z > config_.e_max || std::abs(s.zdot) > config_.v_limit) {
      r.aborted = r.done = true;
    }
  }
  ++k_;
  if (r.aborted)
    r.reward = config_.abort_penalty();
  else
    r.reward = reward(r.state, reference_descent_velocity(r.state.e_z, rp), rp);
  if (k_ >= config_.max_steps) r.done = true;
  done_ = r.done;

  if (trace_enabled_)
    trace_.push_back({time(), x_.z, wave_.z_w[static_cast<std::size_t>(n_)], x_.zdot, u,
                      r.reward});
  return r;
}

}  // namespace vtoldock::env
