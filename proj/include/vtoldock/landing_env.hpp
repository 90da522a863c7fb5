#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "vtoldock/jonswap.hpp"

namespace vtoldock::env {

struct UavParams {
  double mass = 1.0;    // [kg]
  double k_fdz = 0.1;   // vertical drag coefficient, multiplies position
  double g = 9.81;
  double h0 = 5.0;      // hover height above the platform at handoff [m]

  void validate() const;
};

struct RewardParams {
  double k1 = 0.003;          // height error gain
  double k2 = 0.3;            // velocity error gain
  double v_max = 2.0;         // descent speed far from the pad [m/s]
  double h_c = 5.0 / 3.0;     // decay height of the reference profile [m]
  double v_td = 0.1;          // touchdown speed target [m/s]

  void validate() const;
};

// Platform heave: a JONSWAP realization. When `rescale` is set the signal
// is scaled so that its significant height 4*sqrt(m0) equals
// `significant_height` (0 gives a flat sea); otherwise the raw spectral
// amplitudes are used.
struct PlatformWaveConfig {
  wave::JonswapParams spectrum;
  wave::FrequencyGrid grid;
  bool rescale = true;
  double significant_height = 0.5;  // [m]

  // Factor applied to the synthesized signal.
  double amplitude_scale() const;

  void validate() const;
};

wave::WaveRealization make_platform_wave(const PlatformWaveConfig& cfg,
                                         double duration, double dt,
                                         std::uint64_t seed);

enum class ActionMode { discrete, continuous };

inline constexpr int kNumDiscreteActions = 3;

struct EnvConfig {
  UavParams uav;
  RewardParams reward;
  PlatformWaveConfig wave;
  double dt = 0.01;         // RK4 integration step [s]
  int substeps = 5;         // integration steps per agent decision
  int max_steps = 200;      // per-episode decision budget k_f
  double delta_u = 1.5;     // discrete offset around U0 [m/s^2]
  double u_min = 0.0;       // [m/s^2]
  double u_max = 2.0 * 9.81;
  double e_max = 10.0;      // |e_z| clamp [m]
  double v_limit = 10.0;    // |zdot| clamp [m/s]

  void validate() const;
  double abort_penalty() const { return -reward.k1 * e_max * 10.0; }
  double decision_dt() const { return dt * substeps; }
  // Wave samples needed for one full episode.
  std::size_t wave_samples() const {
    return static_cast<std::size_t>(max_steps) * static_cast<std::size_t>(substeps) + 1;
  }
};

// Observation (e_z, zdot) with e_z = z - z_w.
struct EnvState {
  double e_z = 0.0;
  double zdot = 0.0;

  std::array<double, 2> observation() const { return {e_z, zdot}; }
};

struct VerticalState {
  double z = 0.0;
  double zdot = 0.0;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
  bool landed = false;
  bool aborted = false;
  double impact_velocity = 0.0;  // |zdot - zdot_w| at contact, NaN otherwise
  double control = 0.0;          // U actually applied after clamping
};

// Hover law U0 = (k_fdz / m) z + g cancelling drag and gravity.
double hover_control(const UavParams& params, double z);

// Actual thrust u = m U / (cos phi cos theta). DomainError at gimbal lock.
double thrust_from_virtual(const UavParams& params, double U, double phi,
                           double theta);

// zdot_d = -v_td - (v_max - v_td) (1 - exp(-max(e_p, 0) / h_c)).
double reference_descent_velocity(double e_p, const RewardParams& rp);

// -k1 |e_z| - k2 |zdot - zdot_d|.
double reward(const EnvState& state, double zdot_d, const RewardParams& rp);

// Time derivative of (z, zdot) under constant virtual control U.
VerticalState vertical_dynamics(const UavParams& params, VerticalState x,
                                double U);

// One classical RK4 step of length dt with U held constant.
VerticalState rk4_step(const UavParams& params, VerticalState x, double U,
                       double dt);

struct TraceRow {
  double t, z, z_w, zdot, control, reward;
};

class LandingEnv {
 public:
  explicit LandingEnv(EnvConfig config);

  // Draws a fresh platform realization from `seed` and places the UAV at
  // H0 above the platform with zero vertical speed.
  EnvState reset(std::uint64_t seed);
  // Same with a caller-supplied realization (needs wave_samples() samples).
  EnvState reset(wave::WaveRealization wave);

  // Holds U, clamped to [u_min, u_max], for `substeps` RK4 steps. Contact
  // and the state clamps are checked after every integration step.
  StepResult step(double control);
  // Discrete action: 0 -> U0 + dU, 1 -> U0, 2 -> U0 - dU.
  StepResult step_discrete(int action);
  double discrete_control(int action) const;

  const EnvConfig& config() const { return config_; }
  const wave::WaveRealization& wave() const { return wave_; }
  EnvState state() const;
  VerticalState vertical() const { return x_; }
  int step_index() const { return k_; }                  // decisions taken
  int integration_index() const { return n_; }           // RK4 steps taken
  double time() const { return n_ * config_.dt; }
  bool done() const { return done_; }

  void set_trace_enabled(bool enabled) { trace_enabled_ = enabled; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  EnvConfig config_;
  wave::WaveRealization wave_;
  VerticalState x_;
  int k_ = 0;
  int n_ = 0;
  bool done_ = true;
  bool trace_enabled_ = false;
  std::vector<TraceRow> trace_;
};

}  // namespace vtoldock::env
