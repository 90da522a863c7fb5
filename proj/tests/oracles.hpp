#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the implementation paths it is compared against.

#include <cmath>
#include <functional>
#include <vector>

#include "vtoldock/mlp.hpp"

namespace vtoldock::oracle {

// Central finite-difference gradient of f with respect to the flattened
// network parameters.
inline std::vector<double> numeric_gradient(const nn::Mlp& net,
                                            const std::function<double(const nn::Mlp&)>& f,
                                            double h = 1e-5) {
  nn::Mlp probe = net;
  std::vector<double> theta = net.parameters();
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    probe.set_parameters(theta);
    const double up = f(probe);
    theta[i] = keep - h;
    probe.set_parameters(theta);
    const double down = f(probe);
    theta[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Flattens gradients in the same order as Mlp::parameters().
inline std::vector<double> flatten(const nn::Gradients& g) {
  std::vector<double> out;
  for (const auto& l : g.layers) {
    for (int r = 0; r < l.weight.rows(); ++r)
      for (int c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (int r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  for (int i = 0; i < g.log_std.size(); ++i) out.push_back(g.log_std(i));
  return out;
}

// Element-wise relative error with an absolute floor for near-zero entries.
inline double max_relative_error(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

// GAE as the explicit double sum A_k = sum_{j>=k} (gamma lambda)^{j-k} delta_j,
// truncated at the first terminal at or after k.
inline std::vector<double> gae_double_sum(const std::vector<double>& rewards,
                                          const std::vector<double>& values,
                                          const std::vector<bool>& dones,
                                          double bootstrap, double gamma,
                                          double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double v_next = dones[j] ? 0.0 : (j + 1 < n ? values[j + 1] : bootstrap);
    delta[j] = rewards[j] + gamma * v_next - values[j];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t j = k; j < n; ++j) {
      sum += std::pow(gamma * lambda, static_cast<double>(j - k)) * delta[j];
      if (dones[j]) break;
    }
    adv[k] = sum;
  }
  return adv;
}

// Closed form of z'' = -c z - g + U with z(0) = z0, z'(0) = v0 (c > 0).
struct LinearOdeSolution {
  double z;
  double zdot;
};

inline LinearOdeSolution vertical_closed_form(double c, double g, double U,
                                              double z0, double v0, double t) {
  const double w = std::sqrt(c);
  const double z_eq = (U - g) / c;
  const double A = z0 - z_eq;
  const double B = v0 / w;
  return {z_eq + A * std::cos(w * t) + B * std::sin(w * t),
          -A * w * std::sin(w * t) + B * w * std::cos(w * t)};
}

}  // namespace vtoldock::oracle
