#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vtoldock::nn {

enum class HeadType : std::uint32_t {
  linear = 0,
  softmax = 1,
  dueling = 2,   // Q = V + A - mean(A)
  gaussian = 3,  // (mean, log-std); mean squashed into [action_low, action_high]
};

enum class Activation : std::uint32_t { tanh = 1 };

const char* to_string(HeadType head);

struct HeadSpec {
  HeadType type = HeadType::linear;
  double action_low = -1.0;
  double action_high = 1.0;
  double init_log_std = 0.0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Shape-congruent with the parameters of the network that produced it.
struct Gradients {
  std::vector<DenseLayer> layers;
  Eigen::VectorXd log_std;

  double squared_norm() const;
  double norm() const;
  void scale(double factor);
  void add(const Gradients& other);
  bool all_finite() const;
};

// Dense feed-forward network: tanh hidden layers followed by one of the
// heads above. sizes = {input, hidden..., outputs}; for the gaussian head
// `outputs` is the action dimension and forward() returns 2 * outputs values.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, HeadSpec head, std::uint64_t seed);

  const std::vector<int>& sizes() const { return sizes_; }
  const HeadSpec& head() const { return head_; }
  int input_dim() const { return sizes_.front(); }
  int action_dim() const { return sizes_.back(); }
  int output_dim() const;

  // Inputs are multiplied element-wise by this fixed (non-trained) vector
  // before the first layer. Defaults to ones.
  const Eigen::VectorXd& input_scale() const { return input_scale_; }
  void set_input_scale(const Eigen::VectorXd& scale);

  Eigen::VectorXd forward(std::span<const double> x) const;
  // Column-per-sample batch evaluation.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  // Gradient of sum_b <upstream_b, forward(x_b)> with respect to the
  // parameters. Throws NumericalFault on a non-finite upstream.
  Gradients backward(const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& upstream) const;

  Gradients zero_gradients() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  Eigen::VectorXd& log_std() { return log_std_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  bool congruent(const Mlp& other) const;

 private:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // scaled input, then hidden outputs
    Eigen::MatrixXd head_pre;                   // linear/softmax/gaussian pre-activation
    Eigen::MatrixXd value;                      // dueling only
    Eigen::MatrixXd advantage;                  // dueling only
  };

  std::size_t hidden_count() const { return sizes_.size() - 2; }
  Eigen::MatrixXd run(const Eigen::MatrixXd& inputs, Cache* cache) const;

  std::vector<int> sizes_;
  HeadSpec head_;
  std::vector<DenseLayer> layers_;  // hidden layers, then head layer(s)
  Eigen::VectorXd log_std_;
  Eigen::VectorXd input_scale_;

  friend std::string serialize(const Mlp& net);
  friend Mlp deserialize(std::string_view bytes);
};

// theta <- theta - lr * g, after rescaling g to norm `clip` when its global
// L2 norm exceeds it. Returns the factor applied to g (1 when not clipped).
double sgd_step(Mlp& net, Gradients grads, double lr,
                std::optional<double> clip = std::nullopt);

// target <- tau * source + (1 - tau) * target.
void soft_update(Mlp& target, const Mlp& source, double tau);

// Binary parameter file, see docs/weights_format.md.
std::string serialize(const Mlp& net);
Mlp deserialize(std::string_view bytes);  // throws ParseError
void save(const Mlp& net, const std::filesystem::path& path);
Mlp load(const std::filesystem::path& path);

}  // namespace vtoldock::nn
