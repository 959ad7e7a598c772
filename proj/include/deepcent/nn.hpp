#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepcent/rng.hpp"

namespace deepcent::nn {

enum class Activation { relu, identity };

struct Layer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::relu;
  double dropout_rate = 0.0;  // applied after the activation, inverted scaling
};

// Dense feed-forward network. Layer dimensions chain; dropout is attached to
// every ReLU layer and never to an identity output layer.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers);

  int input_width() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols()); }
  int output_width() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows()); }
  bool has_dropout() const;

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

// Hidden ReLU layers with dropout, identity output layer without dropout.
// He-scaled normal weights, zero biases.
Mlp make_regression_net(const std::vector<int>& widths, double dropout_rate, Rng& rng);

// Every layer ReLU with dropout; used as the shared trunk of the
// competing-risks network.
Mlp make_feature_net(const std::vector<int>& widths, double dropout_rate, Rng& rng);

// Convenience wrapper seeding its own generator.
Mlp init_mlp(const std::vector<int>& widths, double dropout_rate, std::uint64_t seed);

struct ForwardCache {
  Eigen::MatrixXd input;                       // n x in
  std::vector<Eigen::MatrixXd> pre_activation; // per layer, n x out
  std::vector<Eigen::MatrixXd> activation;     // post-activation, post-mask
  std::vector<Eigen::MatrixXd> mask;           // scaled masks; all-ones when dropout off
};

// Row-per-sample forward pass. When dropout is enabled, masks are drawn from
// `rng` row-major per layer (layers with rate 0 consume no draws); otherwise
// `rng` may be null. Fills `cache` when provided.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        bool dropout_enabled, Rng* rng,
                        ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_bias;
  Eigen::MatrixXd d_input;
};

// Exact reverse-mode chain rule through masks and ReLU (subgradient 0 at 0)
// for the scalar loss whose output gradient is supplied.
Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_gradient);

struct AdamState {
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
  long step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_net(const Mlp& net, double learning_rate);
};

// Bias-corrected adaptive-moment update in place.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Flat text serialization: widths, dropout rate, activations, then row-major
// weight and bias values with 17 significant digits. Round-trips bit-faithfully
// at double precision.
void write_text(std::ostream& out, const Mlp& net);
Mlp read_text(std::istream& in);
std::string to_text(const Mlp& net);
Mlp from_text(const std::string& text);

}  // namespace deepcent::nn
