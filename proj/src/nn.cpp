#include "deepcent/nn.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "deepcent/errors.hpp"

namespace deepcent::nn {

namespace {

void format_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 2) {
    throw ConfigError("network needs at least an input and an output width");
  }
  for (int w : widths) {
    if (w <= 0) throw ConfigError("layer widths must be positive");
  }
}

void check_dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
}

Layer he_layer(int in, int out, Activation act, double dropout, Rng& rng) {
  Layer layer;
  layer.weights.resize(out, in);
  const double stddev = std::sqrt(2.0 / static_cast<double>(in));
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) {
      layer.weights(r, c) = stddev * rng.normal();
    }
  }
  layer.bias = Eigen::VectorXd::Zero(out);
  layer.activation = act;
  layer.dropout_rate = act == Activation::relu ? dropout : 0.0;
  return layer;
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    if (layers_[l].weights.rows() != layers_[l + 1].weights.cols()) {
      throw ConfigError("layer dimensions do not chain");
    }
  }
  for (const Layer& layer : layers_) {
    if (layer.bias.size() != layer.weights.rows()) {
      throw ConfigError("bias length does not match layer output width");
    }
    check_dropout(layer.dropout_rate);
  }
}

bool Mlp::has_dropout() const {
  for (const Layer& layer : layers_) {
    if (layer.dropout_rate > 0.0) return true;
  }
  return false;
}

Mlp make_regression_net(const std::vector<int>& widths, double dropout_rate, Rng& rng) {
  check_widths(widths);
  check_dropout(dropout_rate);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    layers.push_back(he_layer(widths[l], widths[l + 1],
                              last ? Activation::identity : Activation::relu,
                              dropout_rate, rng));
  }
  return Mlp(std::move(layers));
}

Mlp make_feature_net(const std::vector<int>& widths, double dropout_rate, Rng& rng) {
  check_widths(widths);
  check_dropout(dropout_rate);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    layers.push_back(he_layer(widths[l], widths[l + 1], Activation::relu,
                              dropout_rate, rng));
  }
  return Mlp(std::move(layers));
}

Mlp init_mlp(const std::vector<int>& widths, double dropout_rate, std::uint64_t seed) {
  Rng rng(seed);
  return make_regression_net(widths, dropout_rate, rng);
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        bool dropout_enabled, Rng* rng, ForwardCache* cache) {
  if (net.layers().empty()) throw ConfigError("forward on an empty network");
  if (input.cols() != net.input_width()) {
    throw DataError("forward: input has " + std::to_string(input.cols()) +
                    " columns, network expects " + std::to_string(net.input_width()));
  }
  if (!input.allFinite()) throw DataError("forward: non-finite input");
  if (dropout_enabled && net.has_dropout() && rng == nullptr) {
    throw ConfigError("forward: dropout enabled but no generator supplied");
  }

  if (cache) {
    cache->input = input;
    cache->pre_activation.clear();
    cache->activation.clear();
    cache->mask.clear();
  }

  Eigen::MatrixXd a = input;
  for (const Layer& layer : net.layers()) {
    Eigen::MatrixXd z = (a * layer.weights.transpose()).rowwise() + layer.bias.transpose();
    Eigen::MatrixXd s = layer.activation == Activation::relu ? z.cwiseMax(0.0).eval() : z;
    Eigen::MatrixXd mask;
    if (dropout_enabled && layer.dropout_rate > 0.0) {
      const double keep = 1.0 - layer.dropout_rate;
      mask.resize(s.rows(), s.cols());
      for (Eigen::Index r = 0; r < s.rows(); ++r) {
        for (Eigen::Index c = 0; c < s.cols(); ++c) {
          mask(r, c) = rng->uniform() < keep ? 1.0 / keep : 0.0;
        }
      }
      s = s.cwiseProduct(mask);
    } else if (cache) {
      mask = Eigen::MatrixXd::Ones(s.rows(), s.cols());
    }
    if (cache) {
      cache->pre_activation.push_back(std::move(z));
      cache->mask.push_back(std::move(mask));
      cache->activation.push_back(s);
    }
    a = std::move(s);
  }
  return a;
}

Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_gradient) {
  const std::size_t depth = net.layers().size();
  if (cache.pre_activation.size() != depth || cache.mask.size() != depth ||
      cache.activation.size() != depth) {
    throw DataError("backward: cache does not match network depth");
  }
  if (output_gradient.rows() != cache.input.rows() ||
      output_gradient.cols() != net.output_width()) {
    throw DataError("backward: output gradient shape mismatch");
  }

  Gradients grads;
  grads.d_weights.resize(depth);
  grads.d_bias.resize(depth);

  Eigen::MatrixXd da = output_gradient;
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = net.layers()[l];
    if (cache.pre_activation[l].rows() != da.rows() ||
        cache.pre_activation[l].cols() != da.cols()) {
      throw DataError("backward: cache shape mismatch at layer " + std::to_string(l));
    }
    Eigen::MatrixXd dz = da.cwiseProduct(cache.mask[l]);
    if (layer.activation == Activation::relu) {
      dz = dz.cwiseProduct(
          (cache.pre_activation[l].array() > 0.0).cast<double>().matrix());
    }
    const Eigen::MatrixXd& prev = l == 0 ? cache.input : cache.activation[l - 1];
    grads.d_weights[l] = dz.transpose() * prev;
    grads.d_bias[l] = dz.colwise().sum().transpose();
    da = dz * layer.weights;
  }
  grads.d_input = std::move(da);
  return grads;
}

AdamState AdamState::for_net(const Mlp& net, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  AdamState state;
  state.learning_rate = learning_rate;
  for (const Layer& layer : net.layers()) {
    state.m_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.v_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.m_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    state.v_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return state;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  const std::size_t depth = net.layers().size();
  if (grads.d_weights.size() != depth || grads.d_bias.size() != depth ||
      state.m_weights.size() != depth) {
    throw DataError("adam_step: gradient/state depth mismatch");
  }
  for (std::size_t l = 0; l < depth; ++l) {
    if (!grads.d_weights[l].allFinite() || !grads.d_bias[l].allFinite()) {
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(l));
    }
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < depth; ++l) {
    Layer& layer = net.layers()[l];
    auto update = [&](auto& m, auto& v, const auto& g, auto& param) {
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
      param.array() -=
          state.learning_rate * (m.array() / bc1) /
          ((v.array() / bc2).sqrt() + state.epsilon);
    };
    update(state.m_weights[l], state.v_weights[l], grads.d_weights[l], layer.weights);
    update(state.m_bias[l], state.v_bias[l], grads.d_bias[l], layer.bias);
  }
}

void write_text(std::ostream& out, const Mlp& net) {
  const auto& layers = net.layers();
  if (layers.empty()) throw ConfigError("cannot serialize an empty network");
  out << "deepcent-mlp 1\n";
  out << "widths " << layers.front().weights.cols();
  for (const Layer& layer : layers) out << ' ' << layer.weights.rows();
  out << '\n';
  double dropout = 0.0;
  for (const Layer& layer : layers) {
    if (layer.dropout_rate > 0.0) dropout = layer.dropout_rate;
  }
  out << "dropout ";
  format_double(out, dropout);
  out << '\n';
  out << "activations";
  for (const Layer& layer : layers) {
    out << ' ' << (layer.activation == Activation::relu ? "relu" : "identity");
  }
  out << '\n';
  for (const Layer& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        if (c > 0) out << ' ';
        format_double(out, layer.weights(r, c));
      }
      out << '\n';
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      if (r > 0) out << ' ';
      format_double(out, layer.bias(r));
    }
    out << '\n';
  }
}

Mlp read_text(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != "deepcent-mlp" || version != 1) {
    throw DataError("network file: unrecognized header");
  }
  std::string tag;
  in >> tag;
  if (tag != "widths") throw DataError("network file: expected widths");
  std::vector<int> widths;
  {
    std::string line;
    std::getline(in, line);
    std::istringstream ls(line);
    int w;
    while (ls >> w) widths.push_back(w);
  }
  if (widths.size() < 2) throw DataError("network file: too few widths");
  double dropout = 0.0;
  in >> tag >> dropout;
  if (!in || tag != "dropout") throw DataError("network file: expected dropout");
  in >> tag;
  if (tag != "activations") throw DataError("network file: expected activations");
  std::vector<Activation> acts;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    std::string a;
    in >> a;
    if (a == "relu") {
      acts.push_back(Activation::relu);
    } else if (a == "identity") {
      acts.push_back(Activation::identity);
    } else {
      throw DataError("network file: unknown activation '" + a + "'");
    }
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    layer.activation = acts[l];
    layer.dropout_rate = acts[l] == Activation::relu ? dropout : 0.0;
    layer.weights.resize(widths[l + 1], widths[l]);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        if (!(in >> layer.weights(r, c))) {
          throw DataError("network file: truncated weight block");
        }
      }
    }
    layer.bias.resize(widths[l + 1]);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      if (!(in >> layer.bias(r))) {
        throw DataError("network file: truncated bias block");
      }
    }
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

std::string to_text(const Mlp& net) {
  std::ostringstream out;
  write_text(out, net);
  return out.str();
}

Mlp from_text(const std::string& text) {
  std::istringstream in(text);
  return read_text(in);
}

}  // namespace deepcent::nn
