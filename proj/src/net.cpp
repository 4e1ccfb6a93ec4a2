#include "cedl/net.hpp"

#include <cmath>
#include <string>

#include "cedl/error.hpp"

namespace cedl {

void NetConfig::validate() const {
  if (layer_sizes.size() < 3) throw InvalidInput("NetConfig: need input, at least one hidden layer, and output");
  for (const auto n : layer_sizes) {
    if (n == 0) throw InvalidInput("NetConfig: layer sizes must be positive");
  }
  if (layer_sizes.back() < 2) throw InvalidInput("NetConfig: need at least 2 output classes");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidInput("NetConfig: dropout_rate must lie in [0, 1)");
}

EvidentialNet::EvidentialNet(NetConfig config, Uninitialized) : config_(std::move(config)) {
  config_.validate();
  for (std::size_t l = 0; l + 1 < config_.layer_sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = config_.layer_sizes[l];
    layer.out = config_.layer_sizes[l + 1];
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

EvidentialNet::EvidentialNet(NetConfig config) : EvidentialNet(std::move(config), Uninitialized{}) {
  Rng rng(config_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& layer = layers_[l];
    const bool output = l + 1 == layers_.size();
    const double stddev = output ? std::sqrt(2.0 / static_cast<double>(layer.in + layer.out))
                                 : std::sqrt(2.0 / static_cast<double>(layer.in));
    for (double& w : layer.weights) w = stddev * normal(rng);
  }
}

EvidentialNet EvidentialNet::zeros(NetConfig config) { return EvidentialNet(std::move(config), Uninitialized{}); }

std::size_t EvidentialNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

void EvidentialNet::set_dropout_rate(double rate) {
  NetConfig copy = config_;
  copy.dropout_rate = rate;
  copy.validate();
  config_ = std::move(copy);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.resize(layer.out);
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* row = layer.weights.data() + o * layer.in;
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
}

}  // namespace

DropoutMask sample_dropout_mask(const EvidentialNet& net, Rng& rng) {
  const double p = net.config().dropout_rate;
  std::bernoulli_distribution drop(p);
  DropoutMask mask;
  mask.scale.resize(net.num_hidden());
  for (std::size_t l = 0; l < net.num_hidden(); ++l) {
    mask.scale[l].resize(net.layers()[l].out);
    for (double& s : mask.scale[l]) s = (p > 0.0 && drop(rng)) ? 0.0 : 1.0 / (1.0 - p);
  }
  return mask;
}

ForwardTrace forward_trace(const EvidentialNet& net, std::span<const double> x, const DropoutMask* mask) {
  if (x.size() != net.input_dim()) {
    throw InvalidInput("forward: input has " + std::to_string(x.size()) + " values, network expects " +
                       std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  ForwardTrace trace;
  trace.activations.reserve(layers.size());
  trace.pre.resize(layers.size());
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    affine(layers[l], trace.activations.back(), trace.pre[l]);
    if (l + 1 == layers.size()) break;
    std::vector<double> act(trace.pre[l].size());
    for (std::size_t u = 0; u < act.size(); ++u) {
      const double relu = trace.pre[l][u] > 0.0 ? trace.pre[l][u] : 0.0;
      act[u] = mask != nullptr ? relu * mask->scale[l][u] : relu;
    }
    trace.activations.push_back(std::move(act));
  }
  const auto& logits = trace.pre.back();
  trace.alpha.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) trace.alpha[k] = softplus(logits[k]) + 1.0;
  return trace;
}

DirichletParams forward(const EvidentialNet& net, std::span<const double> x) {
  return DirichletParams(forward_trace(net, x).alpha);
}

DirichletParams forward(const EvidentialNet& net, std::span<const double> x, bool dropout_active, Rng& rng) {
  if (!dropout_active) return forward(net, x);
  const DropoutMask mask = sample_dropout_mask(net, rng);
  return DirichletParams(forward_trace(net, x, &mask).alpha);
}

Gradients make_zero_gradients(const EvidentialNet& net) {
  Gradients g;
  for (const auto& layer : net.layers()) {
    g.weights.emplace_back(layer.weights.size(), 0.0);
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  g.input.assign(net.input_dim(), 0.0);
  return g;
}

Gradients backward(const EvidentialNet& net, std::span<const double> x, std::span<const double> target,
                   double kl_weight, const DropoutMask* mask, KlArgument kl_arg) {
  const ForwardTrace trace = forward_trace(net, x, mask);
  const DirichletParams alpha(trace.alpha);
  const auto& layers = net.layers();

  Gradients g = make_zero_gradients(net);
  g.loss = edl_loss(alpha, target, kl_weight, kl_arg);
  const auto d_alpha = edl_loss_grad(alpha, target, kl_weight, kl_arg);

  // delta = dL/d(pre-activation) of the current layer.
  std::vector<double> delta(d_alpha.size());
  for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = d_alpha[k] * sigmoid(trace.pre.back()[k]);

  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& in = trace.activations[l];
    std::vector<double> d_in(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      g.bias[l][o] = d;
      double* gw = g.weights[l].data() + o * layer.in;
      const double* w = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) {
        gw[i] = d * in[i];
        d_in[i] += d * w[i];
      }
    }
    if (l == 0) {
      g.input = std::move(d_in);
      break;
    }
    // Back through dropout and ReLU of hidden layer l-1.
    const auto& pre = trace.pre[l - 1];
    delta.assign(pre.size(), 0.0);
    for (std::size_t u = 0; u < pre.size(); ++u) {
      if (pre[u] <= 0.0) continue;
      delta[u] = mask != nullptr ? d_in[u] * mask->scale[l - 1][u] : d_in[u];
    }
  }
  return g;
}

}  // namespace cedl
