#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cedl/dirichlet.hpp"
#include "cedl/loss.hpp"
#include "cedl/rng.hpp"

namespace cedl {

struct NetConfig {
  // input dim, hidden dims..., K
  std::vector<std::size_t> layer_sizes;
  double dropout_rate = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

// Fully connected layer, weights row-major (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

// ReLU hidden layers with inverted dropout, softplus evidence head,
// alpha = evidence + 1.
class EvidentialNet {
 public:
  // He-normal hidden weights, Glorot-normal output weights, zero biases,
  // drawn from config.seed.
  explicit EvidentialNet(NetConfig config);
  static EvidentialNet zeros(NetConfig config);

  const NetConfig& config() const { return config_; }
  std::size_t input_dim() const { return config_.layer_sizes.front(); }
  std::size_t num_classes() const { return config_.layer_sizes.back(); }
  std::size_t num_hidden() const { return layers_.size() - 1; }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void set_dropout_rate(double rate);

 private:
  struct Uninitialized {};
  EvidentialNet(NetConfig config, Uninitialized);

  NetConfig config_;
  std::vector<DenseLayer> layers_;
};

// Per-hidden-unit multiplier: 0 for dropped units, 1/(1-p) for survivors.
struct DropoutMask {
  std::vector<std::vector<double>> scale;
};

DropoutMask sample_dropout_mask(const EvidentialNet& net, Rng& rng);

struct ForwardTrace {
  // activations[0] is the input; activations[l] the (post-dropout) output of
  // hidden layer l.
  std::vector<std::vector<double>> activations;
  // Pre-activation of every layer, including the output logits.
  std::vector<std::vector<double>> pre;
  std::vector<double> alpha;
};

ForwardTrace forward_trace(const EvidentialNet& net, std::span<const double> x, const DropoutMask* mask = nullptr);

DirichletParams forward(const EvidentialNet& net, std::span<const double> x);
DirichletParams forward(const EvidentialNet& net, std::span<const double> x, bool dropout_active, Rng& rng);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
  std::vector<double> input;
  double loss = 0.0;
};

Gradients make_zero_gradients(const EvidentialNet& net);

// Exact gradients of edl_loss w.r.t. every parameter and the input.
Gradients backward(const EvidentialNet& net, std::span<const double> x, std::span<const double> target,
                   double kl_weight, const DropoutMask* mask = nullptr,
                   KlArgument kl_arg = KlArgument::MisleadingEvidence);

double softplus(double z);

}  // namespace cedl
