#pragma once

// Central finite-difference checks of backward() and input_gradient().

#include <algorithm>
#include <cmath>
#include <vector>

#include "cedl/attacks.hpp"
#include "cedl/loss.hpp"
#include "cedl/net.hpp"

namespace gradcheck {

// |a - f| / max(|a|, |f|, floor). The floor keeps components that are
// zero up to round-off from dominating the check.
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double loss_at(const cedl::EvidentialNet& net, const std::vector<double>& x, const std::vector<double>& y,
                      double kl_weight) {
  return cedl::edl_loss(cedl::forward(net, x), y, kl_weight);
}

struct Result {
  double max_param_error = 0.0;
  double max_input_error = 0.0;
  double max_attack_grad_error = 0.0;
};

// Checks every weight, bias and input coordinate of `net` at (x, y).
inline Result check(const cedl::EvidentialNet& net, const std::vector<double>& x, std::size_t label,
                    double kl_weight, double h = 1e-5) {
  std::vector<double> y(net.num_classes(), 0.0);
  y[label] = 1.0;
  const cedl::Gradients g = cedl::backward(net, x, y, kl_weight);
  Result r;
  cedl::EvidentialNet probe = net;
  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    auto perturb = [&](double& slot, double analytic) {
      const double orig = slot;
      slot = orig + h;
      const double up = loss_at(probe, x, y, kl_weight);
      slot = orig - h;
      const double dn = loss_at(probe, x, y, kl_weight);
      slot = orig;
      r.max_param_error = std::max(r.max_param_error, rel_error(analytic, (up - dn) / (2.0 * h)));
    };
    auto& layer = probe.layers()[l];
    for (std::size_t j = 0; j < layer.weights.size(); ++j) perturb(layer.weights[j], g.weights[l][j]);
    for (std::size_t j = 0; j < layer.bias.size(); ++j) perturb(layer.bias[j], g.bias[l][j]);
  }
  const auto attack_grad = cedl::input_gradient(net, x, label);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto up = x, dn = x;
    up[i] += h;
    dn[i] -= h;
    const double fd = (loss_at(net, up, y, kl_weight) - loss_at(net, dn, y, kl_weight)) / (2.0 * h);
    r.max_input_error = std::max(r.max_input_error, rel_error(g.input[i], fd));
    // Attack gradients use the loss without the KL term.
    const double fd0 = (loss_at(net, up, y, 0.0) - loss_at(net, dn, y, 0.0)) / (2.0 * h);
    r.max_attack_grad_error = std::max(r.max_attack_grad_error, rel_error(attack_grad[i], fd0));
  }
  return r;
}

}  // namespace gradcheck
