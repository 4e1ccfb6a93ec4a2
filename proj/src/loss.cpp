#include "cedl/loss.hpp"

#include <cmath>
#include <numeric>

#include "cedl/error.hpp"
#include "cedl/special.hpp"

namespace cedl {
namespace {

void check_target(std::span<const double> target, std::size_t classes, double kl_weight) {
  if (target.size() != classes) throw InvalidInput("edl_loss: target length does not match class count");
  int ones = 0;
  for (const double v : target) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw InvalidInput("edl_loss: target must be one-hot");
    }
  }
  if (ones != 1) throw InvalidInput("edl_loss: target must be one-hot");
  if (!(kl_weight >= 0.0 && kl_weight <= 1.0)) throw InvalidInput("edl_loss: kl_weight must lie in [0, 1]");
}

std::vector<double> kl_argument(const DirichletParams& p, std::span<const double> target, KlArgument kl_arg) {
  std::vector<double> a(p.alpha().begin(), p.alpha().end());
  if (kl_arg == KlArgument::MisleadingEvidence) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = target[k] + (1.0 - target[k]) * a[k];
  }
  return a;
}

}  // namespace

double kl_to_uniform(std::span<const double> alpha) {
  const double s = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  const double psi_s = digamma(s);
  double kl = log_gamma(s) - log_gamma(static_cast<double>(alpha.size()));
  for (const double a : alpha) kl += -log_gamma(a) + (a - 1.0) * (digamma(a) - psi_s);
  return kl;
}

double kl_to_uniform(const DirichletParams& p) { return kl_to_uniform(p.alpha()); }

double edl_loss(const DirichletParams& p, std::span<const double> target, double kl_weight, KlArgument kl_arg) {
  check_target(target, p.num_classes(), kl_weight);
  const double s = p.strength();
  double loss = 0.0;
  for (std::size_t k = 0; k < p.num_classes(); ++k) {
    const double m = p[k] / s;
    const double err = target[k] - m;
    loss += err * err + m * (1.0 - m) / (s + 1.0);
  }
  if (kl_weight > 0.0) loss += kl_weight * kl_to_uniform(kl_argument(p, target, kl_arg));
  return loss;
}

std::vector<double> edl_loss_grad(const DirichletParams& p, std::span<const double> target, double kl_weight,
                                  KlArgument kl_arg) {
  check_target(target, p.num_classes(), kl_weight);
  const std::size_t classes = p.num_classes();
  const double s = p.strength();
  // Partial derivatives w.r.t. m_k, then through m_k = alpha_k / S.
  std::vector<double> g(classes);
  double g_dot_m = 0.0;
  double var_sum = 0.0;
  for (std::size_t k = 0; k < classes; ++k) {
    const double m = p[k] / s;
    g[k] = -2.0 * (target[k] - m) + (1.0 - 2.0 * m) / (s + 1.0);
    g_dot_m += g[k] * m;
    var_sum += m * (1.0 - m);
  }
  const double explicit_s = -var_sum / ((s + 1.0) * (s + 1.0));
  std::vector<double> grad(classes);
  for (std::size_t k = 0; k < classes; ++k) grad[k] = (g[k] - g_dot_m) / s + explicit_s;

  if (kl_weight > 0.0) {
    const auto a = kl_argument(p, target, kl_arg);
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double tri_s = trigamma(sa) * (sa - static_cast<double>(classes));
    for (std::size_t k = 0; k < classes; ++k) {
      const double d_kl = (a[k] - 1.0) * trigamma(a[k]) - tri_s;
      const double chain = kl_arg == KlArgument::MisleadingEvidence ? 1.0 - target[k] : 1.0;
      grad[k] += kl_weight * d_kl * chain;
    }
  }
  return grad;
}

}  // namespace cedl
