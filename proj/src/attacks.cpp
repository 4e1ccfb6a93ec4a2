#include "cedl/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cedl/error.hpp"

namespace cedl {

double AttackSpec::effective_step_size() const { return step_size > 0.0 ? step_size : 2.5 * epsilon / steps; }

void AttackSpec::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("AttackSpec: epsilon must be >= 0");
  if (kind == AttackKind::SaltPepper && epsilon > 1.0) {
    throw InvalidInput("AttackSpec: salt-and-pepper fraction must lie in [0, 1]");
  }
  if (kind == AttackKind::L2PGD && steps < 1) throw InvalidInput("AttackSpec: L2PGD needs steps >= 1");
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::FGSM:
      return "fgsm";
    case AttackKind::L2PGD:
      return "l2pgd";
    case AttackKind::SaltPepper:
      return "saltpepper";
  }
  return "unknown";
}

AttackKind parse_attack(std::string_view name) {
  if (name == "fgsm") return AttackKind::FGSM;
  if (name == "l2pgd") return AttackKind::L2PGD;
  if (name == "saltpepper") return AttackKind::SaltPepper;
  throw ConfigError("unknown attack '" + std::string(name) + "'");
}

std::vector<double> input_gradient(const EvidentialNet& net, std::span<const double> x, std::size_t y_ref) {
  const auto y = one_hot(y_ref, net.num_classes());
  return backward(net, x, y, 0.0).input;
}

namespace {

double direction(AttackObjective objective) { return objective == AttackObjective::MaximizeLoss ? 1.0 : -1.0; }

void check_dims(const EvidentialNet& net, const GridInput& x) {
  if (x.size() != net.input_dim()) {
    throw InvalidInput("attack: input has " + std::to_string(x.size()) + " pixels, network expects " +
                       std::to_string(net.input_dim()));
  }
}

}  // namespace

GridInput fgsm(const EvidentialNet& net, const GridInput& x, std::size_t y_ref, const AttackSpec& spec) {
  spec.validate();
  check_dims(net, x);
  GridInput out = x;
  if (spec.epsilon == 0.0) return out;
  const auto g = input_gradient(net, x.pixels, y_ref);
  const double step = direction(spec.objective) * spec.epsilon;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
    double v = std::clamp(x.pixels[i] + step * s, 0.0, 1.0);
    // x + eps can round an ulp past the budget; pull it back.
    while (std::abs(v - x.pixels[i]) > spec.epsilon) v = std::nextafter(v, x.pixels[i]);
    out.pixels[i] = v;
  }
  return out;
}

GridInput l2pgd(const EvidentialNet& net, const GridInput& x, std::size_t y_ref, const AttackSpec& spec) {
  spec.validate();
  check_dims(net, x);
  GridInput cur = x;
  if (spec.epsilon == 0.0) return cur;
  const double step = direction(spec.objective) * spec.effective_step_size();
  std::vector<double> delta(x.size());
  for (int it = 0; it < spec.steps; ++it) {
    const auto g = input_gradient(net, cur.pixels, y_ref);
    const double gnorm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    if (!(gnorm > 0.0)) break;
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = cur.pixels[i] + step * g[i] / gnorm - x.pixels[i];
    const double dnorm = std::sqrt(std::inner_product(delta.begin(), delta.end(), delta.begin(), 0.0));
    const double shrink = dnorm > spec.epsilon ? spec.epsilon / dnorm : 1.0;
    // Clamping moves each coordinate towards x, so the ball constraint survives it.
    for (std::size_t i = 0; i < delta.size(); ++i) {
      cur.pixels[i] = std::clamp(x.pixels[i] + delta[i] * shrink, 0.0, 1.0);
    }
  }
  return cur;
}

GridInput salt_pepper(const GridInput& x, const AttackSpec& spec, Rng& rng) {
  spec.validate();
  GridInput out = x;
  const auto count = static_cast<std::size_t>(std::llround(spec.epsilon * static_cast<double>(x.size())));
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first `count` entries are a uniform sample
  // without replacement.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < count; ++i) out.pixels[idx[i]] = coin(rng) ? 1.0 : 0.0;
  return out;
}

GridInput attack(const EvidentialNet& net, const GridInput& x, std::size_t y_ref, const AttackSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case AttackKind::FGSM:
      return fgsm(net, x, y_ref, spec);
    case AttackKind::L2PGD:
      return l2pgd(net, x, y_ref, spec);
    case AttackKind::SaltPepper:
      return salt_pepper(x, spec, rng);
  }
  throw ConfigError("unknown attack kind");
}

}  // namespace cedl
