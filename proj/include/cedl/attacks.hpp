#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cedl/dataset.hpp"
#include "cedl/net.hpp"
#include "cedl/rng.hpp"

namespace cedl {

enum class AttackKind { FGSM, L2PGD, SaltPepper };

// MaximizeLoss ascends the evidential loss of y_ref (ID disruption);
// MaximizeConfidence descends it (pushes an input towards confident y_ref).
enum class AttackObjective { MaximizeLoss, MaximizeConfidence };

struct AttackSpec {
  AttackKind kind = AttackKind::L2PGD;
  // L-inf scale (FGSM), L2 radius (L2PGD) or flipped-pixel fraction (SaltPepper).
  double epsilon = 1.0;
  int steps = 10;
  // <= 0 selects the default 2.5 * epsilon / steps.
  double step_size = 0.0;
  AttackObjective objective = AttackObjective::MaximizeConfidence;

  double effective_step_size() const;
  void validate() const;
};

std::string_view to_string(AttackKind kind);
AttackKind parse_attack(std::string_view name);

// Gradient of edl_loss (kl_weight 0) w.r.t. the input pixels.
std::vector<double> input_gradient(const EvidentialNet& net, std::span<const double> x, std::size_t y_ref);

GridInput fgsm(const EvidentialNet& net, const GridInput& x, std::size_t y_ref, const AttackSpec& spec);
GridInput l2pgd(const EvidentialNet& net, const GridInput& x, std::size_t y_ref, const AttackSpec& spec);
GridInput salt_pepper(const GridInput& x, const AttackSpec& spec, Rng& rng);

// Dispatches on spec.kind; rng is only consumed by SaltPepper.
GridInput attack(const EvidentialNet& net, const GridInput& x, std::size_t y_ref, const AttackSpec& spec, Rng& rng);

}  // namespace cedl
