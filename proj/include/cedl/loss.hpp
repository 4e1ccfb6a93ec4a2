#pragma once

#include <span>
#include <vector>

#include "cedl/dirichlet.hpp"

namespace cedl {

// Which concentration the KL regulariser sees. MisleadingEvidence removes the
// target-class evidence first (alpha_hat = y + (1 - y) * alpha); Raw uses
// alpha unchanged.
enum class KlArgument { MisleadingEvidence, Raw };

// KL(Dir(alpha) || Dir(1)). Zero iff alpha is the all-ones vector.
double kl_to_uniform(const DirichletParams& p);
double kl_to_uniform(std::span<const double> alpha);

// Expected squared error plus variance penalty plus kl_weight * KL.
// `target` must be one-hot over K; kl_weight in [0, 1].
double edl_loss(const DirichletParams& p, std::span<const double> target, double kl_weight,
                KlArgument kl_arg = KlArgument::MisleadingEvidence);

// d edl_loss / d alpha_k.
std::vector<double> edl_loss_grad(const DirichletParams& p, std::span<const double> target, double kl_weight,
                                  KlArgument kl_arg = KlArgument::MisleadingEvidence);

}  // namespace cedl
