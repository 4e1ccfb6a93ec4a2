#pragma once

#include <cstdint>
#include <vector>

#include "cedl/conflict.hpp"
#include "cedl/dataset.hpp"
#include "cedl/net.hpp"
#include "cedl/rng.hpp"

namespace cedl {

enum class ViewMode { Metamorphic, MCDropout };

struct TransformSpec {
  double rotate_max_deg = 15.0;
  int shift_max_px = 2;
  double noise_sigma = 0.01;
  std::size_t views = 5;
  ViewMode mode = ViewMode::Metamorphic;

  void validate() const;
};

// Rotation about the grid center, bilinear sampling, zero outside the grid,
// result clamped to [0, 1]. Positive angles turn counter-clockwise on screen.
GridInput rotate(const GridInput& img, double angle_deg);

// out(r + dy, c + dx) = in(r, c); vacated cells are 0.
GridInput shift(const GridInput& img, int dy, int dx);

// Adds iid N(0, sigma^2) per pixel and clamps to [0, 1].
GridInput gaussian_noise(const GridInput& img, double sigma, Rng& rng);

// The T transformed inputs for Metamorphic mode: each view independently
// samples angle ~ U(-r, r), dy, dx ~ U{-s..s}, then applies
// rotate, shift, noise in that order to the raw input.
std::vector<GridInput> metamorphic_views(const GridInput& x, const TransformSpec& spec, Rng& rng);

// One such view; does not check spec.views.
GridInput metamorphic_view(const GridInput& x, const TransformSpec& spec, Rng& rng);

// One Dirichlet row per view. Metamorphic: deterministic forwards of the
// transformed inputs. MCDropout: stochastic forwards of the raw input.
EvidenceSet make_views(const GridInput& x, const TransformSpec& spec, const EvidentialNet& net, Rng& rng);

}  // namespace cedl
