#include "cedl/views.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cedl/error.hpp"

namespace cedl {

void TransformSpec::validate() const {
  if (!(rotate_max_deg >= 0.0 && rotate_max_deg <= 180.0)) {
    throw InvalidInput("TransformSpec: rotate_max_deg must lie in [0, 180]");
  }
  if (shift_max_px < 0) throw InvalidInput("TransformSpec: shift_max_px must be >= 0");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("TransformSpec: noise_sigma must be >= 0");
  if (views < 2) throw InvalidInput("TransformSpec: need at least 2 views");
}

namespace {

double sample_zero_padded(const GridInput& img, double y, double x) {
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const double wy = y - fy;
  const double wx = x - fx;
  const auto r0 = static_cast<long>(fy);
  const auto c0 = static_cast<long>(fx);
  auto px = [&img](long r, long c) {
    if (r < 0 || c < 0 || r >= static_cast<long>(img.height) || c >= static_cast<long>(img.width)) return 0.0;
    return img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  return (1.0 - wy) * ((1.0 - wx) * px(r0, c0) + wx * px(r0, c0 + 1)) +
         wy * ((1.0 - wx) * px(r0 + 1, c0) + wx * px(r0 + 1, c0 + 1));
}

}  // namespace

GridInput rotate(const GridInput& img, double angle_deg) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  GridInput out(img.height, img.width);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      // Inverse map: rotate the output offset by -theta (y axis points down).
      const double dy = static_cast<double>(r) - cy;
      const double dx = static_cast<double>(c) - cx;
      const double sx = cx + cs * dx - sn * dy;
      const double sy = cy + sn * dx + cs * dy;
      out.at(r, c) = std::clamp(sample_zero_padded(img, sy, sx), 0.0, 1.0);
    }
  }
  return out;
}

GridInput shift(const GridInput& img, int dy, int dx) {
  GridInput out(img.height, img.width);
  const auto h = static_cast<long>(img.height);
  const auto w = static_cast<long>(img.width);
  for (long r = 0; r < h; ++r) {
    const long tr = r + dy;
    if (tr < 0 || tr >= h) continue;
    for (long c = 0; c < w; ++c) {
      const long tc = c + dx;
      if (tc < 0 || tc >= w) continue;
      out.at(static_cast<std::size_t>(tr), static_cast<std::size_t>(tc)) =
          img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
  return out;
}

GridInput gaussian_noise(const GridInput& img, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidInput("gaussian_noise: sigma must be >= 0");
  GridInput out = img;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.pixels) v = std::clamp(v + normal(rng), 0.0, 1.0);
  return out;
}

GridInput metamorphic_view(const GridInput& x, const TransformSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> angle(-spec.rotate_max_deg, spec.rotate_max_deg);
  std::uniform_int_distribution<int> offset(-spec.shift_max_px, spec.shift_max_px);
  const double a = angle(rng);
  const int dy = offset(rng);
  const int dx = offset(rng);
  GridInput v = a == 0.0 ? x : rotate(x, a);
  if (dy != 0 || dx != 0) v = shift(v, dy, dx);
  return gaussian_noise(v, spec.noise_sigma, rng);
}

std::vector<GridInput> metamorphic_views(const GridInput& x, const TransformSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<GridInput> views;
  views.reserve(spec.views);
  for (std::size_t t = 0; t < spec.views; ++t) views.push_back(metamorphic_view(x, spec, rng));
  return views;
}

EvidenceSet make_views(const GridInput& x, const TransformSpec& spec, const EvidentialNet& net, Rng& rng) {
  spec.validate();
  if (x.size() != net.input_dim()) {
    throw InvalidInput("make_views: input has " + std::to_string(x.size()) + " pixels, network expects " +
                       std::to_string(net.input_dim()));
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(spec.views);
  if (spec.mode == ViewMode::Metamorphic) {
    for (const auto& v : metamorphic_views(x, spec, rng)) rows.push_back(forward_trace(net, v.pixels).alpha);
  } else {
    const bool stochastic = net.config().dropout_rate > 0.0;
    for (std::size_t t = 0; t < spec.views; ++t) {
      if (stochastic) {
        const DropoutMask mask = sample_dropout_mask(net, rng);
        rows.push_back(forward_trace(net, x.pixels, &mask).alpha);
      } else {
        rows.push_back(forward_trace(net, x.pixels).alpha);
      }
    }
  }
  return EvidenceSet(std::move(rows));
}

}  // namespace cedl
