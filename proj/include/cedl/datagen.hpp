#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "cedl/dataset.hpp"
#include "cedl/rng.hpp"

namespace cedl {

enum class FamilyKind {
  Bars,        // ID: K thick bars at orientations k * 180 / K
  Blobs,       // ID: K Gaussian blobs at fixed centres on a circle
  CrossesOOD,  // diagonal crosses
  RingsOOD,    // annuli
  NearOOD,     // bars halfway between the ID bar orientations
};

std::string_view to_string(FamilyKind kind);
FamilyKind parse_family(std::string_view name);
bool is_ood(FamilyKind kind);

struct SyntheticFamily {
  FamilyKind kind = FamilyKind::Bars;
  std::size_t classes = 4;
  std::size_t size = 16;
  // Per-sample jitter.
  double angle_jitter_deg = 3.0;
  double offset_jitter_px = 0.5;
  double length_jitter_px = 1.0;
  double intensity_min = 0.8;
  double noise_sigma = 0.03;
  double bar_half_width = 2.0;
};

// n_per_class samples of each of `classes` labels. OOD families label every
// sample 0 but keep num_classes = classes so they line up with the ID set.
LabeledDataset generate(const SyntheticFamily& family, std::size_t n_per_class, Rng& rng);

// Noise-free, jitter-free rendering of class `label` (used as a prototype).
GridInput prototype(const SyntheticFamily& family, std::size_t label);

// Stratified split into train / val / test. Totals are round(f * N) for the
// first two parts; each class keeps its proportion to within one sample.
std::tuple<LabeledDataset, LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                                 std::array<double, 3> fractions, Rng& rng);

// IDX (MNIST) images + labels. Pixels are divided by 255.
LabeledDataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);
LabeledDataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

// Native container: "CEDLDSET" magic, u32 version, u32 split tag, then
// u32 N, H, W, K, N*H*W float64 pixels and N u16 labels, all little-endian.
std::vector<std::uint8_t> encode_dataset(const LabeledDataset& ds);
LabeledDataset decode_dataset(std::span<const std::uint8_t> bytes);
void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
LabeledDataset read_dataset(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace cedl
