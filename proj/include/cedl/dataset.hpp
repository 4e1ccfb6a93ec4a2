#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace cedl {

// H x W image with values in [0, 1], row-major.
struct GridInput {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  GridInput() = default;
  GridInput(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), pixels(h * w, fill) {}
  GridInput(std::size_t h, std::size_t w, std::vector<double> values);

  double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
  std::size_t size() const { return pixels.size(); }

  // True iff dims match the buffer and every value is in [0, 1].
  bool valid() const;

  friend bool operator==(const GridInput&, const GridInput&) = default;
};

enum class SplitTag { Train, Val, Test, Unsplit };

std::string_view to_string(SplitTag tag);

struct LabeledDataset {
  std::vector<GridInput> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  SplitTag split = SplitTag::Unsplit;

  std::size_t size() const { return inputs.size(); }
  // Throws InvalidInput on length mismatch, label out of range, or
  // inconsistent image dims.
  void validate() const;
  std::vector<std::size_t> class_counts() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// One-hot encoding of `label` over `num_classes`.
std::vector<double> one_hot(std::size_t label, std::size_t num_classes);

}  // namespace cedl
