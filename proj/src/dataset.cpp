#include "cedl/dataset.hpp"

#include <string>

#include "cedl/error.hpp"

namespace cedl {

GridInput::GridInput(std::size_t h, std::size_t w, std::vector<double> values)
    : height(h), width(w), pixels(std::move(values)) {
  if (pixels.size() != h * w) {
    throw ShapeError("GridInput: " + std::to_string(pixels.size()) + " values for a " + std::to_string(h) + "x" +
                     std::to_string(w) + " grid");
  }
}

bool GridInput::valid() const {
  if (height == 0 || width == 0 || pixels.size() != height * width) return false;
  for (const double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train:
      return "train";
    case SplitTag::Val:
      return "val";
    case SplitTag::Test:
      return "test";
    case SplitTag::Unsplit:
      return "unsplit";
  }
  return "unsplit";
}

void LabeledDataset::validate() const {
  if (inputs.size() != labels.size()) {
    throw InvalidInput("dataset: " + std::to_string(inputs.size()) + " inputs but " + std::to_string(labels.size()) +
                       " labels");
  }
  if (num_classes < 2) throw InvalidInput("dataset: need at least 2 classes");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (labels[i] >= num_classes) throw InvalidInput("dataset: label out of range at index " + std::to_string(i));
    if (inputs[i].height != inputs.front().height || inputs[i].width != inputs.front().width) {
      throw InvalidInput("dataset: inconsistent image dimensions at index " + std::to_string(i));
    }
  }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto y : labels) {
    if (y < num_classes) ++counts[y];
  }
  return counts;
}

std::vector<double> one_hot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes) throw InvalidInput("one_hot: label " + std::to_string(label) + " out of range");
  std::vector<double> y(num_classes, 0.0);
  y[label] = 1.0;
  return y;
}

}  // namespace cedl
