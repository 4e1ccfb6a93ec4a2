#include "cedl/datagen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "cedl/error.hpp"

namespace cedl {

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Bars:
      return "bars";
    case FamilyKind::Blobs:
      return "blobs";
    case FamilyKind::CrossesOOD:
      return "crosses";
    case FamilyKind::RingsOOD:
      return "rings";
    case FamilyKind::NearOOD:
      return "near-bars";
  }
  return "unknown";
}

FamilyKind parse_family(std::string_view name) {
  if (name == "bars") return FamilyKind::Bars;
  if (name == "blobs") return FamilyKind::Blobs;
  if (name == "crosses") return FamilyKind::CrossesOOD;
  if (name == "rings") return FamilyKind::RingsOOD;
  if (name == "near-bars") return FamilyKind::NearOOD;
  throw ConfigError("unknown dataset family '" + std::string(name) + "'");
}

bool is_ood(FamilyKind kind) {
  return kind == FamilyKind::CrossesOOD || kind == FamilyKind::RingsOOD || kind == FamilyKind::NearOOD;
}

namespace {

constexpr double kBarHalfLength = 6.0;
constexpr double kRingHalfWidth = 1.0;
constexpr double kRingRadius = 4.5;
constexpr double kBlobRadius = 4.5;
constexpr double kBlobSigma = 1.4;

struct Jitter {
  double angle_deg = 0.0;
  double dy = 0.0;
  double dx = 0.0;
  double length = 0.0;
  double intensity = 1.0;
};

double center_of(std::size_t size) { return (static_cast<double>(size) - 1.0) / 2.0; }

// Anti-aliased segment through (cy + dy, cx + dx) at `angle_deg` (screen
// counter-clockwise), max-composited onto img.
void draw_bar(GridInput& img, double angle_deg, const Jitter& j, double half_length, double half_width) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double ux = std::cos(theta);
  const double uy = -std::sin(theta);
  const double cy = center_of(img.height) + j.dy;
  const double cx = center_of(img.width) + j.dx;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double py = static_cast<double>(r) - cy;
      const double px = static_cast<double>(c) - cx;
      const double along = px * ux + py * uy;
      const double across = std::abs(-px * uy + py * ux);
      const double v = std::clamp(half_width + 0.5 - across, 0.0, 1.0) *
                       std::clamp(half_length + 0.5 - std::abs(along), 0.0, 1.0) * j.intensity;
      img.at(r, c) = std::max(img.at(r, c), v);
    }
  }
}

void draw_ring(GridInput& img, const Jitter& j, double radius) {
  const double cy = center_of(img.height) + j.dy;
  const double cx = center_of(img.width) + j.dx;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double d = std::hypot(static_cast<double>(r) - cy, static_cast<double>(c) - cx);
      const double v = std::clamp(kRingHalfWidth + 0.5 - std::abs(d - radius), 0.0, 1.0) * j.intensity;
      img.at(r, c) = std::max(img.at(r, c), v);
    }
  }
}

void draw_blob(GridInput& img, double angle_deg, const Jitter& j) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double cy = center_of(img.height) - kBlobRadius * std::sin(theta) + j.dy;
  const double cx = center_of(img.width) + kBlobRadius * std::cos(theta) + j.dx;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double d2 = std::pow(static_cast<double>(r) - cy, 2) + std::pow(static_cast<double>(c) - cx, 2);
      img.at(r, c) = std::max(img.at(r, c), j.intensity * std::exp(-d2 / (2.0 * kBlobSigma * kBlobSigma)));
    }
  }
}

double class_angle(const SyntheticFamily& f, std::size_t label) {
  return static_cast<double>(label) * 180.0 / static_cast<double>(f.classes);
}

GridInput render(const SyntheticFamily& f, std::size_t label, const Jitter& j) {
  GridInput img(f.size, f.size);
  switch (f.kind) {
    case FamilyKind::Bars:
      draw_bar(img, class_angle(f, label) + j.angle_deg, j, kBarHalfLength + j.length, f.bar_half_width);
      break;
    case FamilyKind::NearOOD:
      draw_bar(img, class_angle(f, label) + 90.0 / static_cast<double>(f.classes) + j.angle_deg, j,
               kBarHalfLength + j.length, f.bar_half_width);
      break;
    case FamilyKind::CrossesOOD:
      draw_bar(img, 45.0 + j.angle_deg, j, kBarHalfLength + j.length, f.bar_half_width);
      draw_bar(img, 135.0 + j.angle_deg, j, kBarHalfLength + j.length, f.bar_half_width);
      break;
    case FamilyKind::RingsOOD:
      draw_ring(img, j, kRingRadius + 0.5 * j.length);
      break;
    case FamilyKind::Blobs:
      draw_blob(img, 2.0 * class_angle(f, label) + j.angle_deg, j);
      break;
  }
  return img;
}

}  // namespace

GridInput prototype(const SyntheticFamily& family, std::size_t label) { return render(family, label, Jitter{}); }

LabeledDataset generate(const SyntheticFamily& family, std::size_t n_per_class, Rng& rng) {
  if (n_per_class == 0) throw InvalidInput("generate: n_per_class must be >= 1");
  if (family.classes < 2) throw InvalidInput("generate: need at least 2 classes");
  if (family.size < 4) throw InvalidInput("generate: grid size must be >= 4");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> intensity(family.intensity_min, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  LabeledDataset ds;
  ds.num_classes = family.classes;
  const bool ood = is_ood(family.kind);
  for (std::size_t label = 0; label < family.classes; ++label) {
    for (std::size_t n = 0; n < n_per_class; ++n) {
      Jitter j;
      j.angle_deg = family.angle_jitter_deg * unit(rng);
      j.dy = family.offset_jitter_px * unit(rng);
      j.dx = family.offset_jitter_px * unit(rng);
      j.length = family.length_jitter_px * unit(rng);
      j.intensity = intensity(rng);
      // OOD samples all carry label 0 but are drawn with the same variety.
      GridInput img = render(family, ood ? n % family.classes : label, j);
      for (double& v : img.pixels) v = std::clamp(v + family.noise_sigma * noise(rng), 0.0, 1.0);
      ds.inputs.push_back(std::move(img));
      ds.labels.push_back(ood ? 0 : label);
    }
  }
  return ds;
}

std::tuple<LabeledDataset, LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                                 std::array<double, 3> fractions, Rng& rng) {
  ds.validate();
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("split: fractions must sum to 1");
  for (const double f : fractions) {
    if (f < 0.0) throw InvalidInput("split: fractions must be non-negative");
  }
  const auto parts = static_cast<std::size_t>(std::count_if(fractions.begin(), fractions.end(),
                                                            [](double f) { return f > 0.0; }));
  const auto counts = ds.class_counts();
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    if (counts[c] > 0 && counts[c] < parts) {
      throw InvalidInput("split: class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                         " samples, fewer than the " + std::to_string(parts) + " requested parts");
    }
  }

  // Interleave classes by fractional rank so that every contiguous block of
  // the ordering is (nearly) stratified.
  struct Keyed {
    double key;
    std::size_t cls;
    std::size_t index;
  };
  std::vector<Keyed> order;
  order.reserve(ds.size());
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    auto members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t r = 0; r < members.size(); ++r) {
      order.push_back({(static_cast<double>(r) + 0.5) / static_cast<double>(members.size()), c, members[r]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.cls < b.cls;
  });

  const auto n = static_cast<double>(ds.size());
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto n_val = std::min(ds.size() - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));

  std::array<LabeledDataset, 3> out;
  const std::array<SplitTag, 3> tags = {SplitTag::Train, SplitTag::Val, SplitTag::Test};
  for (std::size_t p = 0; p < 3; ++p) {
    out[p].num_classes = ds.num_classes;
    out[p].split = tags[p];
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t part = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
    out[part].inputs.push_back(ds.inputs[order[i].index]);
    out[part].labels.push_back(ds.labels[order[i].index]);
  }
  return {std::move(out[0]), std::move(out[1]), std::move(out[2])};
}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what) {
  if (offset + 4 > bytes.size()) throw ParseError(std::string("idx: truncated header reading ") + what, offset);
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) | (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) | static_cast<std::uint32_t>(bytes[offset + 3]);
}

}  // namespace

LabeledDataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  constexpr std::uint32_t kImageMagic = 0x00000803;
  constexpr std::uint32_t kLabelMagic = 0x00000801;
  if (read_be32(images, 0, "image magic") != kImageMagic) throw ParseError("idx: bad image-file magic", 0);
  if (read_be32(labels, 0, "label magic") != kLabelMagic) throw ParseError("idx: bad label-file magic", 0);
  const std::size_t n = read_be32(images, 4, "image count");
  const std::size_t h = read_be32(images, 8, "rows");
  const std::size_t w = read_be32(images, 12, "columns");
  const std::size_t n_labels = read_be32(labels, 4, "label count");
  if (n != n_labels) {
    throw ParseError("idx: " + std::to_string(n) + " images but " + std::to_string(n_labels) + " labels", 4);
  }
  constexpr std::size_t kImageHeader = 16;
  constexpr std::size_t kLabelHeader = 8;
  if (images.size() < kImageHeader + n * h * w) {
    const std::size_t complete = (images.size() - kImageHeader) / std::max<std::size_t>(1, h * w);
    throw ParseError("idx: image payload truncated, header declares " + std::to_string(n) + " images, found " +
                         std::to_string(complete),
                     images.size());
  }
  if (labels.size() < kLabelHeader + n) {
    throw ParseError("idx: label payload truncated, header declares " + std::to_string(n) + " labels", labels.size());
  }
  LabeledDataset ds;
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    GridInput img(h, w);
    for (std::size_t p = 0; p < h * w; ++p) img.pixels[p] = images[kImageHeader + i * h * w + p] / 255.0;
    ds.inputs.push_back(std::move(img));
    ds.labels.push_back(labels[kLabelHeader + i]);
    max_label = std::max(max_label, ds.labels.back());
  }
  ds.num_classes = std::max<std::size_t>(2, max_label + 1);
  return ds;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LabeledDataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return parse_idx(read_file_bytes(images), read_file_bytes(labels));
}

namespace {

constexpr std::array<std::uint8_t, 8> kDatasetMagic = {'C', 'E', 'D', 'L', 'D', 'S', 'E', 'T'};
constexpr std::uint32_t kDatasetVersion = 1;

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t& offset, int bytes) {
  if (offset + static_cast<std::size_t>(bytes) > in.size()) throw ParseError("dataset: truncated", offset);
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(in[offset + b]) << (8 * b);
  offset += static_cast<std::size_t>(bytes);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const LabeledDataset& ds) {
  ds.validate();
  if (ds.num_classes > 65536) throw InvalidInput("dataset: too many classes for u16 labels");
  std::vector<std::uint8_t> out(kDatasetMagic.begin(), kDatasetMagic.end());
  put_le(out, kDatasetVersion, 4);
  put_le(out, static_cast<std::uint32_t>(ds.split), 4);
  const std::size_t h = ds.size() > 0 ? ds.inputs.front().height : 0;
  const std::size_t w = ds.size() > 0 ? ds.inputs.front().width : 0;
  put_le(out, ds.size(), 4);
  put_le(out, h, 4);
  put_le(out, w, 4);
  put_le(out, ds.num_classes, 4);
  for (const auto& img : ds.inputs) {
    for (const double v : img.pixels) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  for (const auto y : ds.labels) put_le(out, y, 2);
  return out;
}

LabeledDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kDatasetMagic.size() || !std::equal(kDatasetMagic.begin(), kDatasetMagic.end(), bytes.begin())) {
    throw ParseError("dataset: bad magic", 0);
  }
  std::size_t off = kDatasetMagic.size();
  const auto version = get_le(bytes, off, 4);
  if (version != kDatasetVersion) throw ParseError("dataset: unsupported version " + std::to_string(version), 8);
  const auto tag = get_le(bytes, off, 4);
  if (tag > static_cast<std::uint64_t>(SplitTag::Unsplit)) throw ParseError("dataset: bad split tag", 12);
  const std::size_t n = get_le(bytes, off, 4);
  const std::size_t h = get_le(bytes, off, 4);
  const std::size_t w = get_le(bytes, off, 4);
  LabeledDataset ds;
  ds.num_classes = get_le(bytes, off, 4);
  ds.split = static_cast<SplitTag>(tag);
  const std::size_t need = off + n * h * w * 8 + n * 2;
  if (bytes.size() != need) {
    throw ParseError("dataset: payload is " + std::to_string(bytes.size()) + " bytes, header implies " +
                         std::to_string(need),
                     std::min(bytes.size(), need));
  }
  ds.inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    GridInput img(h, w);
    for (double& v : img.pixels) v = std::bit_cast<double>(get_le(bytes, off, 8));
    ds.inputs.push_back(std::move(img));
  }
  for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(get_le(bytes, off, 2));
  try {
    ds.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("dataset: ") + e.what(), off);
  }
  return ds;
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  const auto bytes = encode_dataset(ds);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

LabeledDataset read_dataset(const std::filesystem::path& path) { return decode_dataset(read_file_bytes(path)); }

}  // namespace cedl
