#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cedl/net.hpp"

namespace cedl {

// Weight files are JSON: a header (format, version, layer_sizes,
// dropout_rate, seed) and, per layer, base64 of the little-endian float64
// weight and bias arrays. Loading reproduces forwards bit-exactly.
std::string weights_to_string(const EvidentialNet& net);
EvidentialNet weights_from_string(std::string_view text);

void save_weights(const EvidentialNet& net, const std::filesystem::path& path);
EvidentialNet load_weights(const std::filesystem::path& path);

std::string encode_f64_base64(std::span<const double> values);
std::vector<double> decode_f64_base64(std::string_view text);

}  // namespace cedl
