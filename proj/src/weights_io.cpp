#include "cedl/weights_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cedl/error.hpp"

namespace cedl {
namespace {

constexpr std::string_view kFormat = "cedl-weights";
constexpr int kVersion = 1;
constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t n = bytes[i] << 16;
    if (i + 1 < bytes.size()) n |= bytes[i + 1] << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ParseError("base64: length is not a multiple of 4", text.size());
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);

  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t n = 0;
    int pad = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=' && i + 4 == text.size() && j >= 2) {
        ++pad;
        n <<= 6;
        continue;
      }
      const int v = lookup[static_cast<unsigned char>(c)];
      if (v < 0 || pad > 0) throw ParseError("base64: invalid character", i + j);
      n = (n << 6) | static_cast<std::uint32_t>(v);
    }
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
  }
  return out;
}

}  // namespace

std::string encode_f64_base64(std::span<const double> values) {
  std::vector<std::uint8_t> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

std::vector<double> decode_f64_base64(std::string_view text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % 8 != 0) throw ParseError("float64 array: byte count is not a multiple of 8", bytes.size());
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

std::string weights_to_string(const EvidentialNet& net) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["layer_sizes"] = net.config().layer_sizes;
  doc["dropout_rate"] = net.config().dropout_rate;
  doc["seed"] = net.config().seed;
  auto layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back({{"weights", encode_f64_base64(layer.weights)}, {"bias", encode_f64_base64(layer.bias)}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2) + "\n";
}

EvidentialNet weights_from_string(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("weights: malformed JSON: ") + e.what(), e.byte);
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw ParseError("weights: unexpected format tag", 0);
    if (doc.at("version").get<int>() != kVersion) throw ParseError("weights: unsupported version", 0);
    NetConfig cfg;
    cfg.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    cfg.dropout_rate = doc.at("dropout_rate").get<double>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.validate();
    EvidentialNet net = EvidentialNet::zeros(cfg);
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers().size()) {
      throw ShapeError("weights: header declares " + std::to_string(net.layers().size()) + " layers, file holds " +
                       std::to_string(layers.size()));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto w = decode_f64_base64(layers[l].at("weights").get<std::string>());
      auto b = decode_f64_base64(layers[l].at("bias").get<std::string>());
      auto& dst = net.layers()[l];
      if (w.size() != dst.weights.size() || b.size() != dst.bias.size()) {
        throw ShapeError("weights: layer " + std::to_string(l) + " holds " + std::to_string(w.size()) + "+" +
                         std::to_string(b.size()) + " values, header implies " + std::to_string(dst.weights.size()) +
                         "+" + std::to_string(dst.bias.size()));
      }
      dst.weights = std::move(w);
      dst.bias = std::move(b);
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weights: ") + e.what(), 0);
  } catch (const InvalidInput& e) {
    throw ShapeError(std::string("weights: ") + e.what());
  }
}

void save_weights(const EvidentialNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << weights_to_string(net);
  if (!out) throw IoError("write failed: " + path.string());
}

EvidentialNet load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return weights_from_string(buf.str());
}

}  // namespace cedl
