#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "cedl/error.hpp"
#include "cedl/weights_io.hpp"

using namespace cedl;

TEST(Base64, KnownVectors) {
  // 1.0 little-endian is 00 00 00 00 00 00 f0 3f.
  EXPECT_EQ(encode_f64_base64(std::vector<double>{1.0}), "AAAAAAAA8D8=");
  EXPECT_EQ(decode_f64_base64("AAAAAAAA8D8="), std::vector<double>{1.0});
  EXPECT_EQ(encode_f64_base64(std::vector<double>{}), "");
  EXPECT_TRUE(decode_f64_base64("").empty());
}

TEST(Base64, RoundTripsSpecialValues) {
  const std::vector<double> v = {0.0, -0.0, 1e-310, -3.5, 1.7976931348623157e308, 0.1, 12345.678};
  const auto back = decode_f64_base64(encode_f64_base64(v));
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i]), std::bit_cast<std::uint64_t>(v[i]));
}

TEST(Base64, RejectsMalformed) {
  EXPECT_THROW(decode_f64_base64("AAA"), ParseError);
  EXPECT_THROW(decode_f64_base64("AAAA"), ParseError);  // 3 bytes, not a multiple of 8
  EXPECT_THROW(decode_f64_base64("AAAAAAAA8D!="), ParseError);
  EXPECT_THROW(decode_f64_base64("AA=AAAAA8D8="), ParseError);
}

TEST(WeightsIo, StringRoundTripIsBitExact) {
  const EvidentialNet net(NetConfig{{12, 7, 5, 3}, 0.3, 77});
  const auto back = weights_from_string(weights_to_string(net));
  EXPECT_EQ(back.config().layer_sizes, net.config().layer_sizes);
  EXPECT_EQ(back.config().dropout_rate, net.config().dropout_rate);
  EXPECT_EQ(back.config().seed, net.config().seed);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    EXPECT_EQ(back.layers()[l].weights, net.layers()[l].weights);
    EXPECT_EQ(back.layers()[l].bias, net.layers()[l].bias);
  }
  const std::vector<double> x(12, 0.4);
  EXPECT_EQ(forward(back, x), forward(net, x));
}

TEST(WeightsIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "cedl_weights_roundtrip.json";
  const EvidentialNet net(NetConfig{{4, 6, 2}, 0.0, 1});
  save_weights(net, path);
  const auto back = load_weights(path);
  EXPECT_EQ(back.layers()[1].weights, net.layers()[1].weights);
  std::filesystem::remove(path);
  EXPECT_THROW(load_weights(path), IoError);
}

TEST(WeightsIo, RejectsBadDocuments) {
  EXPECT_THROW(weights_from_string("{not json"), ParseError);
  EXPECT_THROW(weights_from_string("{}"), ParseError);
  const EvidentialNet net(NetConfig{{4, 6, 2}, 0.0, 1});
  auto text = weights_to_string(net);
  auto bad_format = text;
  bad_format.replace(bad_format.find("cedl-weights"), 12, "other-thing!");
  EXPECT_THROW(weights_from_string(bad_format), ParseError);

  // Header claims a wider hidden layer than the arrays hold.
  const EvidentialNet wide(NetConfig{{4, 7, 2}, 0.0, 1});
  const auto wide_text = weights_to_string(wide);
  const auto layers_at = text.find("\"layers\"");
  const auto wide_layers_at = wide_text.find("\"layers\"");
  ASSERT_NE(layers_at, std::string::npos);
  ASSERT_NE(wide_layers_at, std::string::npos);
  const auto mixed = wide_text.substr(0, wide_layers_at) + text.substr(layers_at);
  EXPECT_THROW(weights_from_string(mixed), ShapeError);
}
