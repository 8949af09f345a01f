#include <gtest/gtest.h>

#include <random>

#include "dlfusion/error.hpp"
#include "dlfusion/opcount.hpp"
#include "oracles.hpp"

using namespace dlfusion;

TEST(OpCount, ConvMatchesLoopNest) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> d(1, 6);
  for (int i = 0; i < 50; ++i) {
    ConvParams p{d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), 1, 0};
    EXPECT_EQ(conv_ops(p).ops, 2 * oracle::conv_macs_by_loops(p));
  }
}

TEST(OpCount, KnownLayers) {
  // 2 * 224 * 224 * 3 * 3 * 64 * 64
  EXPECT_EQ(conv_ops(make_conv(64, 64, 224, 3)).ops, 3'699'376'128ull);
  EXPECT_EQ(fc_ops({1, 4096, 1000}).ops, 8'192'000ull);
  EXPECT_EQ(layer_ops(attached_layer(0, LayerKind::ReLU)).ops, 0u);
}

TEST(OpCount, EqualOpsTriple) {
  // Channel x size held constant keeps the op count fixed.
  const auto a = conv_ops(make_conv(32, 32, 224, 3)).ops;
  EXPECT_EQ(conv_ops(make_conv(64, 64, 112, 3)).ops, a);
  EXPECT_EQ(conv_ops(make_conv(128, 128, 56, 3)).ops, a);
}

TEST(OpCount, TensorBytes) {
  const Layer l = conv_layer(0, make_conv(4, 8, 10, 3));
  EXPECT_EQ(input_bytes(l, 2), 4u * 10 * 10 * 2);
  EXPECT_EQ(output_bytes(l, 2), 8u * 10 * 10 * 2);
  EXPECT_EQ(weight_bytes(l, 2), 4u * 8 * 9 * 2);
  EXPECT_EQ(tensor_bytes(l, 2), input_bytes(l, 2) + output_bytes(l, 2) + weight_bytes(l, 2));
  const Layer fc = fc_layer(0, {2, 16, 4});
  EXPECT_EQ(tensor_bytes(fc, 1), 2u * 16 + 2u * 4 + 16u * 4);
}

TEST(OpCount, Intensity) {
  const Layer l = conv_layer(0, make_conv(64, 64, 56, 3));
  EXPECT_DOUBLE_EQ(intensity(l, 2).value,
                   static_cast<double>(conv_ops(*l.conv).ops) / tensor_bytes(l, 2));
  EXPECT_THROW(intensity(attached_layer(1, LayerKind::Pool), 2), NotComputeLayerError);
}

TEST(OpCount, Overflow) {
  ConvParams huge{1 << 20, 1 << 20, 1 << 20, 1 << 20, 3, 3, 1, 1};
  EXPECT_THROW(conv_ops(huge), OverflowError);
}

TEST(SearchSpace, SmallValues) {
  EXPECT_EQ(search_space(2), 32 * 32);
  // n = 3: 32^2 * 2 + 32^3 * 1
  EXPECT_EQ(search_space(3), 2048 + 32768);
  EXPECT_THROW(search_space(1), DomainError);
}

TEST(SearchSpace, MatchesClosedForm) {
  for (int n = 2; n <= 120; ++n) EXPECT_EQ(search_space(n), search_space_closed_form(n)) << n;
}

TEST(SearchSpace, FiftyLayers) {
  const auto v = search_space(50);
  EXPECT_EQ(scientific(v), "8.17e75");
  EXPECT_EQ(v, 32 * (boost::multiprecision::pow(SpaceSize(33), 49) - 1));
}

TEST(Scientific, RoundingAndCarry) {
  EXPECT_EQ(scientific(SpaceSize(12345)), "1.23e4");
  EXPECT_EQ(scientific(SpaceSize(12350)), "1.24e4");
  EXPECT_EQ(scientific(SpaceSize(99960)), "1.00e5");
  EXPECT_EQ(scientific(SpaceSize(7)), "7.00e0");
  EXPECT_EQ(scientific(SpaceSize(0)), "0.00e0");
  EXPECT_EQ(scientific(SpaceSize(123), 1), "1e2");
}
