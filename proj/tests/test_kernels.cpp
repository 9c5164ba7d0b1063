#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "slc/kernels.hpp"

using namespace slc::kernels;

namespace {

std::vector<float> random_plane(std::mt19937& gen, std::size_t n) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

}  // namespace

TEST(Kernels, ScalarAlwaysAvailableAndFirst) {
  const auto isas = available_isas();
  ASSERT_FALSE(isas.empty());
  EXPECT_EQ(isas.front(), Isa::scalar);
  for (Isa isa : isas) EXPECT_NE(table_for(isa), nullptr) << isa_name(isa);
}

TEST(Kernels, SecondDifferenceMatchesReference) {
  std::mt19937 gen(1);
  const KernelTable& ref = *table_for(Isa::scalar);
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 31u, 64u, 1000u, 1537u}) {
    const auto a = random_plane(gen, n), b = random_plane(gen, n), c = random_plane(gen, n);
    const double want = ref.abs_second_diff_sum(a.data(), b.data(), c.data(), n);
    double naive = 0.0;
    for (std::size_t i = 0; i < n; ++i) naive += std::fabs((a[i] - 2.0f * b[i]) + c[i]);
    EXPECT_NEAR(want, naive, 1e-9 * (1.0 + n));
    for (Isa isa : available_isas()) {
      const double got = table_for(isa)->abs_second_diff_sum(a.data(), b.data(), c.data(), n);
      EXPECT_NEAR(got, want, 1e-12 * (1.0 + n)) << isa_name(isa) << " n=" << n;
    }
  }
}

TEST(Kernels, AccumulateIsBitExact) {
  std::mt19937 gen(2);
  for (std::size_t n : {1u, 5u, 16u, 33u, 1536u}) {
    const auto src = random_plane(gen, n);
    std::vector<double> want(n, 0.25);
    table_for(Isa::scalar)->accumulate(want.data(), src.data(), n);
    for (Isa isa : available_isas()) {
      std::vector<double> got(n, 0.25);
      table_for(isa)->accumulate(got.data(), src.data(), n);
      EXPECT_EQ(got, want) << isa_name(isa);
    }
  }
}

TEST(Kernels, SumAgreesAcrossVariants) {
  std::mt19937 gen(3);
  for (std::size_t n : {0u, 1u, 15u, 256u, 4099u}) {
    const auto src = random_plane(gen, n);
    const double want = table_for(Isa::scalar)->sum(src.data(), n);
    for (Isa isa : available_isas())
      EXPECT_NEAR(table_for(isa)->sum(src.data(), n), want, 1e-12 * (1.0 + n)) << isa_name(isa);
  }
}

TEST(Kernels, LumaAndThresholdAreBitExact) {
  std::mt19937 gen(4);
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::size_t pixels : {1u, 7u, 8u, 9u, 100u, 1023u}) {
    std::vector<std::uint8_t> rgb(pixels * 3);
    for (auto& b : rgb) b = static_cast<std::uint8_t>(byte(gen));
    std::vector<float> want(pixels);
    table_for(Isa::scalar)->luma_from_rgb(rgb.data(), want.data(), pixels);
    std::vector<std::uint8_t> want_mask(pixels);
    table_for(Isa::scalar)->threshold_mask(want.data(), 0.5f, want_mask.data(), pixels);
    for (Isa isa : available_isas()) {
      std::vector<float> got(pixels);
      table_for(isa)->luma_from_rgb(rgb.data(), got.data(), pixels);
      EXPECT_EQ(got, want) << isa_name(isa);
      std::vector<std::uint8_t> mask(pixels);
      table_for(isa)->threshold_mask(want.data(), 0.5f, mask.data(), pixels);
      EXPECT_EQ(mask, want_mask) << isa_name(isa);
    }
  }
}

TEST(Kernels, LumaWeights) {
  const std::uint8_t white[3] = {255, 255, 255}, red[3] = {255, 0, 0};
  float out = 0;
  for (Isa isa : available_isas()) {
    table_for(isa)->luma_from_rgb(white, &out, 1);
    EXPECT_FLOAT_EQ(out, 1.0f);
    table_for(isa)->luma_from_rgb(red, &out, 1);
    EXPECT_NEAR(out, 0.299f, 1e-6);
  }
}
