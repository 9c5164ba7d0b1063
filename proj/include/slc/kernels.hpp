#pragma once

// Per-pixel inner loops of the frame pipeline. Every kernel has a scalar
// reference implementation; vector variants are selected at runtime from
// the host CPU and must agree with the reference (bit-exact for elementwise
// kernels, to summation-order rounding for reductions).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace slc::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  // sum_p |prev[p] - 2 cur[p] + next[p]|
  double (*abs_second_diff_sum)(const float* prev, const float* cur,
                                const float* next, std::size_t n);
  // acc[p] += src[p]
  void (*accumulate)(double* acc, const float* src, std::size_t n);
  double (*sum)(const float* src, std::size_t n);
  // BT.601 luma of interleaved 8-bit RGB, scaled to [0,1].
  void (*luma_from_rgb)(const std::uint8_t* rgb, float* out,
                        std::size_t pixels);
  // mask[i] = values[i] >= threshold
  void (*threshold_mask)(const float* values, float threshold,
                         std::uint8_t* mask, std::size_t n);
};

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(__i386__)
extern const KernelTable avx2_table;
#endif
#if defined(__aarch64__)
extern const KernelTable neon_table;
#endif
}  // namespace detail

// Variants usable on this host, scalar first.
std::vector<Isa> available_isas();

// nullptr when the variant is not compiled in or not supported by the CPU.
const KernelTable* table_for(Isa isa);

// Best available table. Setting SLC_FORCE_SCALAR=1 in the environment pins
// the scalar reference.
const KernelTable& active();

inline double abs_second_diff_sum(std::span<const float> prev,
                                  std::span<const float> cur,
                                  std::span<const float> next) {
  return active().abs_second_diff_sum(prev.data(), cur.data(), next.data(),
                                      cur.size());
}

inline void accumulate(std::span<double> acc, std::span<const float> src) {
  active().accumulate(acc.data(), src.data(), src.size());
}

inline double sum(std::span<const float> src) {
  return active().sum(src.data(), src.size());
}

}  // namespace slc::kernels
