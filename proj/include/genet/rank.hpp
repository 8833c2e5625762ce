#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genet/linalg.hpp"

namespace genet {

/// A 4-D convolution kernel laid out row-major as (c_out, c_in, k, k).
struct KernelTensor {
  std::string layer_name;
  std::array<std::uint32_t, 4> dims{};
  std::vector<float> data;

  [[nodiscard]] std::uint32_t out_channels() const { return dims[0]; }
  [[nodiscard]] std::uint32_t in_channels() const { return dims[1]; }
  [[nodiscard]] std::uint32_t kernel() const { return dims[2]; }

  friend bool operator==(const KernelTensor&, const KernelTensor&) = default;
};

// KT01 layout, little-endian:
//   "KT01" | u16 name_len | name (UTF-8) | u32 ndim (= 4) | ndim x u32 dims | float32 payload
inline constexpr std::string_view kKernelMagic = "KT01";

/// Throws BAD_MAGIC, TRUNCATED, DIM_OVERFLOW, BAD_DIMS or TRAILING_BYTES.
[[nodiscard]] KernelTensor decode_kernel(std::span<const std::byte> bytes);
[[nodiscard]] std::vector<std::byte> encode_kernel(const KernelTensor& tensor);

[[nodiscard]] KernelTensor load_kernel(const std::string& path);
void write_kernel(const std::string& path, const KernelTensor& tensor);

/// (c_out, c_in * k * k); row i is the flattened filter of output channel i.
[[nodiscard]] Matrix reshape_kernel(const KernelTensor& tensor);

struct SpectrumPoint {
  double x = 0.0;       // i / c_out, i starting at 1
  double lambda = 0.0;  // sigma_i / sigma_max
};

struct SpectrumReport {
  std::string layer_name;
  std::vector<SpectrumPoint> points;
  double decay_area = 0.0;  // mean normalized singular value
};

/// Normalized singular-value spectrum. Throws ZERO_KERNEL for an all-zero kernel.
[[nodiscard]] SpectrumReport spectrum(const KernelTensor& tensor);

/// Plot-ready CSV: `layer_name,x,lambda` rows, then a `layer_name,decay_area`
/// summary block, both in input order.
[[nodiscard]] std::string stage_report(std::span<const KernelTensor> kernels);

}  // namespace genet
