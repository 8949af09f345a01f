#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "dlfusion/model_ir.hpp"

namespace dlfusion {

/// Exact operation count (2 ops per multiply-accumulate). Stored in 64 bits:
/// conv/FC products above 2^64 - 1 (~1.8e19 ops) raise OverflowError, far
/// beyond any realistic single layer.
struct OpCount {
  std::uint64_t ops = 0;

  double gops() const { return static_cast<double>(ops) / 1e9; }

  bool operator==(const OpCount&) const = default;
};

struct Intensity {
  double value = 0.0;  // ops per byte
};

using SpaceSize = boost::multiprecision::cpp_int;

OpCount conv_ops(const ConvParams& p);
OpCount fc_ops(const FcParams& p);
OpCount layer_ops(const Layer& l);

/// Ops per output element of a compute layer (conv: 2*k_h*k_w*c_in*c_out per
/// pixel); 0 for attached layers.
std::uint64_t ops_per_output_pixel(const Layer& l);

// Tensor sizes in bytes. Attached layers report 0 for all of them.
std::uint64_t input_bytes(const Layer& l, std::int64_t bytes_per_element);
std::uint64_t output_bytes(const Layer& l, std::int64_t bytes_per_element);
std::uint64_t weight_bytes(const Layer& l, std::int64_t bytes_per_element);

/// input + output + weights.
std::uint64_t tensor_bytes(const Layer& l, std::int64_t bytes_per_element);

/// ops / tensor_bytes. Throws NotComputeLayerError for attached layers.
Intensity intensity(const Layer& l, std::int64_t bytes_per_element);

/// Size of the joint (partition x 32-way MP) space as the explicit sum
/// sum_{i=1}^{n-1} 32^{i+1} * prod_{x=1}^{i}(n-x) / i!. Throws DomainError for n < 2.
SpaceSize search_space(int n);

/// The same quantity through the identity 32 * (33^(n-1) - 1).
SpaceSize search_space_closed_form(int n);

/// Base-10 scientific rendering with `digits` significant digits, e.g. "8.17e75".
std::string scientific(const SpaceSize& value, int digits = 3);

}  // namespace dlfusion
