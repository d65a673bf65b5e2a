#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant selected at runtime.
// Set BOREUQ_SIMD=scalar in the environment to force the reference path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace boreuq::kernels {

enum class Isa { scalar, avx2 };

/// Structure-of-arrays view over the terms of a hierarchical expansion.
///
/// term p contributes coeff[p] * prod_d table[d * stride + codes[d][p]].
/// `codes[d]` points at `count` node codes for dimension d.
struct ProductSumView {
  const double* coeff = nullptr;
  const std::int32_t* const* codes = nullptr;
  std::size_t count = 0;
  std::size_t dim = 0;
  const double* table = nullptr;
  std::size_t stride = 0;
};

/// out[q] = sum_i exp(-0.5 * ((queries[q] - samples[i]) / h)^2)
using GaussSumFn = void (*)(std::span<const double> samples,
                            std::span<const double> queries, double h,
                            std::span<double> out);
using ProductSumFn = double (*)(const ProductSumView& view);

struct KernelTable {
  Isa isa;
  ProductSumFn product_sum;
  GaussSumFn gauss_sum;
};

/// Kernel table for a specific ISA; falls back to scalar when unavailable.
const KernelTable& table_for(Isa isa);

/// Kernel table picked once per process from CPU features and BOREUQ_SIMD.
const KernelTable& active();

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

namespace scalar {
double product_sum(const ProductSumView& view);
void gauss_sum(std::span<const double> samples, std::span<const double> queries,
               double h, std::span<double> out);
}  // namespace scalar

#if defined(BOREUQ_HAVE_AVX2)
namespace avx2 {
double product_sum(const ProductSumView& view);
void gauss_sum(std::span<const double> samples, std::span<const double> queries,
               double h, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace boreuq::kernels
