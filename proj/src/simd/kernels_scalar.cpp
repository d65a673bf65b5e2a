#include "boreuq/kernels.hpp"

#include <cmath>

namespace boreuq::kernels::scalar {

double product_sum(const ProductSumView& v) {
  double acc = 0.0;
  for (std::size_t p = 0; p < v.count; ++p) {
    double term = v.coeff[p];
    for (std::size_t d = 0; d < v.dim; ++d) {
      term *= v.table[d * v.stride + static_cast<std::size_t>(v.codes[d][p])];
    }
    acc += term;
  }
  return acc;
}

void gauss_sum(std::span<const double> samples, std::span<const double> queries,
               double h, std::span<double> out) {
  const double inv_h = 1.0 / h;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    double acc = 0.0;
    for (double s : samples) {
      const double u = (queries[q] - s) * inv_h;
      acc += std::exp(-0.5 * u * u);
    }
    out[q] = acc;
  }
}

}  // namespace boreuq::kernels::scalar
