#include "boreuq/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace boreuq::kernels::avx2 {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x <= 0 (Cephes rational form, about 1 ulp). Lanes below -708
// flush to zero.
__m256d exp_nonpositive(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lo_limit);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, e);
}

}  // namespace

double product_sum(const ProductSumView& v) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 4 <= v.count; p += 4) {
    __m256d term = _mm256_loadu_pd(v.coeff + p);
    for (std::size_t d = 0; d < v.dim; ++d) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(v.codes[d] + p));
      term = _mm256_mul_pd(term, _mm256_i32gather_pd(v.table + d * v.stride, idx, 8));
    }
    acc = _mm256_add_pd(acc, term);
  }
  double total = hsum(acc);
  for (; p < v.count; ++p) {
    double term = v.coeff[p];
    for (std::size_t d = 0; d < v.dim; ++d) {
      term *= v.table[d * v.stride + static_cast<std::size_t>(v.codes[d][p])];
    }
    total += term;
  }
  return total;
}

void gauss_sum(std::span<const double> samples, std::span<const double> queries,
               double h, std::span<double> out) {
  const double inv_h = 1.0 / h;
  const __m256d vinv = _mm256_set1_pd(inv_h);
  const __m256d mhalf = _mm256_set1_pd(-0.5);
  const std::size_t n = samples.size();
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const __m256d vq = _mm256_set1_pd(queries[q]);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d u = _mm256_mul_pd(_mm256_sub_pd(vq, _mm256_loadu_pd(samples.data() + i)), vinv);
      acc = _mm256_add_pd(acc, exp_nonpositive(_mm256_mul_pd(mhalf, _mm256_mul_pd(u, u))));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
      const double u = (queries[q] - samples[i]) * inv_h;
      total += std::exp(-0.5 * u * u);
    }
    out[q] = total;
  }
}

}  // namespace boreuq::kernels::avx2
