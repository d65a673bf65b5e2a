#include "boreuq/kernels.hpp"

#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

using namespace boreuq::kernels;

namespace {

struct RandomExpansion {
  std::vector<double> coeff;
  std::vector<std::vector<std::int32_t>> codes;
  std::vector<const std::int32_t*> code_ptrs;
  std::vector<double> table;
  std::size_t stride = 0;

  RandomExpansion(std::size_t count, std::size_t dim, std::size_t stride_, std::uint64_t seed) : stride(stride_) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::int32_t> c(0, static_cast<std::int32_t>(stride - 1));
    coeff.resize(count);
    for (auto& v : coeff) v = u(g);
    codes.assign(dim, std::vector<std::int32_t>(count));
    for (auto& row : codes) {
      for (auto& v : row) v = c(g);
    }
    for (auto& row : codes) code_ptrs.push_back(row.data());
    table.resize(dim * stride);
    for (auto& v : table) v = u(g);
  }

  ProductSumView view() const {
    return {coeff.data(), code_ptrs.data(), coeff.size(), codes.size(), table.data(), stride};
  }
};

double naive_product_sum(const RandomExpansion& e) {
  long double s = 0.0L;
  for (std::size_t p = 0; p < e.coeff.size(); ++p) {
    long double t = e.coeff[p];
    for (std::size_t d = 0; d < e.codes.size(); ++d) t *= e.table[d * e.stride + e.codes[d][p]];
    s += t;
  }
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("scalar product_sum matches a naive loop") {
  for (std::size_t count : {0u, 1u, 7u, 64u, 1001u}) {
    for (std::size_t dim : {1u, 2u, 5u, 8u}) {
      const RandomExpansion e(count, dim, 33, count * 31 + dim);
      CHECK(scalar::product_sum(e.view()) == doctest::Approx(naive_product_sum(e)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("scalar gauss_sum matches its definition") {
  const std::vector<double> s{0.0, 0.5, 2.0, -1.0};
  const std::vector<double> q{0.1, 1.0};
  std::vector<double> out(q.size());
  scalar::gauss_sum(s, q, 0.7, out);
  for (std::size_t i = 0; i < q.size(); ++i) {
    double ref = 0.0;
    for (double x : s) ref += std::exp(-0.5 * std::pow((q[i] - x) / 0.7, 2));
    CHECK(out[i] == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("dispatch falls back and reports names") {
  CHECK(isa_name(Isa::scalar) == "scalar");
  CHECK(isa_supported(Isa::scalar));
  CHECK(table_for(Isa::scalar).isa == Isa::scalar);
  if (!isa_supported(Isa::avx2)) CHECK(table_for(Isa::avx2).isa == Isa::scalar);
}

#if defined(BOREUQ_HAVE_AVX2)
TEST_CASE("avx2 product_sum equals scalar") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("CPU lacks AVX2; skipping");
    return;
  }
  for (std::size_t count : {0u, 1u, 3u, 4u, 5u, 17u, 256u, 4099u}) {
    for (std::size_t dim : {1u, 2u, 3u, 8u, 18u}) {
      const RandomExpansion e(count, dim, 65, count * 7 + dim);
      const double a = scalar::product_sum(e.view());
      const double b = avx2::product_sum(e.view());
      CHECK(b == doctest::Approx(a).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("avx2 gauss_sum equals scalar") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("CPU lacks AVX2; skipping");
    return;
  }
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(3.0, 0.2);
  for (std::size_t ns : {1u, 3u, 4u, 9u, 1000u, 4097u}) {
    std::vector<double> s(ns);
    for (auto& v : s) v = n(g);
    std::vector<double> q;
    for (int i = 0; i < 37; ++i) q.push_back(2.0 + i * 0.05);
    std::vector<double> a(q.size()), b(q.size());
    scalar::gauss_sum(s, q, 0.03, a);
    avx2::gauss_sum(s, q, 0.03, b);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12).scale(1e-300));
  }
}
#endif
