#include <doctest.h>

#include <vector>

#include "transfer/common.hpp"
#include "transfer/kernels.hpp"

using namespace transfer;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match hand loops") {
  Rng rng(1);
  const auto a = random_vec(37, rng);
  const auto b = random_vec(37, rng);
  double dot = 0.0, sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    sum += a[i];
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  CHECK(kernels::scalar::dot(a.data(), b.data(), a.size()) == doctest::Approx(dot).epsilon(1e-15));
  CHECK(kernels::scalar::sum(a.data(), a.size()) == doctest::Approx(sum).epsilon(1e-15));
  CHECK(kernels::scalar::sq_dist(a.data(), b.data(), a.size()) == doctest::Approx(sq).epsilon(1e-15));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!kernels::cpu_has_avx2()) return;
  Rng rng(2);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3},
                        std::size_t{4}, std::size_t{7}, std::size_t{8},
                        std::size_t{31}, std::size_t{100}, std::size_t{1003}}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);

    const double tol = 1e-12 * (1.0 + static_cast<double>(n));
    CHECK(kernels::avx2::dot(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n)).epsilon(tol));
    CHECK(kernels::avx2::sum(a.data(), n) ==
          doctest::Approx(kernels::scalar::sum(a.data(), n)).epsilon(tol));
    CHECK(kernels::avx2::sq_dist(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::sq_dist(a.data(), b.data(), n)).epsilon(tol));

    std::vector<double> y1 = b, y2 = b;
    kernels::scalar::axpy(0.37, a.data(), y1.data(), n);
    kernels::avx2::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    std::vector<double> r1(n), r2(n);
    kernels::scalar::relu(a.data(), r1.data(), n);
    kernels::avx2::relu(a.data(), r2.data(), n);
    CHECK(r1 == r2);

    std::vector<double> g1(n), g2(n);
    kernels::scalar::relu_backward(a.data(), b.data(), g1.data(), n);
    kernels::avx2::relu_backward(a.data(), b.data(), g2.data(), n);
    CHECK(g1 == g2);

    std::vector<double> s1 = a, s2 = a;
    kernels::scalar::scale(-1.75, s1.data(), n);
    kernels::avx2::scale(-1.75, s2.data(), n);
    CHECK(s1 == s2);
  }
}

TEST_CASE("runtime dispatch can be pinned to scalar") {
  const bool was_avx2 = kernels::dispatch_is_avx2();
  kernels::force_scalar(true);
  CHECK_FALSE(kernels::dispatch_is_avx2());
  const double x[] = {1.0, 2.0, 3.0};
  CHECK(kernels::sum(x, 3) == 6.0);
  kernels::force_scalar(false);
  CHECK(kernels::dispatch_is_avx2() == was_avx2);
}
