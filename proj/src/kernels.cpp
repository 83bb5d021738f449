#include "transfer/kernels.hpp"

#include <cstdlib>

namespace transfer::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void relu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* pre, const double* grad_out, double* grad_in,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    grad_in[i] = pre[i] > 0.0 ? grad_out[i] : 0.0;
}

}  // namespace scalar

bool cpu_has_avx2() {
#if defined(TRANSFER_KERNELS_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

// Constant-initialized to the scalar path; the binder below upgrades them to
// AVX2 during dynamic initialization when the CPU qualifies.
DotFn dot = scalar::dot;
ReduceFn sum = scalar::sum;
DotFn sq_dist = scalar::sq_dist;
AxpyFn axpy = scalar::axpy;
ScaleFn scale = scalar::scale;
MapFn relu = scalar::relu;
ReluBackwardFn relu_backward = scalar::relu_backward;

namespace {

bool want_avx2() {
  if (const char* env = std::getenv("TRANSFER_FORCE_SCALAR"))
    if (env[0] == '1') return false;
  return cpu_has_avx2();
}

bool g_avx2 = false;

void rebind() {
#if defined(TRANSFER_KERNELS_HAVE_AVX2)
  if (g_avx2) {
    dot = avx2::dot;
    sum = avx2::sum;
    sq_dist = avx2::sq_dist;
    axpy = avx2::axpy;
    scale = avx2::scale;
    relu = avx2::relu;
    relu_backward = avx2::relu_backward;
    return;
  }
#endif
  dot = scalar::dot;
  sum = scalar::sum;
  sq_dist = scalar::sq_dist;
  axpy = scalar::axpy;
  scale = scalar::scale;
  relu = scalar::relu;
  relu_backward = scalar::relu_backward;
}

struct Binder {
  Binder() {
    g_avx2 = want_avx2();
    rebind();
  }
} g_binder;

}  // namespace

bool dispatch_is_avx2() { return g_avx2; }

void force_scalar(bool on) {
  g_avx2 = on ? false : want_avx2();
  rebind();
}

}  // namespace transfer::kernels
