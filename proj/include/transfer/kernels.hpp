#pragma once

#include <cstddef>

// Dense double-precision inner loops used by the network engine and the
// empirical-risk reductions. Scalar reference implementations always exist;
// AVX2+FMA variants are selected once at startup when the CPU supports them.
// The two paths are equivalence-tested against each other (they may differ by
// rounding/reassociation only, never semantically).
namespace transfer::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void relu(const double* x, double* y, std::size_t n);
// grad_in[i] = grad_out[i] where pre[i] > 0, else 0.
void relu_backward(const double* pre, const double* grad_out, double* grad_in,
                   std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TRANSFER_KERNELS_HAVE_AVX2 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void relu(const double* x, double* y, std::size_t n);
void relu_backward(const double* pre, const double* grad_out, double* grad_in,
                   std::size_t n);
}  // namespace avx2
#endif

using DotFn = double (*)(const double*, const double*, std::size_t);
using ReduceFn = double (*)(const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using ScaleFn = void (*)(double, double*, std::size_t);
using MapFn = void (*)(const double*, double*, std::size_t);
using ReluBackwardFn = void (*)(const double*, const double*, double*,
                                std::size_t);

extern DotFn dot;
extern ReduceFn sum;
extern DotFn sq_dist;
extern AxpyFn axpy;
extern ScaleFn scale;
extern MapFn relu;
extern ReluBackwardFn relu_backward;

bool cpu_has_avx2();
// True when the dispatched entry points currently resolve to the AVX2 path.
bool dispatch_is_avx2();
// Test hook: pin the dispatch to the scalar path (or restore the default).
// TRANSFER_FORCE_SCALAR=1 in the environment does the same at startup.
void force_scalar(bool on);

}  // namespace transfer::kernels
