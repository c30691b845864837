#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the CNN, the MLP and the kernel SVM.
// Each kernel has a portable scalar reference and an AVX2+FMA variant; the
// variant is picked once at startup from CPUID and can be overridden (tests
// pin both to check equivalence).
namespace shcnn::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);

bool backend_available(Backend b);
Backend active_backend();
// Throws Error(BadConfig) if the backend is not supported on this CPU.
void set_backend(Backend b);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b);
// C (m x n) += A (m x k) * B (k x n); row-major with leading dimensions.
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
          std::size_t ldb, double* c, std::size_t ldc);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
          std::size_t ldb, double* c, std::size_t ldc);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
          std::size_t ldb, double* c, std::size_t ldc);
}  // namespace avx2
#endif

}  // namespace shcnn::kernels
