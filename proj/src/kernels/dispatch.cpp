#include <cassert>

#include "shcnn/error.hpp"
#include "shcnn/kernels.hpp"

namespace shcnn::kernels {

namespace {

struct Table {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*gemm)(std::size_t, std::size_t, std::size_t, const double*, std::size_t, const double*, std::size_t, double*,
               std::size_t);
};

constexpr Table kScalar{Backend::Scalar, scalar::dot, scalar::axpy, scalar::squared_distance, scalar::gemm};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{Backend::Avx2, avx2::dot, avx2::axpy, avx2::squared_distance, avx2::gemm};
#endif

const Table* detect() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
  return &kScalar;
}

const Table*& current() {
  static const Table* table = detect();
  return table;
}

}  // namespace

std::string_view to_string(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return current()->backend; }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw Error(ErrorCode::BadConfig, std::string("SIMD backend unavailable: ") + std::string(to_string(b)));
  }
#if defined(__x86_64__) || defined(_M_X64)
  current() = b == Backend::Avx2 ? &kAvx2 : &kScalar;
#else
  current() = &kScalar;
#endif
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current()->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current()->axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current()->squared_distance(a.data(), b.data(), a.size());
}

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
          std::size_t ldb, double* c, std::size_t ldc) {
  current()->gemm(m, n, k, a, lda, b, ldb, c, ldc);
}

}  // namespace shcnn::kernels
