#pragma once

#include <cstddef>

// Inner-loop arithmetic kernels. Scalar reference implementations always
// exist; AVX2 variants are selected at runtime when the CPU supports them.
// All kernels operate on contiguous double arrays.
namespace jffra::kernels {

struct KernelTable {
    double (*dot)(const double* a, const double* b, size_t n);
    void (*axpy)(double alpha, const double* x, double* y, size_t n);
    double (*sad)(const double* a, const double* b, size_t n);
    double (*sum)(const double* a, size_t n);
    const char* name;
};

// Scalar reference kernels (always available, used by equivalence tests).
namespace scalar {
double dot(const double* a, const double* b, size_t n);
void axpy(double alpha, const double* x, double* y, size_t n);
double sad(const double* a, const double* b, size_t n);
double sum(const double* a, size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, size_t n);
void axpy(double alpha, const double* x, double* y, size_t n);
double sad(const double* a, const double* b, size_t n);
double sum(const double* a, size_t n);
}  // namespace avx2
#endif

// Active table, resolved once at startup. Override with JFFRA_KERNELS=scalar.
const KernelTable& active();

inline double dot(const double* a, const double* b, size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, size_t n) { active().axpy(alpha, x, y, n); }
inline double sad(const double* a, const double* b, size_t n) { return active().sad(a, b, n); }
inline double sum(const double* a, size_t n) { return active().sum(a, n); }

}  // namespace jffra::kernels
