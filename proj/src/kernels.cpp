#include "jffra/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace jffra::kernels {

namespace scalar {

double dot(const double* a, const double* b, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sad(const double* a, const double* b, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

double sum(const double* a, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

}  // namespace scalar

static KernelTable make_scalar_table() {
    return KernelTable{scalar::dot, scalar::axpy, scalar::sad, scalar::sum, "scalar"};
}

#if defined(__x86_64__) || defined(_M_X64)
static KernelTable make_avx2_table() {
    return KernelTable{avx2::dot, avx2::axpy, avx2::sad, avx2::sum, "avx2"};
}
static bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

static KernelTable resolve() {
    const char* force = std::getenv("JFFRA_KERNELS");
    if (force && std::strcmp(force, "scalar") == 0) return make_scalar_table();
    // deterministic mode pins the reference kernels so results do not depend
    // on the host CPU's feature set
    const char* det = std::getenv("JFFRA_DETERMINISTIC");
    if (!force && det && std::strcmp(det, "1") == 0) return make_scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
    if (force && std::strcmp(force, "avx2") == 0) return make_avx2_table();
    if (cpu_has_avx2()) return make_avx2_table();
#endif
    return make_scalar_table();
}

const KernelTable& active() {
    static KernelTable table = resolve();
    return table;
}

}  // namespace jffra::kernels
