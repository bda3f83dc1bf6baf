#include "signet/kernels.hpp"

namespace signet::kern {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

#if SIGNET_HAVE_AVX2
namespace detail {
bool avx2_supported();
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
double sqdist_avx2(const double* a, const double* b, std::size_t n);
}  // namespace detail
#endif

const std::vector<Variant>& variants() {
    static const std::vector<Variant> v = [] {
        std::vector<Variant> out;
        out.push_back({"scalar", &dot_scalar, &axpy_scalar, &sqdist_scalar});
#if SIGNET_HAVE_AVX2
        if (detail::avx2_supported())
            out.push_back({"avx2", &detail::dot_avx2, &detail::axpy_avx2,
                           &detail::sqdist_avx2});
#endif
        return out;
    }();
    return v;
}

const Variant& active() {
    static const Variant& chosen = variants().back();
    return chosen;
}

const char* active_isa() { return active().name; }

}  // namespace signet::kern
