#pragma once

#include <cstddef>
#include <vector>

// Dense inner-loop kernels for the trainer and evaluator. Scalar reference
// implementations are always available; wider variants (AVX2) are compiled in
// separate translation units and selected once at startup based on what the
// CPU supports. The reference kernels stay in the test surface so every
// variant can be equivalence-checked against them.
namespace signet::kern {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using SqdistFn = double (*)(const double*, const double*, std::size_t);

double dot_scalar(const double* a, const double* b, std::size_t n);
// y += a * x
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double sqdist_scalar(const double* a, const double* b, std::size_t n);

struct Variant {
    const char* name;
    DotFn dot;
    AxpyFn axpy;
    SqdistFn sqdist;
};

// Every variant compiled into this binary whose ISA the running CPU
// supports, scalar first.
const std::vector<Variant>& variants();

// The variant the dispatched entry points below are bound to.
const Variant& active();
const char* active_isa();

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}

inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}

inline double sqdist(const double* a, const double* b, std::size_t n) {
    return active().sqdist(a, b, n);
}

}  // namespace signet::kern
