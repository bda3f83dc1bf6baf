#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "signet/kernels.hpp"
#include "signet/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

using namespace signet;

namespace {

bool close(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& t : v) t = 2.0 * uniform01(rng) - 1.0;
    return v;
}

const std::vector<std::size_t> kLengths = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17,
                                           31, 33, 40, 63, 64, 65, 100, 128, 257};

}  // namespace

TEST_CASE("scalar kernels match hand values") {
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, 5.0, 6.0};
    CHECK(kern::dot_scalar(a, b, 3) == 32.0);
    CHECK(kern::dot_scalar(a, b, 0) == 0.0);
    CHECK(kern::sqdist_scalar(a, b, 3) == 27.0);
    CHECK(kern::sqdist_scalar(a, a, 3) == 0.0);

    double y[] = {1.0, 1.0, 1.0};
    kern::axpy_scalar(2.0, a, y, 3);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 5.0);
    CHECK(y[2] == 7.0);
}

TEST_CASE("variant table lists scalar first and the active variant last") {
    const auto& vs = kern::variants();
    REQUIRE(!vs.empty());
    CHECK(std::string(vs.front().name) == "scalar");
    CHECK(std::string(kern::active().name) == std::string(vs.back().name));
    CHECK(std::string(kern::active_isa()) == std::string(kern::active().name));
}

TEST_CASE("every variant agrees with the scalar reference on ragged lengths") {
    auto rng = make_rng(7, "kernel-equivalence");
    for (const auto& v : kern::variants()) {
        CAPTURE(v.name);
        for (std::size_t n : kLengths) {
            CAPTURE(n);
            const auto x = random_vec(rng, n);
            const auto y = random_vec(rng, n);
            const double alpha = 2.0 * uniform01(rng) - 1.0;

            CHECK(close(v.dot(x.data(), y.data(), n), kern::dot_scalar(x.data(), y.data(), n)));
            CHECK(close(v.sqdist(x.data(), y.data(), n),
                        kern::sqdist_scalar(x.data(), y.data(), n)));

            std::vector<double> got = y, want = y;
            v.axpy(alpha, x.data(), got.data(), n);
            kern::axpy_scalar(alpha, x.data(), want.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(got[i], want[i]));
        }
    }
}

TEST_CASE("dispatch helpers forward to the active variant") {
    auto rng = make_rng(19, "kernel-dispatch");
    const std::size_t n = 40;
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    const auto& v = kern::active();

    CHECK(kern::dot(x.data(), y.data(), n) == v.dot(x.data(), y.data(), n));
    CHECK(kern::sqdist(x.data(), y.data(), n) == v.sqdist(x.data(), y.data(), n));

    std::vector<double> got = y, want = y;
    kern::axpy(0.5, x.data(), got.data(), n);
    v.axpy(0.5, x.data(), want.data(), n);
    CHECK(std::memcmp(got.data(), want.data(), n * sizeof(double)) == 0);
}
