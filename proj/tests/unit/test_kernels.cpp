#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hyfed/kernels.hpp"
#include "hyfed/prng.hpp"

using namespace hyfed;
using namespace hyfed::kernels;

namespace {

std::vector<float> random_vec(SplitMix64& rng, size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.next_double() * 2.0 - 1.0);
    return v;
}

bool close(float a, float b, float tol) {
    return std::abs(a - b) <= tol * std::max(1.0f, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dot and squared norm on small vectors") {
    const std::vector<float> a = {1.0f, 2.0f, 2.0f};
    const std::vector<float> b = {3.0f, 0.0f, -1.0f};
    CHECK(dot(a, b) == doctest::Approx(1.0));
    CHECK(squared_norm(a) == doctest::Approx(9.0));
    CHECK(dot(std::span<const float>{}, std::span<const float>{}) == 0.0f);
}

TEST_CASE("cosine boundaries") {
    const std::vector<float> x = {1.0f, 0.0f};
    const std::vector<float> y = {0.0f, 1.0f};
    const std::vector<float> x2 = {2.0f, 0.0f};
    const std::vector<float> zero = {0.0f, 0.0f};
    CHECK(cosine(x, y) == doctest::Approx(0.0));
    CHECK(cosine(x, x2) == doctest::Approx(1.0));
    CHECK(cosine(x, zero) == 0.0f);
    CHECK(cosine(zero, zero) == 0.0f);
}

TEST_CASE("normalize produces unit length and leaves zero untouched") {
    std::vector<float> v = {3.0f, 4.0f};
    normalize(v);
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
    std::vector<float> z = {0.0f, 0.0f, 0.0f};
    normalize(z);
    CHECK(z == std::vector<float>{0.0f, 0.0f, 0.0f});
}

TEST_CASE("scale") {
    std::vector<float> v = {1.0f, -2.0f, 0.5f};
    scale(v, 2.0f);
    CHECK(v == std::vector<float>{2.0f, -4.0f, 1.0f});
}

TEST_CASE("every available isa matches the scalar reference") {
    const auto isas = available_isas();
    REQUIRE(!isas.empty());
    CHECK(isas.front() == Isa::Scalar);
    SplitMix64 rng(7);
    // Lengths straddling vector-register boundaries, including 0 and 1.
    const size_t lengths[] = {0, 1, 3, 7, 8, 9, 15, 16, 17, 31, 32, 33, 64, 67, 255, 256, 257};
    for (const Isa isa : isas) {
        CAPTURE(isa_name(isa));
        for (const size_t n : lengths) {
            const auto a = random_vec(rng, n);
            const auto b = random_vec(rng, n);
            CHECK(close(dot_with(isa, a, b), dot_with(Isa::Scalar, a, b), 1e-5f));
            CHECK(close(squared_norm_with(isa, a), squared_norm_with(Isa::Scalar, a), 1e-5f));
            auto v1 = a;
            auto v2 = a;
            scale_with(isa, v1, 0.37f);
            scale_with(Isa::Scalar, v2, 0.37f);
            CHECK(v1 == v2);
        }
    }
}

TEST_CASE("dispatched kernels agree with the active isa variant") {
    SplitMix64 rng(11);
    const auto a = random_vec(rng, 129);
    const auto b = random_vec(rng, 129);
    CHECK(dot(a, b) == dot_with(active_isa(), a, b));
    CHECK(squared_norm(a) == squared_norm_with(active_isa(), a));
}

TEST_CASE("force_isa switches and rejects unavailable isas") {
    const auto isas = available_isas();
    const Isa original = active_isa();
    for (const Isa isa : isas) {
        force_isa(isa);
        CHECK(active_isa() == isa);
    }
    force_isa(original);
#if !defined(__aarch64__)
    CHECK_THROWS_AS(force_isa(Isa::Neon), std::runtime_error);
    force_isa(original);
#endif
}

}  // TEST_SUITE
