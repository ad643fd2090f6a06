#include "hyfed/kernels.hpp"

#include <cmath>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#define HYFED_X86 1
#include <immintrin.h>
#else
#define HYFED_X86 0
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define HYFED_NEON 1
#include <arm_neon.h>
#else
#define HYFED_NEON 0
#endif

namespace hyfed::kernels {

namespace {

float dot_scalar(std::span<const float> a, std::span<const float> b) {
    float acc = 0.0f;
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

float squared_norm_scalar(std::span<const float> v) {
    float acc = 0.0f;
    for (float x : v) acc += x * x;
    return acc;
}

void scale_scalar(std::span<float> v, float factor) {
    for (float& x : v) x *= factor;
}

#if HYFED_X86

__attribute__((target("avx2,fma"))) float dot_avx2(std::span<const float> a,
                                                   std::span<const float> b) {
    const size_t n = a.size();
    const float* pa = a.data();
    const float* pb = b.data();
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(pa + i), _mm256_loadu_ps(pb + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(pa + i + 8), _mm256_loadu_ps(pb + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(pa + i), _mm256_loadu_ps(pb + i), acc0);
    }
    acc0 = _mm256_add_ps(acc0, acc1);
    __m128 lo = _mm256_castps256_ps128(acc0);
    __m128 hi = _mm256_extractf128_ps(acc0, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    float acc = _mm_cvtss_f32(lo);
    for (; i < n; ++i) acc += pa[i] * pb[i];
    return acc;
}

__attribute__((target("avx2,fma"))) float squared_norm_avx2(std::span<const float> v) {
    const size_t n = v.size();
    const float* p = v.data();
    __m256 acc = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 x = _mm256_loadu_ps(p + i);
        acc = _mm256_fmadd_ps(x, x, acc);
    }
    __m128 lo = _mm256_castps256_ps128(acc);
    __m128 hi = _mm256_extractf128_ps(acc, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    float out = _mm_cvtss_f32(lo);
    for (; i < n; ++i) out += p[i] * p[i];
    return out;
}

__attribute__((target("avx2"))) void scale_avx2(std::span<float> v, float factor) {
    const size_t n = v.size();
    float* p = v.data();
    const __m256 f = _mm256_set1_ps(factor);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(p + i, _mm256_mul_ps(_mm256_loadu_ps(p + i), f));
    }
    for (; i < n; ++i) p[i] *= factor;
}

bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#endif  // HYFED_X86

#if HYFED_NEON

float dot_neon(std::span<const float> a, std::span<const float> b) {
    const size_t n = a.size();
    const float* pa = a.data();
    const float* pb = b.data();
    float32x4_t acc = vdupq_n_f32(0.0f);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = vmlaq_f32(acc, vld1q_f32(pa + i), vld1q_f32(pb + i));
    }
    float out = vaddvq_f32(acc);
    for (; i < n; ++i) out += pa[i] * pb[i];
    return out;
}

float squared_norm_neon(std::span<const float> v) {
    const size_t n = v.size();
    const float* p = v.data();
    float32x4_t acc = vdupq_n_f32(0.0f);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t x = vld1q_f32(p + i);
        acc = vmlaq_f32(acc, x, x);
    }
    float out = vaddvq_f32(acc);
    for (; i < n; ++i) out += p[i] * p[i];
    return out;
}

void scale_neon(std::span<float> v, float factor) {
    const size_t n = v.size();
    float* p = v.data();
    const float32x4_t f = vdupq_n_f32(factor);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(p + i, vmulq_f32(vld1q_f32(p + i), f));
    }
    for (; i < n; ++i) p[i] *= factor;
}

#endif  // HYFED_NEON

struct KernelTable {
    Isa isa;
    float (*dot)(std::span<const float>, std::span<const float>);
    float (*squared_norm)(std::span<const float>);
    void (*scale)(std::span<float>, float);
};

constexpr KernelTable kScalarTable{Isa::Scalar, dot_scalar, squared_norm_scalar, scale_scalar};

KernelTable table_for(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return kScalarTable;
#if HYFED_X86
        case Isa::Avx2:
            return {Isa::Avx2, dot_avx2, squared_norm_avx2, scale_avx2};
#endif
#if HYFED_NEON
        case Isa::Neon:
            return {Isa::Neon, dot_neon, squared_norm_neon, scale_neon};
#endif
        default:
            throw std::runtime_error(std::string("kernel ISA unavailable on this machine: ") +
                                     isa_name(isa));
    }
}

KernelTable detect() {
#if HYFED_X86
    if (cpu_has_avx2()) return table_for(Isa::Avx2);
#endif
#if HYFED_NEON
    return table_for(Isa::Neon);
#endif
    return kScalarTable;
}

KernelTable& active() {
    static KernelTable table = detect();
    return table;
}

}  // namespace

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "?";
}

Isa active_isa() { return active().isa; }

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::Scalar};
#if HYFED_X86
    if (cpu_has_avx2()) out.push_back(Isa::Avx2);
#endif
#if HYFED_NEON
    out.push_back(Isa::Neon);
#endif
    return out;
}

void force_isa(Isa isa) { active() = table_for(isa); }

float dot(std::span<const float> a, std::span<const float> b) { return active().dot(a, b); }
float squared_norm(std::span<const float> v) { return active().squared_norm(v); }
void scale(std::span<float> v, float factor) { active().scale(v, factor); }

float dot_with(Isa isa, std::span<const float> a, std::span<const float> b) {
    return table_for(isa).dot(a, b);
}
float squared_norm_with(Isa isa, std::span<const float> v) {
    return table_for(isa).squared_norm(v);
}
void scale_with(Isa isa, std::span<float> v, float factor) { table_for(isa).scale(v, factor); }

float cosine(std::span<const float> a, std::span<const float> b) {
    const float na = squared_norm(a);
    const float nb = squared_norm(b);
    if (na <= 0.0f || nb <= 0.0f) return 0.0f;
    return dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

void normalize(std::span<float> v) {
    const float n2 = squared_norm(v);
    if (n2 <= 0.0f) return;
    scale(v, 1.0f / std::sqrt(n2));
}

}  // namespace hyfed::kernels
