#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Vector arithmetic kernels backing the dense-similarity paths (embedding
// dot products, norms, in-place scaling). Scalar reference implementations
// are always available; wider variants (AVX2 on x86-64, NEON on aarch64)
// are selected once at startup based on what the CPU reports. All variants
// of one kernel are equivalence-tested against the scalar reference.

namespace hyfed::kernels {

enum class Isa { Scalar = 0, Avx2 = 1, Neon = 2 };

const char* isa_name(Isa isa);

// The ISA the dispatcher resolved to for this process.
Isa active_isa();

// ISAs usable on this machine (always contains Scalar).
std::vector<Isa> available_isas();

// Force a specific ISA (tests); throws if unavailable on this machine.
void force_isa(Isa isa);

// Dispatched entry points.
float dot(std::span<const float> a, std::span<const float> b);
float squared_norm(std::span<const float> v);
void scale(std::span<float> v, float factor);

// Direct variant access for equivalence testing.
float dot_with(Isa isa, std::span<const float> a, std::span<const float> b);
float squared_norm_with(Isa isa, std::span<const float> v);
void scale_with(Isa isa, std::span<float> v, float factor);

// cosine = dot / (|a||b|); 0 when either norm is 0.
float cosine(std::span<const float> a, std::span<const float> b);

// Euclidean-normalize in place; all-zero vectors are left untouched.
void normalize(std::span<float> v);

}  // namespace hyfed::kernels
