#pragma once

#include <cstddef>
#include <string>

namespace infodyn::kernels {

// Inner-product kernels behind the correlation and lag-window transforms.
// A scalar reference implementation always exists; on x86 an AVX2+FMA variant
// and on AArch64 a NEON variant are selected at runtime. Variants agree with
// the reference to relative 1e-13 (FMA reassociation changes rounding, so
// bit-equality is not promised) and the active variant is fixed for the whole
// process, keeping outputs machine-deterministic.
enum class Variant { kScalar, kAvx2, kNeon };

Variant active_variant();
std::string variant_name(Variant v);

// Test hook: force the scalar reference path for equivalence checks.
void force_scalar(bool on);

double dot_scalar(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

}  // namespace infodyn::kernels
