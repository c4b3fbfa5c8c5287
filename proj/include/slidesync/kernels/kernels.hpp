#pragma once

// Data-parallel inner loops. Each kernel has a portable scalar reference
// and an AVX2 variant; the variant is chosen once at startup from CPUID
// and can be pinned with SLIDESYNC_KERNELS=scalar|avx2 or force_backend().
//
// All variants produce bit-identical results: the scalar dot product
// accumulates in the same four interleaved lanes the vector code uses, and
// no fused multiply-add is emitted on either path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace slidesync::kernels {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend b);

bool backend_available(Backend b);
Backend active_backend();

/// Pins the dispatch table. Throws std::invalid_argument if the CPU lacks
/// the requested instruction set.
void force_backend(Backend b);

/// Levenshtein distance (unit insert/delete/substitute) over symbol ids.
std::size_t edit_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

double dot(std::span<const double> a, std::span<const double> b);

/// out[i] = scores[i] >= thresholds[i]. All three spans have equal length.
void threshold_mask(std::span<const double> scores, std::span<const double> thresholds,
                    std::span<std::uint8_t> out);

namespace scalar {
std::size_t edit_distance(const std::uint32_t* a, std::size_t n, const std::uint32_t* b, std::size_t m);
double dot(const double* a, const double* b, std::size_t n);
void threshold_mask(const double* scores, const double* thresholds, std::uint8_t* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
std::size_t edit_distance(const std::uint32_t* a, std::size_t n, const std::uint32_t* b, std::size_t m);
double dot(const double* a, const double* b, std::size_t n);
void threshold_mask(const double* scores, const double* thresholds, std::uint8_t* out, std::size_t n);
}  // namespace avx2

}  // namespace slidesync::kernels
