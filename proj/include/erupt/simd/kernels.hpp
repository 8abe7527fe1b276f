#pragma once

// Batch kernels for the hot inner loops of the planners and the collision
// broad phase. Every kernel has a scalar reference implementation; vector
// variants (AVX2 on x86-64, NEON on AArch64) are selected at runtime and must
// produce bit-identical results to the scalar path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace erupt::simd
{
enum class Isa
{
  Scalar,
  Avx2,
  Neon,
};

std::string_view isaName(Isa isa);

/// Squared joint-space distances from `query` to `count` states stored
/// structure-of-arrays: coordinate d of state i lives at soa[d * stride + i].
/// Dimensions flagged in `wrap` use the shortest arc on the circle.
using SquaredDistancesFn = void (*)(const double* query, const double* soa, std::size_t stride, std::size_t count,
                                    std::size_t dim, const std::uint8_t* wrap, double* out);

/// out[i] = 1 when box i overlaps the query box (closed intervals), else 0.
/// `query` is {min_x, min_y, min_z, max_x, max_y, max_z}; `bounds` holds six
/// arrays in the same order.
using AabbOverlapFn = void (*)(const double* query, const double* const* bounds, std::size_t count,
                               std::uint8_t* out);

struct KernelTable
{
  Isa isa;
  SquaredDistancesFn squared_distances;
  AabbOverlapFn aabb_overlap;
};

/// Table for a specific ISA, or nullptr when it is not compiled in or not
/// supported by this CPU.
const KernelTable* kernelTable(Isa isa);

/// Best supported table. ERUPT_SIMD=scalar|avx2|neon overrides the choice
/// (falling back to scalar when the requested ISA is unavailable).
const KernelTable& activeKernels();

namespace scalar
{
void squaredDistances(const double* query, const double* soa, std::size_t stride, std::size_t count, std::size_t dim,
                      const std::uint8_t* wrap, double* out);
void aabbOverlap(const double* query, const double* const* bounds, std::size_t count, std::uint8_t* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define ERUPT_SIMD_HAVE_AVX2 1
namespace avx2
{
void squaredDistances(const double* query, const double* soa, std::size_t stride, std::size_t count, std::size_t dim,
                      const std::uint8_t* wrap, double* out);
void aabbOverlap(const double* query, const double* const* bounds, std::size_t count, std::uint8_t* out);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define ERUPT_SIMD_HAVE_NEON 1
namespace neon
{
void squaredDistances(const double* query, const double* soa, std::size_t stride, std::size_t count, std::size_t dim,
                      const std::uint8_t* wrap, double* out);
void aabbOverlap(const double* query, const double* const* bounds, std::size_t count, std::uint8_t* out);
}  // namespace neon
#endif

}  // namespace erupt::simd
