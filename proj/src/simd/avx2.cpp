// Compiled with -mavx2; only called after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "erupt/simd/kernels.hpp"

namespace erupt::simd::avx2
{
void squaredDistances(const double* query, const double* soa, std::size_t stride, std::size_t count, std::size_t dim,
                      const std::uint8_t* wrap, double* out)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double inv_two_pi = 1.0 / two_pi;
  const __m256d v_two_pi = _mm256_set1_pd(two_pi);
  const __m256d v_inv = _mm256_set1_pd(inv_two_pi);

  std::size_t i = 0;
  for (; i + 4 <= count; i += 4)
  {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d)
    {
      __m256d diff = _mm256_sub_pd(_mm256_set1_pd(query[d]), _mm256_loadu_pd(soa + d * stride + i));
      if (wrap[d])
      {
        __m256d turns = _mm256_round_pd(_mm256_mul_pd(diff, v_inv), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
        diff = _mm256_sub_pd(diff, _mm256_mul_pd(v_two_pi, turns));
      }
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (i < count)
  {
    // Tail: same operation order as the scalar kernel, offset into the arrays.
    for (; i < count; ++i)
    {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d)
      {
        double diff = query[d] - soa[d * stride + i];
        if (wrap[d])
          diff = diff - two_pi * std::nearbyint(diff * inv_two_pi);
        acc = acc + diff * diff;
      }
      out[i] = acc;
    }
  }
}

void aabbOverlap(const double* query, const double* const* bounds, std::size_t count, std::uint8_t* out)
{
  __m256d qmin[3], qmax[3];
  for (int axis = 0; axis < 3; ++axis)
  {
    qmin[axis] = _mm256_set1_pd(query[axis]);
    qmax[axis] = _mm256_set1_pd(query[axis + 3]);
  }
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4)
  {
    __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    for (int axis = 0; axis < 3; ++axis)
    {
      __m256d bmin = _mm256_loadu_pd(bounds[axis] + i);
      __m256d bmax = _mm256_loadu_pd(bounds[axis + 3] + i);
      mask = _mm256_and_pd(mask, _mm256_cmp_pd(qmin[axis], bmax, _CMP_LE_OQ));
      mask = _mm256_and_pd(mask, _mm256_cmp_pd(bmin, qmax[axis], _CMP_LE_OQ));
    }
    const int bits = _mm256_movemask_pd(mask);
    for (int k = 0; k < 4; ++k)
      out[i + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>((bits >> k) & 1);
  }
  for (; i < count; ++i)
  {
    bool hit = true;
    for (int axis = 0; axis < 3; ++axis)
      hit = hit && query[axis] <= bounds[axis + 3][i] && bounds[axis][i] <= query[axis + 3];
    out[i] = hit ? 1 : 0;
  }
}

}  // namespace erupt::simd::avx2
