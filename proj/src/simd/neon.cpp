#include <arm_neon.h>

#include <cmath>
#include <numbers>

#include "erupt/simd/kernels.hpp"

namespace erupt::simd::neon
{
void squaredDistances(const double* query, const double* soa, std::size_t stride, std::size_t count, std::size_t dim,
                      const std::uint8_t* wrap, double* out)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double inv_two_pi = 1.0 / two_pi;
  const float64x2_t v_two_pi = vdupq_n_f64(two_pi);
  const float64x2_t v_inv = vdupq_n_f64(inv_two_pi);

  std::size_t i = 0;
  for (; i + 2 <= count; i += 2)
  {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t d = 0; d < dim; ++d)
    {
      float64x2_t diff = vsubq_f64(vdupq_n_f64(query[d]), vld1q_f64(soa + d * stride + i));
      if (wrap[d])
      {
        float64x2_t turns = vrndnq_f64(vmulq_f64(diff, v_inv));
        diff = vsubq_f64(diff, vmulq_f64(v_two_pi, turns));
      }
      acc = vaddq_f64(acc, vmulq_f64(diff, diff));
    }
    vst1q_f64(out + i, acc);
  }
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

void aabbOverlap(const double* query, const double* const* bounds, std::size_t count, std::uint8_t* out)
{
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2)
  {
    uint64x2_t mask = vdupq_n_u64(~0ULL);
    for (int axis = 0; axis < 3; ++axis)
    {
      float64x2_t bmin = vld1q_f64(bounds[axis] + i);
      float64x2_t bmax = vld1q_f64(bounds[axis + 3] + i);
      mask = vandq_u64(mask, vcleq_f64(vdupq_n_f64(query[axis]), bmax));
      mask = vandq_u64(mask, vcleq_f64(bmin, vdupq_n_f64(query[axis + 3])));
    }
    out[i] = vgetq_lane_u64(mask, 0) ? 1 : 0;
    out[i + 1] = vgetq_lane_u64(mask, 1) ? 1 : 0;
  }
  for (; i < count; ++i)
  {
    bool hit = true;
    for (int axis = 0; axis < 3; ++axis)
      hit = hit && query[axis] <= bounds[axis + 3][i] && bounds[axis][i] <= query[axis + 3];
    out[i] = hit ? 1 : 0;
  }
}

}  // namespace erupt::simd::neon
