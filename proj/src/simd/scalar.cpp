#include <cmath>
#include <numbers>

#include "erupt/simd/kernels.hpp"

namespace erupt::simd::scalar
{
void squaredDistances(const double* query, const double* soa, std::size_t stride, std::size_t count, std::size_t dim,
                      const std::uint8_t* wrap, double* out)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double inv_two_pi = 1.0 / two_pi;
  for (std::size_t i = 0; i < count; ++i)
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
  for (std::size_t i = 0; i < count; ++i)
  {
    bool hit = true;
    for (int axis = 0; axis < 3; ++axis)
      hit = hit && query[axis] <= bounds[axis + 3][i] && bounds[axis][i] <= query[axis + 3];
    out[i] = hit ? 1 : 0;
  }
}

}  // namespace erupt::simd::scalar
