#include <cstdlib>
#include <string>

#include "erupt/simd/kernels.hpp"

namespace erupt::simd
{
std::string_view isaName(Isa isa)
{
  switch (isa)
  {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

namespace
{
constexpr KernelTable kScalar{ Isa::Scalar, &scalar::squaredDistances, &scalar::aabbOverlap };
#ifdef ERUPT_SIMD_HAVE_AVX2
constexpr KernelTable kAvx2{ Isa::Avx2, &avx2::squaredDistances, &avx2::aabbOverlap };
#endif
#ifdef ERUPT_SIMD_HAVE_NEON
constexpr KernelTable kNeon{ Isa::Neon, &neon::squaredDistances, &neon::aabbOverlap };
#endif

const KernelTable& selectKernels()
{
  const char* env = std::getenv("ERUPT_SIMD");
  if (env)
  {
    const std::string requested(env);
    for (Isa isa : { Isa::Scalar, Isa::Avx2, Isa::Neon })
      if (requested == isaName(isa))
        if (const KernelTable* t = kernelTable(isa))
          return *t;
    return kScalar;
  }
  for (Isa isa : { Isa::Avx2, Isa::Neon })
    if (const KernelTable* t = kernelTable(isa))
      return *t;
  return kScalar;
}
}  // namespace

const KernelTable* kernelTable(Isa isa)
{
  switch (isa)
  {
    case Isa::Scalar:
      return &kScalar;
    case Isa::Avx2:
#ifdef ERUPT_SIMD_HAVE_AVX2
      if (__builtin_cpu_supports("avx2"))
        return &kAvx2;
#endif
      return nullptr;
    case Isa::Neon:
#ifdef ERUPT_SIMD_HAVE_NEON
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& activeKernels()
{
  static const KernelTable& table = selectKernels();
  return table;
}

}  // namespace erupt::simd
