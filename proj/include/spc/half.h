#pragma once

#include <bit>
#include <cstdint>

namespace spc {

// IEEE-754 binary16 conversion, round to nearest even.
inline uint16_t
floatToHalf(float f)
{
  uint32_t x = std::bit_cast<uint32_t>(f);
  uint32_t sign = (x >> 16) & 0x8000u;
  uint32_t exp = (x >> 23) & 0xFFu;
  uint32_t mant = x & 0x7FFFFFu;

  if (exp == 0xFF)  // inf / nan
    return uint16_t(sign | 0x7C00u | (mant ? 0x200u : 0u));

  int e = int(exp) - 127 + 15;
  if (e >= 0x1F)
    return uint16_t(sign | 0x7C00u);

  if (e <= 0) {
    if (e < -10)
      return uint16_t(sign);
    mant |= 0x800000u;
    int shift = 14 - e;
    uint32_t h = mant >> shift;
    uint32_t rem = mant & ((1u << shift) - 1);
    uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (h & 1)))
      h++;
    return uint16_t(sign | h);
  }

  uint32_t h = uint32_t(e) << 10 | (mant >> 13);
  uint32_t rem = mant & 0x1FFFu;
  if (rem > 0x1000u || (rem == 0x1000u && (h & 1)))
    h++;  // may carry into the exponent, which is the correct result
  return uint16_t(sign | h);
}

inline float
halfToFloat(uint16_t h)
{
  uint32_t sign = uint32_t(h & 0x8000u) << 16;
  uint32_t exp = (h >> 10) & 0x1Fu;
  uint32_t mant = h & 0x3FFu;

  if (exp == 0) {
    if (mant == 0)
      return std::bit_cast<float>(sign);
    // subnormal: normalise
    int e = -1;
    do {
      mant <<= 1;
      e++;
    } while (!(mant & 0x400u));
    mant &= 0x3FFu;
    return std::bit_cast<float>(sign | uint32_t(127 - 15 - e) << 23 | mant << 13);
  }
  if (exp == 0x1F)
    return std::bit_cast<float>(sign | 0x7F800000u | mant << 13);
  return std::bit_cast<float>(sign | (exp - 15 + 127) << 23 | mant << 13);
}

inline double
roundToHalf(double x)
{
  return halfToFloat(floatToHalf(float(x)));
}

}  // namespace spc
