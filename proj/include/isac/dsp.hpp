#pragma once

#include "isac/types.hpp"

namespace isac::dsp {

// |Σ x[m]·exp(sign·j2π f m dt)|, evaluated directly.
cd dtft(const cd* x, std::size_t n, double dt, double f, int sign);

// Frequency in [f_lo, f_hi] maximizing |dtft|: grid scan then golden
// section around the best grid point. `value` receives the DTFT there.
double tone_peak(const cd* x, std::size_t n, double dt, double f_lo, double f_hi, int sign,
                 cd* value = nullptr, int grid = 24);

std::size_t next_pow2(std::size_t n);

std::uint64_t splitmix(std::uint64_t x);

}  // namespace isac::dsp
