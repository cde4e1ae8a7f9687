#pragma once

#include "isac/types.hpp"

namespace isac::fft {

// Unnormalized in-place DFTs backed by FFTW. sign = -1 is the forward
// transform exp(-j2πkn/N), sign = +1 the backward one.
// `howmany` transforms of length n; element stride `stride`, transform
// distance `dist`.
void transform(cd* data, int n, int howmany, int stride, int dist, int sign);

inline void forward(CVec& x) { transform(x.data(), static_cast<int>(x.size()), 1, 1, 0, -1); }
inline void backward(CVec& x) { transform(x.data(), static_cast<int>(x.size()), 1, 1, 0, +1); }

// Column transforms of a column-major matrix (each column length rows).
void columns(CMatrix& m, int sign);
// Row transforms (along the column index).
void rows(CMatrix& m, int sign);

// Signed frequency of DFT bin k for length n and sample period dt.
double bin_frequency(std::size_t k, std::size_t n, double dt);

}  // namespace isac::fft
