#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using cd = std::complex<double>;
using CVec = std::vector<cd>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

// Column-major complex matrix. Column p is one pulse / PRI.
struct CMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    CVec data;

    CMatrix() = default;
    CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    cd& operator()(std::size_t r, std::size_t c) { return data[c * rows + r]; }
    const cd& operator()(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
    cd* col(std::size_t c) { return data.data() + c * rows; }
    const cd* col(std::size_t c) const { return data.data() + c * rows; }
};

struct ComplexSignal {
    CVec samples;
    double sample_period = 0.0;
    double start_time = 0.0;

    std::size_t size() const { return samples.size(); }
};

// Bad user-facing configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical breakdown at run time (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double energy(const CVec& x);
double energy(const CMatrix& m);

}  // namespace isac
