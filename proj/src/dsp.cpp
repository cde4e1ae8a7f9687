#include "isac/dsp.hpp"

#include <cmath>

namespace isac::dsp {

cd dtft(const cd* x, std::size_t n, double dt, double f, int sign)
{
    // Phasor recurrence, renormalized every 64 steps.
    const cd step = std::polar(1.0, sign * 2.0 * kPi * f * dt);
    cd rot(1.0, 0.0);
    cd acc(0.0, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        acc += x[m] * rot;
        rot *= step;
        if ((m & 63) == 63) rot = std::polar(1.0, sign * 2.0 * kPi * f * dt * (m + 1));
    }
    return acc;
}

double tone_peak(const cd* x, std::size_t n, double dt, double f_lo, double f_hi, int sign,
                 cd* value, int grid)
{
    auto mag = [&](double f) { return std::abs(dtft(x, n, dt, f, sign)); };
    const double h = (f_hi - f_lo) / grid;
    double best_f = f_lo;
    double best = -1.0;
    for (int i = 0; i <= grid; ++i) {
        const double f = f_lo + i * h;
        const double m = mag(f);
        if (m > best) {
            best = m;
            best_f = f;
        }
    }
    double a = best_f - h;
    double b = best_f + h;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = mag(c);
    double fd = mag(d);
    for (int it = 0; it < 40 && (b - a) > 1e-9 * (std::abs(best_f) + 1.0); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = mag(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = mag(d);
        }
    }
    double f = 0.5 * (a + b);
    if (mag(f) < best) f = best_f;
    if (value) *value = dtft(x, n, dt, f, sign);
    return f;
}

std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace isac::dsp
