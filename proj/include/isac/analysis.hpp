#pragma once

#include "isac/channel.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // column-major

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[c * rows + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
};

struct DispersionSpec {
    double sigma2 = 1.0;  // E|alpha|²
    double f_B = 0.0;     // Hz
    double f_D = 0.0;     // Hz
    WaveformParams w;
};

// Power of an uncompensated PSK interferer over (fast-time bin, slow-time
// bin), unnormalized 2D DFT of one frame:
//   σ²·P·Lc·sin²(π(τ+f_B·T)/Lc) / sin²(π(τ+f_B·T)/(Mos·Lc)),
// flat along f.
RealMatrix interference_dispersion(const DispersionSpec& s, const std::vector<double>& tau_bins,
                                   const std::vector<double>& f_bins);

// Compensated echo: separable Dirichlet product centered on
// (f_B·T, f_D·T_CPI), peak σ²·P²·Lc²·Mos².
RealMatrix echo_dispersion(const DispersionSpec& s, const std::vector<double>& tau_bins,
                           const std::vector<double>& f_bins);

// Aligned interferer after symbol compensation, one frame, unit-delay
// model: γ·exp(j2π f_D T_PRI p)·exp(-j2π f_B m Ts)·I_C·conj(I_R)/|I_R|².
CMatrix synthesize_interferer(const WaveformParams& w, cd gamma, double f_B, double f_D,
                              const SymbolFrame& I_C, const SymbolFrame& I_R);
// Pure compensated echo γ·exp(j2π f_D T_PRI p)·exp(-j2π f_B m Ts).
CMatrix synthesize_echo(const WaveformParams& w, cd gamma, double f_B, double f_D);

// Monte-Carlo mean of Σ z(m,p)·conj(z(m-Δl, p-Δp)) for Δl in [0, max_dl],
// Δp in [0, max_dp] over random QPSK frames (rows Δl, cols Δp).
CMatrix autocorr_zC_bruteforce(const WaveformParams& w, const PropagationPath& path,
                               std::size_t frames, Rng& rng, std::size_t max_dl,
                               std::size_t max_dp);

struct ResolutionAccuracy {
    double resolution = 0.0;
    double accuracy = 0.0;
};
ResolutionAccuracy resolution_accuracy(const WaveformParams& w, double f_D_true, std::size_t Z_D);

// Sum over the Dirichlet-squared kernel; helpers shared with tests.
double dirichlet_sq_ratio(double x, double num_period, double den_period, double limit);

}  // namespace isac
