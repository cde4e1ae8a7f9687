#pragma once

#include "isac/waveform.hpp"

#include <random>

namespace isac {

using Rng = std::mt19937_64;

struct PropagationPath {
    cd alpha{1.0, 0.0};
    double tau = 0.0;  // s
    double f_D = 0.0;  // Hz
};

struct CommLink {
    PropagationPath path;
    SymbolFrame frame;
};

// How a path's delay is realized on the sample grid.
//  Analytic: x(t - tau) evaluated from the waveform definition, exact at
//            any sample rate (the PC-FMCW chirp is not band-limited to fs
//            when fs < B).
//  Spectral: phase ramp on the zero-padded frame spectrum (apply_path).
enum class DelayModel { Analytic, Spectral };

struct Scenario {
    std::vector<PropagationPath> radar_paths;
    std::vector<CommLink> comm_links;
    double noise_sigma2 = 0.0;
    std::uint64_t rng_seed = 0;
    DelayModel delay_model = DelayModel::Analytic;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    double norm() const;
};

struct VehicleState {
    Vec2 p_C;              // roadside unit (m)
    Vec2 p_R;              // target at step 0 (m)
    double v = 15.0;       // radial closing speed (m/s)
    double rho = 1.0;      // reflection coefficient
    double delta_t = 66.6e-3;
};

struct LinkPair {
    PropagationPath comm;
    PropagationPath radar;
};

// alpha·exp(j2π f_D t)·x(t - tau) with the fractional delay applied as a
// phase ramp on the zero-padded frame spectrum.
ComplexSignal apply_path(const ComplexSignal& x, const PropagationPath& path);

// Same operator evaluated directly on the continuous waveform of `frame`.
ComplexSignal propagate(const SymbolFrame& frame, const WaveformParams& w,
                        const PropagationPath& path);
void accumulate_path(CVec& acc, const SymbolFrame& frame, const WaveformParams& w,
                     const PropagationPath& path);

void add_awgn(CVec& x, double sigma2, Rng& rng);

ComplexSignal superpose(const Scenario& sc, const SymbolFrame& tx_frame, const WaveformParams& w);

// Target position after n steps along the line of sight (closing for v>0).
Vec2 target_position(const VehicleState& s, std::size_t n);
LinkPair vehicular_link(const VehicleState& s, std::size_t n, double fc);
double radar_sir(const VehicleState& s, std::size_t n = 0);

}  // namespace isac
