#pragma once

#include "isac/channel.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct CommConfig {
    Constellation constellation{Modulation::QPSK};
    std::size_t pilot_heads = 2;
    std::uint64_t pilot_key = 1;
    bool coded = false;             // convolutional code, QPSK only
    std::size_t interleave_rows = 0;
    std::size_t max_lag = 0;        // 0: one PRI
};

struct CommEstimate {
    double tau_hat = 0.0;     // s, fractional
    std::size_t lag = 0;      // integer timing from time_sync
    double f_D_hat = 0.0;     // Hz, slow-time Doppler
    double nu_hat = 0.0;      // Hz, residual tone inside a pulse
    cd alpha_hat;             // channel gain consistent with (tau_hat, f_D_hat)
    cd beta_hat;              // equalizer gain on soft symbols
    double noise_var = 0.0;   // soft-symbol noise variance
    CMatrix soft;             // Lc x P
    SymbolFrame decided;      // decided frame, pilots restored
    Bits decided_bits;        // payload bits (information bits if coded)
};

// Reference frame holding the known pilots (payload cells zero).
SymbolFrame pilot_reference(const WaveformParams& w, const CommConfig& cfg);
// Pilot pulse waveform: chirp times pilot symbols over [0, T).
ComplexSignal pilot_waveform(const SymbolFrame& ref, const WaveformParams& w);

// Integer lag in [0, max_lag] maximizing the cross-correlation with the
// pilot pulse, the correlation being taken jointly over a residual tone
// grid (a fractional delay d of a chirp appears as a beat (B/T)·d).
// Ties go to the smaller lag. Throws NumericError when r has no energy.
std::size_t time_sync(const ComplexSignal& r, const SymbolFrame& ref, const WaveformParams& w,
                      std::size_t max_lag, double* metric = nullptr);

CMatrix comm_dechirp(const ComplexSignal& r, std::size_t lag, const WaveformParams& w);

// Tone left inside pulse 0 after pilot removal.
double intra_pulse_tone(const CMatrix& y, const SymbolFrame& ref, const WaveformParams& w);

// Lag-one slow-time pilot autocorrelation, refined on the slow-time pilot
// periodogram. Falls back to `fallback` when no pilot pairs exist.
double cfo_estimate(const CMatrix& y, const SymbolFrame& ref, const WaveformParams& w,
                    double fallback = 0.0, bool refine = true);

// Derotate by f_D·p·T_PRI across pulses and nu·t inside pulses, then
// integrate-and-dump over each symbol.
CMatrix demod(const CMatrix& y, const WaveformParams& w, double f_D_hat, double nu_hat);
inline CMatrix demod(const CMatrix& y, const WaveformParams& w, double f_D_hat)
{
    return demod(y, w, f_D_hat, f_D_hat);
}

struct Decisions {
    std::vector<std::size_t> index;  // per cell, column-major
    CMatrix hard;
};
Decisions equalize_and_decide(const CMatrix& soft, cd alpha_hat, const Constellation& c);
// Max-log LLRs per cell, bits_per_symbol values each, column-major cells.
std::vector<double> equalize_llr(const CMatrix& soft, cd alpha_hat, double noise_var,
                                 const Constellation& c);

CommEstimate comm_receive(const ComplexSignal& r, const WaveformParams& w, const CommConfig& cfg,
                          const SymbolFrame& ref);

// Transmit-side helpers shared with the harness.
struct CommPayload {
    Bits bits;        // information bits counted for BER
    SymbolFrame frame;
};
std::size_t info_bit_count(const WaveformParams& w, const CommConfig& cfg);
CommPayload build_payload(const Bits& info, const WaveformParams& w, const CommConfig& cfg);

}  // namespace isac
