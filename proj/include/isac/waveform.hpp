#pragma once

#include "isac/types.hpp"

#include <cstdint>
#include <string>

namespace isac {

struct WaveformParams {
    double fc = 24e9;       // carrier (Hz)
    double B = 20e6;        // sweep bandwidth (Hz)
    double T = 100e-6;      // pulse duration (s)
    double T_PRI = 105e-6;  // pulse repetition interval (s)
    std::size_t P = 50;     // pulses per frame
    std::size_t Lc = 100;   // symbols per pulse
    std::size_t Mos = 8;    // samples per symbol

    double Tc() const { return T / static_cast<double>(Lc); }
    double Ts() const { return Tc() / static_cast<double>(Mos); }
    double Tg() const { return T_PRI - T; }
    double T_CPI() const { return static_cast<double>(P) * T_PRI; }
    double slope() const { return B / T; }
    double fs() const { return 1.0 / Ts(); }

    std::size_t samples_per_pulse() const { return Lc * Mos; }
    std::size_t samples_per_pri() const;
    std::size_t frame_samples() const { return P * samples_per_pri(); }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

enum class Modulation { BPSK, QPSK, PSK16, QAM16 };

Modulation parse_modulation(const std::string& s);
std::string modulation_name(Modulation m);

// Gray-mapped unit-energy constellation. points()[w] is the symbol of the
// bit word w, first bit most significant.
class Constellation {
public:
    explicit Constellation(Modulation m = Modulation::QPSK);

    Modulation kind() const { return kind_; }
    int bits_per_symbol() const { return bits_; }
    std::size_t size() const { return points_.size(); }
    const CVec& points() const { return points_; }
    bool unit_modulus() const { return kind_ != Modulation::QAM16; }

    // Minimum-distance decision; ties go to the lower index.
    std::size_t decide(cd z) const;
    // Max-log LLRs (positive favours bit 0) for a sample with complex
    // noise variance var around the points.
    void llr(cd z, double var, double* out) const;

private:
    Modulation kind_;
    int bits_;
    CVec points_;
};

CVec map_bits(const Bits& bits, const Constellation& c);
void word_to_bits(std::size_t word, int k, Bits& out);

struct SymbolFrame {
    CMatrix symbols;                 // Lc x P
    Constellation constellation;
    std::vector<std::uint8_t> pilot; // Lc*P, column-major like symbols

    std::size_t Lc() const { return symbols.rows; }
    std::size_t P() const { return symbols.cols; }
    bool is_pilot(std::size_t l, std::size_t p) const { return pilot[p * symbols.rows + l] != 0; }
};

// Pilot layout: pulse 0 entirely pilots, then `pilot_heads` leading symbols
// of every later pulse. Pilot values are a fixed pseudo-random sequence
// selected by `pilot_key`.
std::vector<std::uint8_t> pilot_mask(std::size_t Lc, std::size_t P, std::size_t pilot_heads);
std::size_t payload_count(std::size_t Lc, std::size_t P, std::size_t pilot_heads);

// Fill pilots and place `payload` (column-major over non-pilot cells).
SymbolFrame make_frame(std::size_t Lc, std::size_t P, const Constellation& c,
                       std::size_t pilot_heads, std::uint64_t pilot_key, const CVec& payload);
CVec payload_symbols(const SymbolFrame& f);

// exp(j(-πBt + π(B/T)t²)) at local pulse time t.
cd chirp_value(const WaveformParams& w, double t);

ComplexSignal chirp_train(const WaveformParams& w);
ComplexSignal payload(const SymbolFrame& f, const WaveformParams& w);
ComplexSignal pc_fmcw(const SymbolFrame& f, const WaveformParams& w);

// Continuous-time x(t) at absolute frame time t = u·Ts (u in samples).
// frame == nullptr gives the bare chirp train.
cd waveform_at(const SymbolFrame* f, const WaveformParams& w, double u);

CMatrix reshape_fast_slow(const ComplexSignal& s, const WaveformParams& w);
ComplexSignal flatten(const CMatrix& m, double Ts);

}  // namespace isac
