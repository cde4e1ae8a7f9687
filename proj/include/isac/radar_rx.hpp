#pragma once

#include "isac/channel.hpp"
#include "isac/waveform.hpp"

#include <optional>

namespace isac {

struct DelayDopplerMap {
    CMatrix values;          // (Mos·Lc·(1+Z_f)) x (P·(1+Z_D))
    double beat_step = 0.0;  // Hz per fast-time bin
    double doppler_step = 0.0;
    std::size_t Z_f = 0;
    std::size_t Z_D = 0;

    std::size_t fast_bins() const { return values.rows; }
    std::size_t slow_bins() const { return values.cols; }
    // Signed axis values (bins above N/2 wrap to negative frequencies).
    double beat_hz(std::size_t k) const;
    double doppler_hz(std::size_t j) const;
};

struct Detection {
    std::size_t beat_bin = 0;
    std::size_t doppler_bin = 0;
    cd peak;
    double power = 0.0;
    double noise = 0.0;  // CFAR noise level estimate
    PropagationPath est_path;
    bool valid = false;  // tau within [0, Tg]
};

struct CfarConfig {
    std::size_t half_window = 8;  // training half-width, guard included
    std::size_t half_guard = 2;

    std::size_t training_cells() const;
};

// Inclusive signed fast-time bin range evaluated by the detector.
struct CfarRegion {
    long lo = 0;
    long hi = 0;
};

struct CfarResult {
    std::vector<Detection> detections;  // merged, strongest first
    std::size_t flagged = 0;            // cells above threshold before merging
    std::size_t evaluated = 0;
};

struct RadarConfig {
    double Pfa = 1e-4;
    std::size_t Z_f = 0;
    std::size_t Z_D = 0;
    CfarConfig cfar;
    double f_margin = -1.0;   // <0: 2/T
    bool refine_beat = true;  // sub-bin fast-time search around the peak
};

double lpf_cutoff(const WaveformParams& w, double f_margin);

// Per-pulse product with the conjugate chirp over the pulse window
// [0, T) of each PRI, then an ideal low-pass at f_cut.
CMatrix dechirp(const ComplexSignal& r, const WaveformParams& w, double f_margin = -1.0);
CMatrix dechirp_raw(const ComplexSignal& r, const WaveformParams& w);
void lowpass(CMatrix& y, const WaveformParams& w, double f_cut);

CMatrix group_delay_filter(const CMatrix& y, const WaveformParams& w);
CMatrix compensate_symbols(const CMatrix& y, const SymbolFrame& f, std::size_t Mos);
DelayDopplerMap delay_doppler(const CMatrix& z, const WaveformParams& w, std::size_t Z_f,
                              std::size_t Z_D);

double cfar_threshold_factor(std::size_t N, double Pfa);
CfarRegion default_region(const WaveformParams& w, std::size_t Z_f, double f_margin);
CfarResult cfar_detect(const DelayDopplerMap& map, double Pfa, const CfarConfig& cfg = {},
                       std::optional<CfarRegion> region = std::nullopt);

// Bin-center estimate. valid (if given) reports tau in [0, Tg].
PropagationPath estimate_params(const Detection& d, const DelayDopplerMap& map,
                                const WaveformParams& w, bool* valid = nullptr);

// Maps a (beat, Doppler, compensated gain) triple back to a path. The gain
// is the one left after the group-delay filter.
PropagationPath path_from_beat(double f_B, double f_D, cd gamma, const WaveformParams& w);

struct BeatFit {
    double f_B = 0.0;
    cd gamma;
};
// Fast-time tone search of the compensated matrix at Doppler f_D,
// within ±half_width of f_B0.
BeatFit refine_beat(const CMatrix& z, const WaveformParams& w, double f_D, double f_B0,
                    double half_width);

struct RadarResult {
    CMatrix z;  // compensated fast/slow samples
    DelayDopplerMap map;
    CfarResult cfar;
};

RadarResult radar_process(const ComplexSignal& r, const SymbolFrame& tx, const WaveformParams& w,
                          const RadarConfig& cfg);

// Strongest valid detection turned into a path estimate.
std::optional<PropagationPath> best_path(const RadarResult& res, const WaveformParams& w,
                                         const RadarConfig& cfg);

}  // namespace isac
