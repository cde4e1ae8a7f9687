#pragma once

#include "isac/cancellation.hpp"

#include <functional>
#include <map>
#include <string>

namespace isac {

enum class SweepAxis { SNR, EbN0, SIR, Step };

// Pseudo-structure run alongside the real ones: radar on the echo alone,
// communication on the link alone, same noise realization.
inline constexpr const char* kReferenceName = "free";

struct ExperimentConfig {
    WaveformParams w;

    // Static scenario (magnitudes; phases drawn per trial when random_phase)
    double alpha_R = 0.1;
    double tau_R = 0.1e-6;
    double f_DR = 1000.0;
    double alpha_C = 1.0;
    double tau_C = 0.25e-6;
    double f_DC = -300.0;
    bool random_phase = true;
    DelayModel delay_model = DelayModel::Analytic;

    // Trajectory
    bool dynamic = false;
    VehicleState vehicle;
    std::size_t steps = 20;

    std::vector<StructureKind> structures{StructureKind::CR};
    bool reference = false;  // add the "free" row

    SweepAxis axis = SweepAxis::SNR;
    std::vector<double> sweep{10.0};
    double snr_db = 10.0;   // comm Es/N0 when not swept
    double ebn0_db = 10.0;  // used when the axis is SIR or Step
    bool noise_from_ebn0 = false;

    std::size_t trials = 500;
    std::size_t Z_D = 0;
    std::size_t Z_f = 0;
    Modulation constellation = Modulation::QPSK;
    bool coded = false;
    std::size_t interleave_rows = 0;
    std::size_t pilot_heads = 2;
    double Pfa = 1e-4;
    bool ls_gain = true;
    bool oracle = false;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    // Noise-only false alarm runs
    std::size_t pfa_maps = 250;
    bool pfa_whole_map = true;

    // Throws ConfigError naming the field.
    void validate() const;
    RadarConfig radar_config() const;
    CommConfig comm_config() const;
};

// Flat `key = value` text, `#` comments. Durations take us/ms/s suffixes,
// frequencies hz/khz/mhz/ghz. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Parses "a:step:b" ranges or comma lists.
std::vector<double> parse_sweep(const std::string& s);

struct MetricRow {
    std::string structure;
    double sweep = 0.0;
    double pd = 0.0;
    double ber = 0.0;
    std::size_t detections = 0;
    std::size_t trials = 0;
    std::size_t bit_errors = 0;
    std::size_t bits = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;  // s, summed over trials

    // Trajectory rows
    bool has_dynamic = false;
    double sir_db = 0.0;
    double tau_r = 0.0;
    double alpha_r = 0.0;
    double track_tau_err = 0.0;  // max |τ̂ - τ| of the prediction, s
};

// Per-trial outcome, kept for exact comparisons between structures.
struct TrialRecord {
    std::size_t point = 0;
    std::size_t trial = 0;
    std::string structure;
    bool detected = false;
    std::size_t bit_errors = 0;
};

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// Noise variance per sample for the configured link and point.
double noise_variance(const ExperimentConfig& cfg, double snr_or_ebn0_db, bool is_ebn0,
                      double alpha_C_mag);

// Detection truth rule: a detection within ±1 unpadded bin of the true
// (beat, Doppler) cell.
bool detection_hits(const std::vector<Detection>& dets, const PropagationPath& truth,
                    const WaveformParams& w);

std::vector<MetricRow> run_sweep(const ExperimentConfig& cfg,
                                 std::vector<TrialRecord>* records = nullptr);
std::vector<MetricRow> run_dynamic(const ExperimentConfig& cfg,
                                   std::vector<TrialRecord>* records = nullptr);

struct PfaEstimate {
    double pfa = 0.0;
    std::size_t flagged = 0;
    std::size_t cells = 0;
};
PfaEstimate estimate_pfa(const ExperimentConfig& cfg);
// Same rate on a given list of maps.
PfaEstimate estimate_pfa(const std::vector<DelayDopplerMap>& maps, double Pfa,
                         const CfarConfig& cfar = {});

std::string csv_header(bool dynamic);
std::string format_rows(const std::vector<MetricRow>& rows);
void write_csv(const std::string& path, const std::vector<MetricRow>& rows);

}  // namespace isac
