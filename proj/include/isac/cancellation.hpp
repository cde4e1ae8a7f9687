#pragma once

#include "isac/comm_rx.hpp"
#include "isac/radar_rx.hpp"

#include <optional>
#include <string>

namespace isac {

enum class StructureKind { NoIC, CR, RC, RCR, CRC, RCRC, DynamicCR, DynamicCRC };

StructureKind parse_structure(const std::string& s);
std::string structure_name(StructureKind k);
// Block letters in processing order; 'P' is the track prediction stage.
// NoIC has none (both functions on the raw frame).
std::string structure_blocks(StructureKind k);

struct TrackState {
    double tau_hat = 0.0;
    double f_D_hat = 0.0;
    cd alpha_hat;
    std::size_t step = 0;
    bool clamped = false;
};

// Ground truth handed to the reconstructions (perfect-knowledge runs).
struct OracleKnowledge {
    std::optional<PropagationPath> radar_path;
    std::optional<PropagationPath> comm_path;
    std::optional<SymbolFrame> comm_frame;
    Bits comm_bits;
};

struct ReceiverContext {
    WaveformParams w;
    const SymbolFrame* tx_frame = nullptr;  // own transmission
    RadarConfig radar;
    CommConfig comm;
    const SymbolFrame* comm_ref = nullptr;  // known pilots; built if null
    std::optional<TrackState> track;        // prediction for this frame
    const OracleKnowledge* oracle = nullptr;
    bool ls_gain = true;  // refit reconstruction gains on the block input
};

struct StageDiag {
    char block = '?';
    double input_power = 0.0;  // mean power of the block input
};

struct ReceiverOutput {
    StructureKind kind = StructureKind::NoIC;
    std::vector<Detection> detections;
    std::optional<PropagationPath> radar_path_hat;
    std::optional<CommEstimate> comm;
    std::vector<StageDiag> diagnostics;
};

ComplexSignal reconstruct_comm(const CommEstimate& est, const WaveformParams& w);
ComplexSignal reconstruct_radar(const PropagationPath& path_hat, const SymbolFrame& tx_frame,
                                const WaveformParams& w);
ComplexSignal subtract(const ComplexSignal& r, const ComplexSignal& r_hat);

// Least-squares complex gain g minimizing ‖y - g·x‖.
cd ls_gain(const CVec& y, const CVec& x);

ReceiverOutput run_structure(StructureKind kind, const ComplexSignal& r, const ReceiverContext& ctx);

// Several structures on the same frame; pipelines sharing a block prefix
// reuse its result, so outputs equal independent run_structure calls.
std::vector<ReceiverOutput> run_structures(const std::vector<StructureKind>& kinds,
                                           const ComplexSignal& r, const ReceiverContext& ctx);

TrackState track_update(const TrackState& ts, double delta_t, double fc, double Tg);

}  // namespace isac
