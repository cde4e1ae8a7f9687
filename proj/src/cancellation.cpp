#include "isac/cancellation.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace isac {

StructureKind parse_structure(const std::string& s)
{
    std::string t;
    for (char ch : s)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (t == "noic") return StructureKind::NoIC;
    if (t == "cr") return StructureKind::CR;
    if (t == "rc") return StructureKind::RC;
    if (t == "rcr") return StructureKind::RCR;
    if (t == "crc") return StructureKind::CRC;
    if (t == "rcrc") return StructureKind::RCRC;
    if (t == "dyn-cr") return StructureKind::DynamicCR;
    if (t == "dyn-crc") return StructureKind::DynamicCRC;
    throw std::invalid_argument("unknown structure '" + s + "'");
}

std::string structure_name(StructureKind k)
{
    switch (k) {
    case StructureKind::NoIC: return "noic";
    case StructureKind::CR: return "cr";
    case StructureKind::RC: return "rc";
    case StructureKind::RCR: return "rcr";
    case StructureKind::CRC: return "crc";
    case StructureKind::RCRC: return "rcrc";
    case StructureKind::DynamicCR: return "dyn-cr";
    case StructureKind::DynamicCRC: return "dyn-crc";
    }
    return "?";
}

std::string structure_blocks(StructureKind k)
{
    switch (k) {
    case StructureKind::NoIC: return "";
    case StructureKind::CR: return "CR";
    case StructureKind::RC: return "RC";
    case StructureKind::RCR: return "RCR";
    case StructureKind::CRC: return "CRC";
    case StructureKind::RCRC: return "RCRC";
    case StructureKind::DynamicCR: return "PCR";
    case StructureKind::DynamicCRC: return "PCRC";
    }
    return "";
}

ComplexSignal reconstruct_comm(const CommEstimate& est, const WaveformParams& w)
{
    return propagate(est.decided, w, {est.alpha_hat, est.tau_hat, est.f_D_hat});
}

ComplexSignal reconstruct_radar(const PropagationPath& path_hat, const SymbolFrame& tx_frame,
                                const WaveformParams& w)
{
    return propagate(tx_frame, w, path_hat);
}

ComplexSignal subtract(const ComplexSignal& r, const ComplexSignal& r_hat)
{
    if (r.samples.size() != r_hat.samples.size()) throw std::invalid_argument("length mismatch in subtract");
    ComplexSignal out = r;
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] -= r_hat.samples[i];
    return out;
}

cd ls_gain(const CVec& y, const CVec& x)
{
    cd num{};
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += std::conj(x[i]) * y[i];
        den += std::norm(x[i]);
    }
    return den > 0 ? num / den : cd{};
}

namespace {

struct PipeState {
    std::optional<CVec> recon_R;
    std::optional<CVec> recon_C;
    std::vector<Detection> detections;
    std::optional<PropagationPath> radar_path;
    std::optional<CommEstimate> comm;
    std::vector<StageDiag> diag;
};

class Pipeline {
public:
    Pipeline(const ComplexSignal& r, const ReceiverContext& ctx) : r_(r), ctx_(ctx)
    {
        if (!ctx.tx_frame) throw std::invalid_argument("receiver context lacks the transmitted frame");
        if (ctx.comm_ref) {
            ref_ = *ctx.comm_ref;
        } else {
            ref_ = pilot_reference(ctx.w, ctx.comm);
        }
        PipeState init;
        if (ctx.oracle) {
            if (ctx.oracle->radar_path) init.recon_R = true_radar();
            if (ctx.oracle->comm_path && ctx.oracle->comm_frame) init.recon_C = true_comm();
        }
        memo_.emplace("", std::move(init));
    }

    const PipeState& state(const std::string& blocks)
    {
        auto it = memo_.find(blocks);
        if (it != memo_.end()) return it->second;
        const PipeState& prev = state(blocks.substr(0, blocks.size() - 1));
        PipeState next = step(prev, blocks.back());
        return memo_.emplace(blocks, std::move(next)).first->second;
    }

private:
    CVec true_radar() const
    {
        return reconstruct_radar(*ctx_.oracle->radar_path, *ctx_.tx_frame, ctx_.w).samples;
    }
    CVec true_comm() const
    {
        return propagate(*ctx_.oracle->comm_frame, ctx_.w, *ctx_.oracle->comm_path).samples;
    }

    ComplexSignal input_minus(const std::optional<CVec>& recon) const
    {
        if (!recon) return r_;
        ComplexSignal out = r_;
        for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] -= (*recon)[i];
        return out;
    }

    CVec radar_recon(PropagationPath& path, const ComplexSignal& in) const
    {
        PropagationPath unit = path;
        unit.alpha = 1.0;
        CVec tpl = reconstruct_radar(unit, *ctx_.tx_frame, ctx_.w).samples;
        if (ctx_.ls_gain) path.alpha = ls_gain(in.samples, tpl);
        for (auto& v : tpl) v *= path.alpha;
        return tpl;
    }

    PipeState step(const PipeState& prev, char block) const
    {
        PipeState s = prev;
        const bool oracle = ctx_.oracle != nullptr;
        if (block == 'R' || block == 'P') {
            ComplexSignal in = input_minus(prev.recon_C);
            s.diag.push_back({block, energy(in.samples) / static_cast<double>(in.samples.size())});
            std::optional<PropagationPath> path;
            if (block == 'R') {
                RadarResult rr = radar_process(in, *ctx_.tx_frame, ctx_.w, ctx_.radar);
                path = best_path(rr, ctx_.w, ctx_.radar);
                s.detections = std::move(rr.cfar.detections);
            } else {
                if (!ctx_.track) throw std::invalid_argument("dynamic structure requires a track state");
                PropagationPath p;
                p.tau = ctx_.track->tau_hat;
                p.f_D = ctx_.track->f_D_hat;
                p.alpha = ctx_.track->alpha_hat;
                path = p;
            }
            s.radar_path = path;
            if (oracle && ctx_.oracle->radar_path)
                s.recon_R = true_radar();
            else if (path)
                s.recon_R = radar_recon(*s.radar_path, in);
            else
                s.recon_R.reset();
        } else if (block == 'C') {
            ComplexSignal in = input_minus(prev.recon_R);
            s.diag.push_back({block, energy(in.samples) / static_cast<double>(in.samples.size())});
            CommEstimate est = comm_receive(in, ctx_.w, ctx_.comm, ref_);
            if (oracle && ctx_.oracle->comm_path && ctx_.oracle->comm_frame) {
                s.recon_C = true_comm();
            } else {
                PropagationPath unit{1.0, est.tau_hat, est.f_D_hat};
                CVec tpl = propagate(est.decided, ctx_.w, unit).samples;
                if (ctx_.ls_gain) est.alpha_hat = ls_gain(in.samples, tpl);
                for (auto& v : tpl) v *= est.alpha_hat;
                s.recon_C = std::move(tpl);
            }
            s.comm = std::move(est);
        } else {
            throw std::logic_error("unknown block");
        }
        return s;
    }

    const ComplexSignal& r_;
    const ReceiverContext& ctx_;
    SymbolFrame ref_;
    std::map<std::string, PipeState> memo_;
};

ReceiverOutput collect(StructureKind kind, Pipeline& pipe)
{
    ReceiverOutput out;
    out.kind = kind;
    if (kind == StructureKind::NoIC) {
        const PipeState& r = pipe.state("R");
        const PipeState& c = pipe.state("C");
        out.detections = r.detections;
        out.radar_path_hat = r.radar_path;
        out.comm = c.comm;
        out.diagnostics = r.diag;
        out.diagnostics.insert(out.diagnostics.end(), c.diag.begin(), c.diag.end());
        return out;
    }
    const PipeState& s = pipe.state(structure_blocks(kind));
    out.detections = s.detections;
    out.radar_path_hat = s.radar_path;
    out.comm = s.comm;
    out.diagnostics = s.diag;
    return out;
}

}  // namespace

ReceiverOutput run_structure(StructureKind kind, const ComplexSignal& r, const ReceiverContext& ctx)
{
    Pipeline pipe(r, ctx);
    return collect(kind, pipe);
}

std::vector<ReceiverOutput> run_structures(const std::vector<StructureKind>& kinds,
                                           const ComplexSignal& r, const ReceiverContext& ctx)
{
    Pipeline pipe(r, ctx);
    std::vector<ReceiverOutput> out;
    out.reserve(kinds.size());
    for (auto k : kinds) out.push_back(collect(k, pipe));
    return out;
}

TrackState track_update(const TrackState& ts, double delta_t, double fc, double Tg)
{
    TrackState n = ts;
    n.step = ts.step + 1;
    // Closing target: positive Doppler, shrinking delay.
    const double tau = ts.tau_hat - (delta_t / fc) * ts.f_D_hat;
    n.tau_hat = std::clamp(tau, 0.0, Tg);
    n.clamped = n.tau_hat != tau;
    return n;
}

}  // namespace isac
