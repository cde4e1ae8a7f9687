#include "isac/harness.hpp"

#include "isac/coding.hpp"
#include "isac/dsp.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace isac {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s)
{
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

enum class Unit { Plain, Time, Freq };

double number_with_unit(const std::string& value, const std::string& field, Unit kind)
{
    const std::string v = trim(value);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(field + ": expected a number, got '" + value + "'");
    }
    const std::string unit = lower(trim(v.substr(used)));
    double scale = 1.0;
    if (!unit.empty()) {
        static const std::map<std::string, std::pair<Unit, double>> units = {
            {"ns", {Unit::Time, 1e-9}}, {"us", {Unit::Time, 1e-6}}, {"ms", {Unit::Time, 1e-3}},
            {"s", {Unit::Time, 1.0}},   {"hz", {Unit::Freq, 1.0}},  {"khz", {Unit::Freq, 1e3}},
            {"mhz", {Unit::Freq, 1e6}}, {"ghz", {Unit::Freq, 1e9}}, {"db", {Unit::Plain, 1.0}},
            {"m", {Unit::Plain, 1.0}},  {"m/s", {Unit::Plain, 1.0}},
        };
        auto it = units.find(unit);
        if (it == units.end()) throw ConfigError(field + ": unknown unit '" + unit + "'");
        if (it->second.first != kind) throw ConfigError(field + ": unit '" + unit + "' does not fit");
        scale = it->second.second;
    }
    if (!std::isfinite(x)) throw ConfigError(field + ": value must be finite");
    return x * scale;
}

std::size_t count_value(const std::string& value, const std::string& field)
{
    const double x = number_with_unit(value, field, Unit::Plain);
    if (x < 0 || x != std::floor(x)) throw ConfigError(field + ": expected a non-negative integer");
    return static_cast<std::size_t>(x);
}

bool bool_value(const std::string& value, const std::string& field)
{
    const std::string v = lower(trim(value));
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(field + ": expected a boolean");
}

Vec2 vec_value(const std::string& value, const std::string& field)
{
    const auto parts = split(value, ',');
    if (parts.size() != 2) throw ConfigError(field + ": expected 'x, y'");
    return {number_with_unit(parts[0], field, Unit::Plain), number_with_unit(parts[1], field, Unit::Plain)};
}

double db(double x) { return std::pow(10.0, x / 10.0); }

}  // namespace

std::vector<double> parse_sweep(const std::string& s)
{
    std::vector<double> out;
    const std::string t = trim(s);
    if (t.empty()) throw ConfigError("sweep: empty");
    if (t.find(':') != std::string::npos) {
        const auto p = split(t, ':');
        if (p.size() != 3) throw ConfigError("sweep: expected start:step:stop");
        const double a = number_with_unit(p[0], "sweep", Unit::Plain);
        const double d = number_with_unit(p[1], "sweep", Unit::Plain);
        const double b = number_with_unit(p[2], "sweep", Unit::Plain);
        if (!(d != 0) || (b - a) / d < 0) throw ConfigError("sweep: step does not reach stop");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / d + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(a + d * static_cast<double>(i));
    } else {
        for (const auto& p : split(t, ',')) out.push_back(number_with_unit(p, "sweep", Unit::Plain));
    }
    return out;
}

void ExperimentConfig::validate() const
{
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("waveform: ") + e.what());
    }
    if (trials < 1) throw ConfigError("trials: must be at least 1");
    if (sweep.empty() && !dynamic) throw ConfigError("sweep: no values");
    for (double v : sweep)
        if (!std::isfinite(v)) throw ConfigError("sweep: values must be finite");
    if (alpha_R < 0 || alpha_C < 0) throw ConfigError("alpha_R/alpha_C: magnitudes must be non-negative");
    if (tau_R < 0 || tau_C < 0) throw ConfigError("tau_R/tau_C: delays must be non-negative");
    if (!(Pfa > 0 && Pfa < 1)) throw ConfigError("Pfa: must lie in (0, 1)");
    if (coded && constellation != Modulation::QPSK) throw ConfigError("coded: requires qpsk");
    if (structures.empty() && !reference) throw ConfigError("structures: none selected");
    if (threads < 1) throw ConfigError("threads: must be at least 1");
    if (pilot_heads >= w.Lc) throw ConfigError("pilot_heads: must be below Lc");
    if (dynamic) {
        if (steps < 1) throw ConfigError("steps: must be at least 1");
        if (!(vehicle.delta_t > 0)) throw ConfigError("delta_t: must be positive");
        if (!(vehicle.p_R.norm() > 0) || !(vehicle.p_C.norm() > 0))
            throw ConfigError("p_R/p_C: positions must be away from the origin");
    }
    if (axis == SweepAxis::Step && !dynamic) throw ConfigError("sweep_axis: step needs a trajectory");
}

RadarConfig ExperimentConfig::radar_config() const
{
    RadarConfig rc;
    rc.Pfa = Pfa;
    rc.Z_D = Z_D;
    rc.Z_f = Z_f;
    return rc;
}

CommConfig ExperimentConfig::comm_config() const
{
    CommConfig cc;
    cc.constellation = Constellation(constellation);
    cc.pilot_heads = pilot_heads;
    cc.coded = coded;
    cc.interleave_rows = interleave_rows;
    return cc;
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    double Tg = -1.0;
    bool have_tpri = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string k = lower(key);
        auto T = [&](double& dst) { dst = number_with_unit(val, key, Unit::Time); };
        auto F = [&](double& dst) { dst = number_with_unit(val, key, Unit::Freq); };
        auto X = [&](double& dst) { dst = number_with_unit(val, key, Unit::Plain); };
        auto N = [&](std::size_t& dst) { dst = count_value(val, key); };

        if (k == "fc") F(cfg.w.fc);
        else if (k == "b") F(cfg.w.B);
        else if (k == "t") T(cfg.w.T);
        else if (k == "t_pri") { T(cfg.w.T_PRI); have_tpri = true; }
        else if (k == "tg") T(Tg);
        else if (k == "p") N(cfg.w.P);
        else if (k == "lc") N(cfg.w.Lc);
        else if (k == "mos") N(cfg.w.Mos);
        else if (k == "alpha_r") X(cfg.alpha_R);
        else if (k == "tau_r") T(cfg.tau_R);
        else if (k == "f_dr") F(cfg.f_DR);
        else if (k == "alpha_c") X(cfg.alpha_C);
        else if (k == "tau_c") T(cfg.tau_C);
        else if (k == "f_dc") F(cfg.f_DC);
        else if (k == "random_phase") cfg.random_phase = bool_value(val, key);
        else if (k == "delay_model") {
            const std::string v = lower(val);
            if (v == "analytic") cfg.delay_model = DelayModel::Analytic;
            else if (v == "spectral") cfg.delay_model = DelayModel::Spectral;
            else throw ConfigError(key + ": expected analytic or spectral");
        }
        else if (k == "dynamic") cfg.dynamic = bool_value(val, key);
        else if (k == "p_r") cfg.vehicle.p_R = vec_value(val, key);
        else if (k == "p_c") cfg.vehicle.p_C = vec_value(val, key);
        else if (k == "v") X(cfg.vehicle.v);
        else if (k == "rho") X(cfg.vehicle.rho);
        else if (k == "delta_t") T(cfg.vehicle.delta_t);
        else if (k == "steps") N(cfg.steps);
        else if (k == "structures") {
            cfg.structures.clear();
            cfg.reference = false;
            for (const auto& s : split(val, ',')) {
                if (lower(s) == kReferenceName) {
                    cfg.reference = true;
                    continue;
                }
                try {
                    cfg.structures.push_back(parse_structure(s));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(key + ": " + e.what());
                }
            }
        }
        else if (k == "sweep_axis") {
            const std::string v = lower(val);
            if (v == "snr") cfg.axis = SweepAxis::SNR;
            else if (v == "ebn0") cfg.axis = SweepAxis::EbN0;
            else if (v == "sir") cfg.axis = SweepAxis::SIR;
            else if (v == "step") cfg.axis = SweepAxis::Step;
            else throw ConfigError(key + ": expected snr, ebn0, sir or step");
        }
        else if (k == "sweep") cfg.sweep = parse_sweep(val);
        else if (k == "snr_db") { X(cfg.snr_db); cfg.noise_from_ebn0 = false; }
        else if (k == "ebn0_db") { X(cfg.ebn0_db); cfg.noise_from_ebn0 = true; }
        else if (k == "trials") N(cfg.trials);
        else if (k == "z_d") N(cfg.Z_D);
        else if (k == "z_f") N(cfg.Z_f);
        else if (k == "constellation") {
            try {
                cfg.constellation = parse_modulation(val);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(key + ": " + e.what());
            }
        }
        else if (k == "coded") cfg.coded = bool_value(val, key);
        else if (k == "interleave_rows") N(cfg.interleave_rows);
        else if (k == "pilot_heads") N(cfg.pilot_heads);
        else if (k == "pfa") X(cfg.Pfa);
        else if (k == "ls_gain") cfg.ls_gain = bool_value(val, key);
        else if (k == "oracle") cfg.oracle = bool_value(val, key);
        else if (k == "seed") {
            try {
                cfg.seed = std::stoull(val);
            } catch (const std::exception&) {
                throw ConfigError(key + ": expected an unsigned integer");
            }
        }
        else if (k == "threads") N(cfg.threads);
        else if (k == "pfa_maps") N(cfg.pfa_maps);
        else if (k == "pfa_whole_map") cfg.pfa_whole_map = bool_value(val, key);
        else throw ConfigError(key + ": unknown key");
    }
    if (Tg >= 0) {
        if (have_tpri && std::abs(cfg.w.T_PRI - (cfg.w.T + Tg)) > 1e-12)
            throw ConfigError("Tg: conflicts with T_PRI");
        cfg.w.T_PRI = cfg.w.T + Tg;
    }
    if (cfg.dynamic && cfg.axis != SweepAxis::Step) cfg.axis = SweepAxis::Step;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial)
{
    std::uint64_t h = dsp::splitmix(master);
    h = dsp::splitmix(h ^ (point * 0x9e3779b97f4a7c15ull));
    return dsp::splitmix(h ^ (trial + 0x632be59bd9b4e019ull));
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

namespace {

double es_over_ebn(const ExperimentConfig& cfg)
{
    const CommConfig cc = cfg.comm_config();
    const double k = cc.constellation.bits_per_symbol();
    double rate = 1.0;
    if (cfg.coded) {
        const double cells = static_cast<double>(payload_count(cfg.w.Lc, cfg.w.P, cfg.pilot_heads));
        rate = static_cast<double>(info_bit_count(cfg.w, cc)) / (cells * k);
    }
    return k * rate;
}

}  // namespace

double noise_variance(const ExperimentConfig& cfg, double value_db, bool is_ebn0, double alpha_C_mag)
{
    double esn0 = db(value_db);
    if (is_ebn0) esn0 *= es_over_ebn(cfg);
    const double a = alpha_C_mag > 0 ? alpha_C_mag : 1.0;
    return a * a * static_cast<double>(cfg.w.Mos) / esn0;
}

bool detection_hits(const std::vector<Detection>& dets, const PropagationPath& truth,
                    const WaveformParams& w)
{
    const double kb = (w.slope() * truth.tau - truth.f_D) * w.T;
    const double kd = truth.f_D * w.T_CPI();
    const double P = static_cast<double>(w.P);
    for (const auto& d : dets) {
        const double eb = (w.slope() * d.est_path.tau - d.est_path.f_D) * w.T;
        const double ed = d.est_path.f_D * w.T_CPI();
        double dd = std::fmod(std::abs(ed - kd), P);
        dd = std::min(dd, P - dd);
        if (std::abs(eb - kb) <= 1.0 + 1e-9 && dd <= 1.0 + 1e-9) return true;
    }
    return false;
}

namespace {

struct Outcome {
    bool detected = false;
    std::size_t bit_errors = 0;
};

struct TrialResult {
    std::vector<Outcome> per;  // structures, then reference
    std::size_t bits = 0;
    double seconds = 0.0;
};

struct Frames {
    CommPayload comm;
    SymbolFrame own;
};

Bits random_bits(std::size_t n, Rng& rng)
{
    Bits b(n);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) word = rng();
        b[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return b;
}

Frames draw_frames(const ExperimentConfig& cfg, const CommConfig& cc, Rng& rng)
{
    Frames f;
    f.comm = build_payload(random_bits(info_bit_count(cfg.w, cc), rng), cfg.w, cc);
    CommConfig own = cc;
    own.coded = false;
    own.pilot_key = 2;
    f.own = build_payload(random_bits(info_bit_count(cfg.w, own), rng), cfg.w, own).frame;
    return f;
}

std::size_t count_errors(const Bits& truth, const std::optional<CommEstimate>& est)
{
    if (!est) return truth.size();
    std::size_t e = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        e += (i >= est->decided_bits.size() || est->decided_bits[i] != truth[i]) ? 1 : 0;
    return e;
}

// Both functions on interference-free copies sharing the noise draw.
Outcome reference_outcome(const ExperimentConfig& cfg, const Scenario& sc, const Frames& fr,
                          const CommConfig& cc, const SymbolFrame& ref,
                          const std::optional<PropagationPath>& radar_truth)
{
    Outcome o;
    if (radar_truth) {
        Scenario s = sc;
        s.comm_links.clear();
        const ComplexSignal r = superpose(s, fr.own, cfg.w);
        const RadarResult rr = radar_process(r, fr.own, cfg.w, cfg.radar_config());
        o.detected = detection_hits(rr.cfar.detections, *radar_truth, cfg.w);
    }
    if (!sc.comm_links.empty()) {
        Scenario s = sc;
        s.radar_paths.clear();
        const ComplexSignal r = superpose(s, fr.own, cfg.w);
        o.bit_errors = count_errors(fr.comm.bits, comm_receive(r, cfg.w, cc, ref));
    }
    return o;
}

std::vector<std::string> row_names(const ExperimentConfig& cfg)
{
    std::vector<std::string> n;
    for (auto k : cfg.structures) n.push_back(structure_name(k));
    if (cfg.reference) n.emplace_back(kReferenceName);
    return n;
}

}  // namespace

std::vector<MetricRow> run_sweep(const ExperimentConfig& cfg, std::vector<TrialRecord>* records)
{
    cfg.validate();
    if (cfg.dynamic) return run_dynamic(cfg, records);
    const CommConfig cc = cfg.comm_config();
    const SymbolFrame ref = pilot_reference(cfg.w, cc);
    const std::size_t npts = cfg.sweep.size();
    const std::size_t units = npts * cfg.trials;
    std::vector<TrialResult> results(units);

    parallel_for(units, cfg.threads, [&](std::size_t u) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t point = u / cfg.trials;
        const std::size_t trial = u % cfg.trials;
        const double x = cfg.sweep[point];
        Rng rng(trial_seed(cfg.seed, point, trial));
        const Frames fr = draw_frames(cfg, cc, rng);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        const double phR = cfg.random_phase ? phase(rng) : 0.0;
        const double phC = cfg.random_phase ? phase(rng) : 0.0;

        double aR = cfg.alpha_R;
        double sigma2 = 0.0;
        switch (cfg.axis) {
        case SweepAxis::SNR: sigma2 = noise_variance(cfg, x, false, cfg.alpha_C); break;
        case SweepAxis::EbN0: sigma2 = noise_variance(cfg, x, true, cfg.alpha_C); break;
        case SweepAxis::SIR:
        case SweepAxis::Step:
            aR = (cfg.alpha_C > 0 ? cfg.alpha_C : 1.0) * std::pow(10.0, x / 20.0);
            sigma2 = cfg.noise_from_ebn0 ? noise_variance(cfg, cfg.ebn0_db, true, cfg.alpha_C)
                                         : noise_variance(cfg, cfg.snr_db, false, cfg.alpha_C);
            break;
        }

        Scenario sc;
        std::optional<PropagationPath> radar_truth;
        if (aR > 0) {
            radar_truth = PropagationPath{std::polar(aR, phR), cfg.tau_R, cfg.f_DR};
            sc.radar_paths.push_back(*radar_truth);
        }
        const PropagationPath comm_truth{std::polar(cfg.alpha_C, phC), cfg.tau_C, cfg.f_DC};
        if (cfg.alpha_C > 0) sc.comm_links.push_back({comm_truth, fr.comm.frame});
        sc.noise_sigma2 = sigma2;
        sc.rng_seed = rng();
        sc.delay_model = cfg.delay_model;
        const ComplexSignal r = superpose(sc, fr.own, cfg.w);

        OracleKnowledge ok;
        ReceiverContext ctx;
        ctx.w = cfg.w;
        ctx.tx_frame = &fr.own;
        ctx.radar = cfg.radar_config();
        ctx.comm = cc;
        ctx.comm_ref = &ref;
        ctx.ls_gain = cfg.ls_gain;
        if (cfg.oracle) {
            ok.radar_path = radar_truth;
            if (cfg.alpha_C > 0) {
                ok.comm_path = comm_truth;
                ok.comm_frame = fr.comm.frame;
                ok.comm_bits = fr.comm.bits;
            }
            ctx.oracle = &ok;
        }

        TrialResult tr;
        tr.bits = fr.comm.bits.size();
        if (!cfg.structures.empty()) {
            const auto outs = run_structures(cfg.structures, r, ctx);
            for (const auto& o : outs) {
                Outcome oc;
                oc.detected = radar_truth && detection_hits(o.detections, *radar_truth, cfg.w);
                oc.bit_errors = cfg.alpha_C > 0 ? count_errors(fr.comm.bits, o.comm) : 0;
                tr.per.push_back(oc);
            }
        }
        if (cfg.reference) tr.per.push_back(reference_outcome(cfg, sc, fr, cc, ref, radar_truth));
        tr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results[u] = std::move(tr);
    });

    const auto names = row_names(cfg);
    std::vector<MetricRow> rows;
    for (std::size_t s = 0; s < names.size(); ++s)
        for (std::size_t p = 0; p < npts; ++p) {
            MetricRow m;
            m.structure = names[s];
            m.sweep = cfg.sweep[p];
            m.trials = cfg.trials;
            m.seed = cfg.seed;
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                const TrialResult& tr = results[p * cfg.trials + t];
                const Outcome& o = tr.per[s];
                m.detections += o.detected ? 1 : 0;
                m.bit_errors += o.bit_errors;
                m.bits += cfg.alpha_C > 0 ? tr.bits : 0;
                m.wall_time += tr.seconds;
                if (records) records->push_back({p, t, names[s], o.detected, o.bit_errors});
            }
            m.pd = static_cast<double>(m.detections) / static_cast<double>(m.trials);
            m.ber = m.bits ? static_cast<double>(m.bit_errors) / static_cast<double>(m.bits) : 0.0;
            rows.push_back(m);
        }
    // Points keep their configured order within a structure; sort by value.
    std::stable_sort(rows.begin(), rows.end(), [&](const MetricRow& a, const MetricRow& b) {
        if (a.structure != b.structure) {
            const auto ia = std::find(names.begin(), names.end(), a.structure);
            const auto ib = std::find(names.begin(), names.end(), b.structure);
            return ia < ib;
        }
        return a.sweep < b.sweep;
    });
    return rows;
}

std::vector<MetricRow> run_dynamic(const ExperimentConfig& cfg, std::vector<TrialRecord>* records)
{
    cfg.validate();
    if (!cfg.dynamic) throw ConfigError("dynamic: config has no trajectory");
    const CommConfig cc = cfg.comm_config();
    const SymbolFrame ref = pilot_reference(cfg.w, cc);
    const WaveformParams& w = cfg.w;

    std::size_t steps = cfg.steps;
    {
        const double r0 = cfg.vehicle.p_R.norm();
        const double per = cfg.vehicle.v * cfg.vehicle.delta_t;
        if (per > 0) {
            const auto reach = static_cast<std::size_t>(std::ceil(r0 / per - 1e-12));
            if (reach < steps) {
                std::cerr << "notice: target reaches the radar at step " << reach
                          << ", trajectory truncated\n";
                steps = reach;
            }
        }
    }

    std::vector<StructureKind> fixed, dyn;
    for (auto k : cfg.structures)
        (k == StructureKind::DynamicCR || k == StructureKind::DynamicCRC ? dyn : fixed).push_back(k);

    struct StepOut {
        std::vector<Outcome> per;  // config order, then reference
        std::vector<double> track_err;  // per config structure (0 for fixed)
        std::size_t bits = 0;
        double seconds = 0.0;
    };
    std::vector<std::vector<StepOut>> results(cfg.trials, std::vector<StepOut>(steps));

    parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
        std::vector<std::optional<TrackState>> state(cfg.structures.size());
        for (std::size_t n = 0; n < steps; ++n) {
            const auto t0 = std::chrono::steady_clock::now();
            Rng rng(trial_seed(cfg.seed, n, trial));
            const Frames fr = draw_frames(cfg, cc, rng);
            const LinkPair lp = vehicular_link(cfg.vehicle, n, w.fc);
            const double aC = std::abs(lp.comm.alpha);
            Scenario sc;
            sc.radar_paths.push_back(lp.radar);
            sc.comm_links.push_back({lp.comm, fr.comm.frame});
            sc.noise_sigma2 = cfg.noise_from_ebn0 ? noise_variance(cfg, cfg.ebn0_db, true, aC)
                                                  : noise_variance(cfg, cfg.snr_db, false, aC);
            sc.rng_seed = rng();
            sc.delay_model = cfg.delay_model;
            const ComplexSignal r = superpose(sc, fr.own, w);

            ReceiverContext ctx;
            ctx.w = w;
            ctx.tx_frame = &fr.own;
            ctx.radar = cfg.radar_config();
            ctx.comm = cc;
            ctx.comm_ref = &ref;
            ctx.ls_gain = cfg.ls_gain;

            StepOut so;
            so.bits = fr.comm.bits.size();
            so.per.resize(cfg.structures.size());
            so.track_err.assign(cfg.structures.size(), 0.0);
            auto score = [&](std::size_t idx, const ReceiverOutput& o) {
                so.per[idx].detected = detection_hits(o.detections, lp.radar, w);
                so.per[idx].bit_errors = count_errors(fr.comm.bits, o.comm);
            };

            std::vector<ReceiverOutput> fixed_out;
            std::vector<StructureKind> run_fixed = fixed;
            const bool need_boot = n == 0 && !dyn.empty();
            if (need_boot && std::find(run_fixed.begin(), run_fixed.end(), StructureKind::CR) == run_fixed.end())
                run_fixed.push_back(StructureKind::CR);
            if (!run_fixed.empty()) fixed_out = run_structures(run_fixed, r, ctx);

            std::optional<PropagationPath> boot;
            if (need_boot) {
                for (std::size_t i = 0; i < run_fixed.size(); ++i)
                    if (run_fixed[i] == StructureKind::CR) boot = fixed_out[i].radar_path_hat;
            }

            for (std::size_t i = 0; i < cfg.structures.size(); ++i) {
                const StructureKind k = cfg.structures[i];
                const auto it = std::find(run_fixed.begin(), run_fixed.end(), k);
                if (it != run_fixed.end() && std::find(dyn.begin(), dyn.end(), k) == dyn.end()) {
                    score(i, fixed_out[static_cast<std::size_t>(it - run_fixed.begin())]);
                    continue;
                }
                TrackState pred;
                if (n == 0) {
                    if (boot) {
                        pred.tau_hat = std::clamp(boot->tau, 0.0, w.Tg());
                        pred.f_D_hat = boot->f_D;
                        pred.alpha_hat = boot->alpha;
                    }
                } else if (state[i]) {
                    pred = track_update(*state[i], cfg.vehicle.delta_t, w.fc, w.Tg());
                }
                pred.step = n;
                ReceiverContext dctx = ctx;
                dctx.track = pred;
                const ReceiverOutput o = run_structure(k, r, dctx);
                score(i, o);
                so.track_err[i] = std::abs(pred.tau_hat - lp.radar.tau);
                TrackState next = pred;
                if (o.radar_path_hat) {
                    next.tau_hat = std::clamp(o.radar_path_hat->tau, 0.0, w.Tg());
                    next.f_D_hat = o.radar_path_hat->f_D;
                    next.alpha_hat = o.radar_path_hat->alpha;
                }
                state[i] = next;
            }
            if (cfg.reference) {
                const Outcome ro = reference_outcome(cfg, sc, fr, cc, ref, lp.radar);
                so.per.push_back(ro);
            }
            so.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            results[trial][n] = std::move(so);
        }
    });

    const auto names = row_names(cfg);
    std::vector<MetricRow> rows;
    for (std::size_t s = 0; s < names.size(); ++s)
        for (std::size_t n = 0; n < steps; ++n) {
            const LinkPair lp = vehicular_link(cfg.vehicle, n, w.fc);
            MetricRow m;
            m.structure = names[s];
            m.sweep = static_cast<double>(n);
            m.trials = cfg.trials;
            m.seed = cfg.seed;
            m.has_dynamic = true;
            m.sir_db = 10.0 * std::log10(radar_sir(cfg.vehicle, n));
            m.tau_r = lp.radar.tau;
            m.alpha_r = std::abs(lp.radar.alpha);
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                const StepOut& so = results[t][n];
                const Outcome& o = so.per[s];
                m.detections += o.detected ? 1 : 0;
                m.bit_errors += o.bit_errors;
                m.bits += so.bits;
                m.wall_time += so.seconds;
                if (s < so.track_err.size()) m.track_tau_err = std::max(m.track_tau_err, so.track_err[s]);
                if (records) records->push_back({n, t, names[s], o.detected, o.bit_errors});
            }
            m.pd = static_cast<double>(m.detections) / static_cast<double>(m.trials);
            m.ber = m.bits ? static_cast<double>(m.bit_errors) / static_cast<double>(m.bits) : 0.0;
            rows.push_back(m);
        }
    return rows;
}

PfaEstimate estimate_pfa(const std::vector<DelayDopplerMap>& maps, double Pfa, const CfarConfig& cfar)
{
    if (maps.empty()) throw NumericError("no maps for the false alarm estimate");
    PfaEstimate e;
    for (const auto& m : maps) {
        const CfarResult r = cfar_detect(m, Pfa, cfar);
        e.flagged += r.flagged;
        e.cells += r.evaluated;
    }
    if (e.cells == 0) throw NumericError("no evaluated cells");
    e.pfa = static_cast<double>(e.flagged) / static_cast<double>(e.cells);
    return e;
}

PfaEstimate estimate_pfa(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.pfa_maps == 0) throw NumericError("no maps for the false alarm estimate");
    const CommConfig cc = cfg.comm_config();
    const RadarConfig rc = cfg.radar_config();
    std::vector<PfaEstimate> part(cfg.pfa_maps);
    parallel_for(cfg.pfa_maps, cfg.threads, [&](std::size_t i) {
        Rng rng(trial_seed(cfg.seed, 0, i));
        const Frames fr = draw_frames(cfg, cc, rng);
        Scenario sc;
        sc.noise_sigma2 = 1.0;
        sc.rng_seed = rng();
        const ComplexSignal r = superpose(sc, fr.own, cfg.w);
        RadarResult rr = radar_process(r, fr.own, cfg.w, rc);
        CfarResult c = cfg.pfa_whole_map
                           ? cfar_detect(rr.map, cfg.Pfa, rc.cfar)
                           : rr.cfar;
        part[i] = {0.0, c.flagged, c.evaluated};
    });
    PfaEstimate e;
    for (const auto& p : part) {
        e.flagged += p.flagged;
        e.cells += p.cells;
    }
    if (e.cells == 0) throw NumericError("no evaluated cells");
    e.pfa = static_cast<double>(e.flagged) / static_cast<double>(e.cells);
    return e;
}

std::string csv_header(bool dynamic)
{
    std::string h = "structure,sweep,pd,ber,detections,trials,bit_errors,bits,seed";
    if (dynamic) h += ",sir_db,tau_r,alpha_r";
    return h;
}

std::string format_rows(const std::vector<MetricRow>& rows)
{
    const bool dyn = !rows.empty() && rows.front().has_dynamic;
    std::string out = csv_header(dyn) + "\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%zu,%zu,%zu,%zu,%llu", r.structure.c_str(),
                      r.sweep, r.pd, r.ber, r.detections, r.trials, r.bit_errors, r.bits,
                      static_cast<unsigned long long>(r.seed));
        out += buf;
        if (dyn) {
            std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g", r.sir_db, r.tau_r, r.alpha_r);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<MetricRow>& rows)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << format_rows(rows);
}

}  // namespace isac
