#include "isac/radar_rx.hpp"

#include "isac/dsp.hpp"
#include "isac/fft.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

namespace {

double signed_bin(std::size_t k, std::size_t n)
{
    return (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

std::size_t wrap(long i, std::size_t n)
{
    const long m = static_cast<long>(n);
    long r = i % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
}

// Per-pulse spectral shaping: optional ideal low-pass and optional
// group-delay all-pass, one FFT pair.
void shape_pulses(CMatrix& y, const WaveformParams& w, double f_cut, bool gdf)
{
    const std::size_t n = y.rows;
    const double Ts = w.Ts();
    CVec H(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = fft::bin_frequency(k, n, Ts);
        double g = 1.0 / static_cast<double>(n);
        if (f_cut >= 0 && std::abs(f) > f_cut) g = 0.0;
        H[k] = gdf ? std::polar(g, -kPi * (w.T / w.B) * f * f) : cd(g, 0.0);
    }
    fft::columns(y, -1);
    for (std::size_t p = 0; p < y.cols; ++p) {
        cd* c = y.col(p);
        for (std::size_t k = 0; k < n; ++k) c[k] *= H[k];
    }
    fft::columns(y, +1);
}

}  // namespace

double DelayDopplerMap::beat_hz(std::size_t k) const { return signed_bin(k, values.rows) * beat_step; }

double DelayDopplerMap::doppler_hz(std::size_t j) const
{
    return signed_bin(j, values.cols) * doppler_step;
}

std::size_t CfarConfig::training_cells() const
{
    const std::size_t a = 2 * half_window + 1;
    const std::size_t g = 2 * half_guard + 1;
    return a * a - g * g;
}

double lpf_cutoff(const WaveformParams& w, double f_margin)
{
    if (f_margin < 0) f_margin = 2.0 / w.T;
    return w.slope() * w.Tg() + f_margin;
}

CMatrix dechirp_raw(const ComplexSignal& r, const WaveformParams& w)
{
    const std::size_t npri = w.samples_per_pri();
    const std::size_t npul = w.samples_per_pulse();
    if (r.samples.size() < npri * w.P) throw std::invalid_argument("signal shorter than P PRIs");
    CVec ref(npul);
    for (std::size_t m = 0; m < npul; ++m) ref[m] = std::conj(chirp_value(w, m * w.Ts()));
    CMatrix y(npul, w.P);
    for (std::size_t p = 0; p < w.P; ++p) {
        const cd* src = r.samples.data() + p * npri;
        cd* dst = y.col(p);
        for (std::size_t m = 0; m < npul; ++m) dst[m] = src[m] * ref[m];
    }
    return y;
}

void lowpass(CMatrix& y, const WaveformParams& w, double f_cut) { shape_pulses(y, w, f_cut, false); }

CMatrix dechirp(const ComplexSignal& r, const WaveformParams& w, double f_margin)
{
    CMatrix y = dechirp_raw(r, w);
    lowpass(y, w, lpf_cutoff(w, f_margin));
    return y;
}

CMatrix group_delay_filter(const CMatrix& y, const WaveformParams& w)
{
    CMatrix out = y;
    shape_pulses(out, w, -1.0, true);
    return out;
}

CMatrix compensate_symbols(const CMatrix& y, const SymbolFrame& f, std::size_t Mos)
{
    if (y.rows != f.Lc() * Mos || y.cols != f.P())
        throw std::invalid_argument("matrix shape does not match symbol frame");
    CMatrix z(y.rows, y.cols);
    for (std::size_t p = 0; p < y.cols; ++p)
        for (std::size_t l = 0; l < f.Lc(); ++l) {
            const cd s = f.symbols(l, p);
            const double e = std::norm(s);
            if (e == 0.0) throw std::invalid_argument("zero-magnitude symbol cannot be compensated");
            const cd c = std::conj(s) / e;
            for (std::size_t j = 0; j < Mos; ++j) z(l * Mos + j, p) = y(l * Mos + j, p) * c;
        }
    return z;
}

DelayDopplerMap delay_doppler(const CMatrix& z, const WaveformParams& w, std::size_t Z_f,
                              std::size_t Z_D)
{
    const std::size_t nf = z.rows * (1 + Z_f);
    const std::size_t nd = z.cols * (1 + Z_D);
    DelayDopplerMap map;
    map.values = CMatrix(nf, nd);
    map.Z_f = Z_f;
    map.Z_D = Z_D;
    map.beat_step = 1.0 / ((1.0 + Z_f) * w.T);
    map.doppler_step = 1.0 / ((1.0 + Z_D) * w.T_CPI());
    for (std::size_t p = 0; p < z.cols; ++p) std::copy_n(z.col(p), z.rows, map.values.col(p));
    // Fast time uses the +j kernel so a tone exp(-j2π f_B t) lands on +f_B.
    fft::transform(map.values.data.data(), static_cast<int>(nf), static_cast<int>(z.cols), 1,
                   static_cast<int>(nf), +1);
    fft::rows(map.values, -1);
    const double s = 1.0 / std::sqrt(static_cast<double>(nf) * static_cast<double>(nd));
    for (auto& v : map.values.data) v *= s;
    return map;
}

double cfar_threshold_factor(std::size_t N, double Pfa)
{
    return static_cast<double>(N) * (std::pow(Pfa, -1.0 / static_cast<double>(N)) - 1.0);
}

CfarRegion default_region(const WaveformParams& w, std::size_t Z_f, double f_margin)
{
    if (f_margin < 0) f_margin = 2.0 / w.T;
    const double scale = (1.0 + Z_f) * w.T;
    CfarRegion reg;
    reg.lo = static_cast<long>(std::floor(-f_margin * scale));
    reg.hi = static_cast<long>(std::ceil((w.slope() * w.Tg() + f_margin) * scale));
    return reg;
}

CfarResult cfar_detect(const DelayDopplerMap& map, double Pfa, const CfarConfig& cfg,
                       std::optional<CfarRegion> region)
{
    if (!(Pfa > 0 && Pfa < 1)) throw std::invalid_argument("Pfa must lie in (0,1)");
    if (cfg.half_guard >= cfg.half_window) throw std::invalid_argument("guard must be inside window");
    const std::size_t nf = map.fast_bins();
    const std::size_t nd = map.slow_bins();
    const std::size_t W = cfg.half_window;
    const std::size_t G = cfg.half_guard;
    if (nf < 2 * W + 1 || nd < 2 * W + 1) throw std::invalid_argument("map smaller than CFAR window");

    long lo = 0;
    long hi = static_cast<long>(nf) - 1;
    if (region && region->hi - region->lo + 1 < static_cast<long>(nf)) {
        lo = region->lo;
        hi = region->hi;
    }
    const bool full_rows = (hi - lo + 1) == static_cast<long>(nf);
    const std::size_t R0 = static_cast<std::size_t>(hi - lo + 1);
    const std::size_t R = R0 + 2 * W;
    const std::size_t C = nd + 2 * W;

    // Integral image of the circularly extended power patch.
    std::vector<double> S((R + 1) * (C + 1), 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return S[i * (C + 1) + j]; };
    for (std::size_t i = 0; i < R; ++i) {
        const std::size_t row = wrap(lo - static_cast<long>(W) + static_cast<long>(i), nf);
        double run = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            const std::size_t col = wrap(static_cast<long>(j) - static_cast<long>(W), nd);
            run += std::norm(map.values(row, col));
            at(i + 1, j + 1) = at(i, j + 1) + run;
        }
    }
    auto box = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
        return at(i1 + 1, j1 + 1) - at(i0, j1 + 1) - at(i1 + 1, j0) + at(i0, j0);
    };

    const std::size_t N = cfg.training_cells();
    const double aT = cfar_threshold_factor(N, Pfa);
    CfarResult res;
    res.evaluated = R0 * nd;
    std::vector<double> power(R0 * nd, 0.0);
    std::vector<double> noise(R0 * nd, 0.0);
    std::vector<std::uint8_t> flag(R0 * nd, 0);
    for (std::size_t i = 0; i < R0; ++i) {
        const std::size_t row = wrap(lo + static_cast<long>(i), nf);
        for (std::size_t c = 0; c < nd; ++c) {
            const double pw = std::norm(map.values(row, c));
            const double outer = box(i, c, i + 2 * W, c + 2 * W);
            const double inner = box(i + W - G, c + W - G, i + W + G, c + W + G);
            const double lvl = (outer - inner) / static_cast<double>(N);
            power[i * nd + c] = pw;
            noise[i * nd + c] = lvl;
            if (pw > aT * lvl) {
                flag[i * nd + c] = 1;
                ++res.flagged;
            }
        }
    }

    // Keep flagged cells that dominate every flagged neighbour within one
    // resolution cell; equal powers resolve to the lower linear index.
    const long rf = static_cast<long>(1 + map.Z_f);
    const long rd = static_cast<long>(1 + map.Z_D);
    for (std::size_t i = 0; i < R0; ++i)
        for (std::size_t c = 0; c < nd; ++c) {
            const std::size_t idx = i * nd + c;
            if (!flag[idx]) continue;
            bool keep = true;
            for (long di = -rf; di <= rf && keep; ++di) {
                long ii = static_cast<long>(i) + di;
                if (full_rows)
                    ii = static_cast<long>(wrap(ii, R0));
                else if (ii < 0 || ii >= static_cast<long>(R0))
                    continue;
                for (long dj = -rd; dj <= rd; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const std::size_t jj = wrap(static_cast<long>(c) + dj, nd);
                    const std::size_t o = static_cast<std::size_t>(ii) * nd + jj;
                    if (!flag[o]) continue;
                    if (power[o] > power[idx] || (power[o] == power[idx] && o < idx)) {
                        keep = false;
                        break;
                    }
                }
            }
            if (!keep) continue;
            Detection d;
            d.beat_bin = wrap(lo + static_cast<long>(i), nf);
            d.doppler_bin = c;
            d.peak = map.values(d.beat_bin, c);
            d.power = power[idx];
            d.noise = noise[idx];
            res.detections.push_back(d);
        }
    std::stable_sort(res.detections.begin(), res.detections.end(),
                     [](const Detection& a, const Detection& b) { return a.power > b.power; });
    return res;
}

PropagationPath path_from_beat(double f_B, double f_D, cd gamma, const WaveformParams& w)
{
    PropagationPath p;
    p.f_D = f_D;
    p.tau = (w.T / w.B) * (f_B + f_D);
    // Dechirp leaves exp(jπBτ + jπ(B/T)τ²); the all-pass adds -π(T/B)f_B².
    const double ph = kPi * w.B * p.tau + kPi * w.slope() * p.tau * p.tau - kPi * (w.T / w.B) * f_B * f_B;
    p.alpha = gamma * std::polar(1.0, -ph);
    return p;
}

PropagationPath estimate_params(const Detection& d, const DelayDopplerMap& map,
                                const WaveformParams& w, bool* valid)
{
    const double f_B = map.beat_hz(d.beat_bin);
    const double f_D = map.doppler_hz(d.doppler_bin);
    const double nf = static_cast<double>(map.fast_bins());
    const double nd = static_cast<double>(map.slow_bins());
    const cd gamma = d.peak * std::sqrt(nf * nd) /
                     (static_cast<double>(w.samples_per_pulse()) * static_cast<double>(w.P));
    PropagationPath p = path_from_beat(f_B, f_D, gamma, w);
    if (valid) *valid = p.tau >= 0.0 && p.tau <= w.Tg();
    return p;
}

BeatFit refine_beat(const CMatrix& z, const WaveformParams& w, double f_D, double f_B0,
                    double half_width)
{
    CVec v(z.rows, cd{});
    for (std::size_t p = 0; p < z.cols; ++p) {
        const cd rot = std::polar(1.0, -2.0 * kPi * f_D * w.T_PRI * static_cast<double>(p));
        const cd* c = z.col(p);
        for (std::size_t m = 0; m < z.rows; ++m) v[m] += c[m] * rot;
    }
    BeatFit fit;
    cd val;
    fit.f_B = dsp::tone_peak(v.data(), v.size(), w.Ts(), f_B0 - half_width, f_B0 + half_width, +1, &val);
    fit.gamma = val / (static_cast<double>(z.rows) * static_cast<double>(z.cols));
    return fit;
}

RadarResult radar_process(const ComplexSignal& r, const SymbolFrame& tx, const WaveformParams& w,
                          const RadarConfig& cfg)
{
    RadarResult res;
    CMatrix y = dechirp_raw(r, w);
    shape_pulses(y, w, lpf_cutoff(w, cfg.f_margin), true);
    res.z = compensate_symbols(y, tx, w.Mos);
    res.map = delay_doppler(res.z, w, cfg.Z_f, cfg.Z_D);
    res.cfar = cfar_detect(res.map, cfg.Pfa, cfg.cfar, default_region(w, cfg.Z_f, cfg.f_margin));
    for (auto& d : res.cfar.detections) d.est_path = estimate_params(d, res.map, w, &d.valid);
    return res;
}

std::optional<PropagationPath> best_path(const RadarResult& res, const WaveformParams& w,
                                         const RadarConfig& cfg)
{
    for (const auto& d : res.cfar.detections) {
        if (!d.valid) continue;
        if (!cfg.refine_beat) return d.est_path;
        const double f_B0 = res.map.beat_hz(d.beat_bin);
        const BeatFit fit = refine_beat(res.z, w, d.est_path.f_D, f_B0, 0.6 / w.T);
        PropagationPath p = path_from_beat(fit.f_B, d.est_path.f_D, fit.gamma, w);
        p.tau = std::clamp(p.tau, 0.0, w.Tg());
        return p;
    }
    return std::nullopt;
}

}  // namespace isac
