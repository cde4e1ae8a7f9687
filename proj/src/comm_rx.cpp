#include "isac/comm_rx.hpp"

#include "isac/coding.hpp"
#include "isac/dsp.hpp"
#include "isac/fft.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

SymbolFrame pilot_reference(const WaveformParams& w, const CommConfig& cfg)
{
    const CVec zeros(payload_count(w.Lc, w.P, cfg.pilot_heads), cd{});
    return make_frame(w.Lc, w.P, cfg.constellation, cfg.pilot_heads, cfg.pilot_key, zeros);
}

ComplexSignal pilot_waveform(const SymbolFrame& ref, const WaveformParams& w)
{
    const std::size_t npul = w.samples_per_pulse();
    ComplexSignal s{CVec(npul), w.Ts(), 0.0};
    for (std::size_t m = 0; m < npul; ++m)
        s.samples[m] = chirp_value(w, m * w.Ts()) * ref.symbols(m / w.Mos, 0);
    return s;
}

namespace {

// Peak magnitude over residual tones of the symbol-integrated
// correlation at one lag.
double sync_metric(const cd* r, const CVec& pw, std::size_t Lc, std::size_t Mos, CVec& buf)
{
    std::fill(buf.begin(), buf.end(), cd{});
    for (std::size_t l = 0; l < Lc; ++l) {
        cd acc{};
        const std::size_t b = l * Mos;
        for (std::size_t j = 0; j < Mos; ++j) acc += r[b + j] * std::conj(pw[b + j]);
        buf[l] = acc;
    }
    fft::forward(buf);
    double best = 0.0;
    for (const auto& v : buf) best = std::max(best, std::norm(v));
    return best;
}

}  // namespace

std::size_t time_sync(const ComplexSignal& r, const SymbolFrame& ref, const WaveformParams& w,
                      std::size_t max_lag, double* metric)
{
    const std::size_t npul = w.samples_per_pulse();
    if (r.samples.size() < npul) throw std::invalid_argument("pilot pulse longer than signal");
    if (energy(r.samples) == 0.0) throw NumericError("time sync: input has no energy");
    if (max_lag == 0) max_lag = w.samples_per_pri() - 1;
    max_lag = std::min(max_lag, r.samples.size() - npul);

    const CVec pw = pilot_waveform(ref, w).samples;
    const std::size_t Lc = w.Lc;
    const std::size_t Mos = w.Mos;
    CVec coarse_buf(dsp::next_pow2(Lc) * 4);
    CVec fine_buf(dsp::next_pow2(Lc) * 8);

    const std::size_t stride = std::max<std::size_t>(1, Mos / 2);
    std::size_t best = 0;
    double bm = -1.0;
    for (std::size_t k = 0; k <= max_lag; k += stride) {
        const double m = sync_metric(r.samples.data() + k, pw, Lc, Mos, coarse_buf);
        if (m > bm) {
            bm = m;
            best = k;
        }
    }
    const std::size_t lo = best > Mos ? best - Mos : 0;
    const std::size_t hi = std::min(max_lag, best + Mos);
    bm = -1.0;
    for (std::size_t k = lo; k <= hi; ++k) {
        const double m = sync_metric(r.samples.data() + k, pw, Lc, Mos, fine_buf);
        if (m > bm) {
            bm = m;
            best = k;
        }
    }
    if (metric) *metric = bm;
    return best;
}

CMatrix comm_dechirp(const ComplexSignal& r, std::size_t lag, const WaveformParams& w)
{
    if (lag >= r.samples.size()) throw std::invalid_argument("timing beyond frame");
    const std::size_t npri = w.samples_per_pri();
    const std::size_t npul = w.samples_per_pulse();
    CVec ref(npul);
    for (std::size_t m = 0; m < npul; ++m) ref[m] = std::conj(chirp_value(w, m * w.Ts()));
    CMatrix y(npul, w.P);
    for (std::size_t p = 0; p < w.P; ++p)
        for (std::size_t m = 0; m < npul; ++m) {
            const std::size_t i = lag + p * npri + m;
            y(m, p) = i < r.samples.size() ? r.samples[i] * ref[m] : cd{};
        }
    return y;
}

double intra_pulse_tone(const CMatrix& y, const SymbolFrame& ref, const WaveformParams& w)
{
    const std::size_t Lc = w.Lc;
    const std::size_t Mos = w.Mos;
    CVec s(Lc);
    for (std::size_t l = 0; l < Lc; ++l) {
        cd acc{};
        for (std::size_t j = 0; j < Mos; ++j) acc += y(l * Mos + j, 0);
        const cd I = ref.symbols(l, 0);
        s[l] = acc * std::conj(I) / (std::norm(I) * Mos);
    }
    const std::size_t K = dsp::next_pow2(Lc) * 8;
    CVec buf(K, cd{});
    std::copy(s.begin(), s.end(), buf.begin());
    fft::forward(buf);
    std::size_t kb = 0;
    for (std::size_t k = 1; k < K; ++k)
        if (std::norm(buf[k]) > std::norm(buf[kb])) kb = k;
    const double Tc = w.Tc();
    const double f0 = fft::bin_frequency(kb, K, Tc);
    const double df = 1.0 / (K * Tc);
    return dsp::tone_peak(s.data(), Lc, Tc, f0 - df, f0 + df, -1, nullptr, 8);
}

double cfo_estimate(const CMatrix& y, const SymbolFrame& ref, const WaveformParams& w,
                    double fallback, bool refine)
{
    const std::size_t Mos = w.Mos;
    const std::size_t P = ref.P();
    // Pilot cells present in every pulse.
    std::vector<std::size_t> heads;
    for (std::size_t l = 0; l < ref.Lc(); ++l) {
        bool all = true;
        for (std::size_t p = 0; p < P && all; ++p) all = ref.is_pilot(l, p);
        if (all) heads.push_back(l);
    }
    if (P < 2 || heads.empty()) {
        bool any = false;
        for (std::size_t l = 0; l < ref.Lc(); ++l) any = any || ref.is_pilot(l, 0);
        if (!any) throw std::invalid_argument("insufficient pilots for CFO estimation");
        return fallback;
    }

    CVec h(P, cd{});
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t l : heads) {
            const cd I = ref.symbols(l, p);
            cd acc{};
            for (std::size_t j = 0; j < Mos; ++j) acc += y(l * Mos + j, p);
            h[p] += acc * std::conj(I) / std::norm(I);
        }
    cd lag1{};
    for (std::size_t p = 1; p < P; ++p)
        for (std::size_t l : heads) {
            const cd a = ref.symbols(l, p);
            const cd b = ref.symbols(l, p - 1);
            const cd ratio = std::conj(a) * b / (std::norm(a) * std::norm(b));
            for (std::size_t j = 0; j < Mos; ++j)
                lag1 += y(l * Mos + j, p) * std::conj(y(l * Mos + j, p - 1)) * ratio;
        }
    const double f0 = std::arg(lag1) / (2.0 * kPi * w.T_PRI);
    if (!refine) return f0;
    const double bin = 1.0 / w.T_CPI();
    return dsp::tone_peak(h.data(), P, w.T_PRI, f0 - 1.5 * bin, f0 + 1.5 * bin, -1);
}

CMatrix demod(const CMatrix& y, const WaveformParams& w, double f_D_hat, double nu_hat)
{
    const std::size_t Mos = w.Mos;
    const std::size_t Lc = y.rows / Mos;
    const double Ts = w.Ts();
    CVec intra(y.rows);
    for (std::size_t m = 0; m < y.rows; ++m) intra[m] = std::polar(1.0 / Mos, -2.0 * kPi * nu_hat * m * Ts);
    CMatrix soft(Lc, y.cols);
    for (std::size_t p = 0; p < y.cols; ++p) {
        const cd slow = std::polar(1.0, -2.0 * kPi * f_D_hat * w.T_PRI * static_cast<double>(p));
        for (std::size_t l = 0; l < Lc; ++l) {
            cd acc{};
            for (std::size_t j = 0; j < Mos; ++j) acc += y(l * Mos + j, p) * intra[l * Mos + j];
            soft(l, p) = acc * slow;
        }
    }
    return soft;
}

Decisions equalize_and_decide(const CMatrix& soft, cd alpha_hat, const Constellation& c)
{
    if (alpha_hat == cd{}) throw std::invalid_argument("equalizer gain is zero");
    Decisions d;
    d.index.resize(soft.data.size());
    d.hard = CMatrix(soft.rows, soft.cols);
    const cd inv = 1.0 / alpha_hat;
    for (std::size_t i = 0; i < soft.data.size(); ++i) {
        d.index[i] = c.decide(soft.data[i] * inv);
        d.hard.data[i] = c.points()[d.index[i]];
    }
    return d;
}

std::vector<double> equalize_llr(const CMatrix& soft, cd alpha_hat, double noise_var,
                                 const Constellation& c)
{
    if (alpha_hat == cd{}) throw std::invalid_argument("equalizer gain is zero");
    const int k = c.bits_per_symbol();
    const double var = std::max(noise_var, 1e-300) / std::norm(alpha_hat);
    std::vector<double> out(soft.data.size() * k);
    const cd inv = 1.0 / alpha_hat;
    for (std::size_t i = 0; i < soft.data.size(); ++i) c.llr(soft.data[i] * inv, var, out.data() + i * k);
    return out;
}

std::size_t info_bit_count(const WaveformParams& w, const CommConfig& cfg)
{
    const std::size_t cells = payload_count(w.Lc, w.P, cfg.pilot_heads);
    if (!cfg.coded) return cells * cfg.constellation.bits_per_symbol();
    if (cells <= static_cast<std::size_t>(CodeConfig::kTail))
        throw std::invalid_argument("frame too small for the coded payload");
    return cells - CodeConfig::kTail;
}

CommPayload build_payload(const Bits& info, const WaveformParams& w, const CommConfig& cfg)
{
    if (info.size() != info_bit_count(w, cfg)) throw std::invalid_argument("payload bit count mismatch");
    const Constellation& c = cfg.constellation;
    CVec sym;
    if (!cfg.coded) {
        sym = map_bits(info, c);
    } else {
        if (c.kind() != Modulation::QPSK) throw std::invalid_argument("coding requires QPSK");
        const CodedBits cb = encode(info);
        std::vector<std::size_t> order(cb.systematic.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        order = interleave(order, cfg.interleave_rows);
        Bits pairs;
        pairs.reserve(2 * order.size());
        for (std::size_t i : order) {
            pairs.push_back(cb.systematic[i]);
            pairs.push_back(cb.parity[i]);
        }
        sym = map_bits(pairs, c);
    }
    return {info, make_frame(w.Lc, w.P, c, cfg.pilot_heads, cfg.pilot_key, sym)};
}

CommEstimate comm_receive(const ComplexSignal& r, const WaveformParams& w, const CommConfig& cfg,
                          const SymbolFrame& ref)
{
    CommEstimate est;
    est.lag = time_sync(r, ref, w, cfg.max_lag);
    const CMatrix y = comm_dechirp(r, est.lag, w);
    est.nu_hat = intra_pulse_tone(y, ref, w);
    est.f_D_hat = cfo_estimate(y, ref, w, est.nu_hat);
    est.soft = demod(y, w, est.f_D_hat, est.nu_hat);

    cd num{};
    double den = 0.0;
    for (std::size_t p = 0; p < w.P; ++p)
        for (std::size_t l = 0; l < w.Lc; ++l)
            if (ref.is_pilot(l, p)) {
                num += est.soft(l, p) * std::conj(ref.symbols(l, p));
                den += std::norm(ref.symbols(l, p));
            }
    est.beta_hat = num / den;
    if (!(std::abs(est.beta_hat) > 0) || !std::isfinite(std::abs(est.beta_hat)))
        throw NumericError("comm equalizer gain degenerate");
    double nv = 0.0;
    std::size_t np = 0;
    for (std::size_t p = 0; p < w.P; ++p)
        for (std::size_t l = 0; l < w.Lc; ++l)
            if (ref.is_pilot(l, p)) {
                nv += std::norm(est.soft(l, p) - est.beta_hat * ref.symbols(l, p));
                ++np;
            }
    est.noise_var = nv / static_cast<double>(np);

    // Payload cells in frame order.
    CMatrix pay(1, payload_count(w.Lc, w.P, cfg.pilot_heads));
    {
        std::size_t k = 0;
        for (std::size_t p = 0; p < w.P; ++p)
            for (std::size_t l = 0; l < w.Lc; ++l)
                if (!ref.is_pilot(l, p)) pay.data[k++] = est.soft(l, p);
    }
    const Constellation& c = cfg.constellation;
    if (!cfg.coded) {
        const Decisions d = equalize_and_decide(pay, est.beta_hat, c);
        est.decided_bits.reserve(d.index.size() * c.bits_per_symbol());
        for (auto idx : d.index) word_to_bits(idx, c.bits_per_symbol(), est.decided_bits);
        est.decided = make_frame(w.Lc, w.P, c, cfg.pilot_heads, cfg.pilot_key, d.hard.data);
    } else {
        const std::vector<double> llr = equalize_llr(pay, est.beta_hat, est.noise_var, c);
        const std::size_t n = pay.data.size();
        std::vector<double> ls(n), lp(n);
        for (std::size_t i = 0; i < n; ++i) {
            ls[i] = llr[2 * i];
            lp[i] = llr[2 * i + 1];
        }
        ls = deinterleave(ls, cfg.interleave_rows);
        lp = deinterleave(lp, cfg.interleave_rows);
        est.decided_bits = viterbi_decode(ls, lp);
        est.decided = build_payload(est.decided_bits, w, cfg).frame;
    }

    const double delta = (est.f_D_hat - est.nu_hat) * w.T / w.B;
    est.tau_hat = std::max(0.0, est.lag * w.Ts() + delta);
    const double ph = 2.0 * kPi * est.f_D_hat * est.lag * w.Ts() + kPi * w.B * delta +
                      kPi * w.slope() * delta * delta;
    est.alpha_hat = est.beta_hat * std::polar(1.0, -ph);
    return est;
}

}  // namespace isac
