#include "isac/waveform.hpp"

#include "isac/dsp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace isac {

std::size_t WaveformParams::samples_per_pri() const
{
    return static_cast<std::size_t>(std::llround(T_PRI / Ts()));
}

void WaveformParams::validate() const
{
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (!(B > 0) || !std::isfinite(B)) fail("B must be positive");
    if (!(T > 0) || !std::isfinite(T)) fail("T must be positive");
    if (!(fc > 0) || !std::isfinite(fc)) fail("fc must be positive");
    if (P == 0) fail("P must be positive");
    if (Lc == 0) fail("Lc must be positive");
    if (Mos == 0) fail("Mos must be positive");
    if (!(T_PRI >= T)) fail("T_PRI must not be shorter than T");
    const double n = T_PRI / Ts();
    if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n))
        fail("T_PRI must be an integer number of samples (T_PRI/Ts = " + std::to_string(n) + ")");
}

Modulation parse_modulation(const std::string& s)
{
    std::string t;
    for (char ch : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (t == "bpsk") return Modulation::BPSK;
    if (t == "qpsk") return Modulation::QPSK;
    if (t == "16psk" || t == "psk16") return Modulation::PSK16;
    if (t == "16qam" || t == "qam16") return Modulation::QAM16;
    throw std::invalid_argument("unknown constellation '" + s + "'");
}

std::string modulation_name(Modulation m)
{
    switch (m) {
    case Modulation::BPSK: return "bpsk";
    case Modulation::QPSK: return "qpsk";
    case Modulation::PSK16: return "16psk";
    case Modulation::QAM16: return "16qam";
    }
    return "?";
}

namespace {

std::size_t gray_to_index(std::size_t g)
{
    std::size_t b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

// Per-rail 2-bit Gray level for 16-QAM: 00->-3, 01->-1, 11->+1, 10->+3.
double qam_level(std::size_t two_bits)
{
    static const double lv[4] = {-3.0, -1.0, 3.0, 1.0};
    return lv[two_bits & 3];
}

}  // namespace

Constellation::Constellation(Modulation m) : kind_(m)
{
    switch (m) {
    case Modulation::BPSK:
        bits_ = 1;
        points_ = {cd(1, 0), cd(-1, 0)};
        break;
    case Modulation::QPSK: {
        bits_ = 2;
        const double a = 1.0 / std::sqrt(2.0);
        points_.resize(4);
        for (std::size_t w = 0; w < 4; ++w) {
            const double i = ((w >> 1) & 1) ? -a : a;
            const double q = (w & 1) ? -a : a;
            points_[w] = cd(i, q);
        }
        break;
    }
    case Modulation::PSK16:
        bits_ = 4;
        points_.resize(16);
        for (std::size_t w = 0; w < 16; ++w) {
            const double k = static_cast<double>(gray_to_index(w));
            points_[w] = std::polar(1.0, 2.0 * kPi * k / 16.0);
        }
        break;
    case Modulation::QAM16: {
        bits_ = 4;
        const double s = 1.0 / std::sqrt(10.0);
        points_.resize(16);
        for (std::size_t w = 0; w < 16; ++w)
            points_[w] = cd(qam_level(w >> 2) * s, qam_level(w) * s);
        break;
    }
    }
}

std::size_t Constellation::decide(cd z) const
{
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double d = std::norm(z - points_[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

void Constellation::llr(cd z, double var, double* out) const
{
    double d[16];
    for (std::size_t i = 0; i < points_.size(); ++i) d[i] = std::norm(z - points_[i]);
    for (int b = 0; b < bits_; ++b) {
        const std::size_t mask = std::size_t{1} << (bits_ - 1 - b);
        double d0 = std::numeric_limits<double>::infinity();
        double d1 = d0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (i & mask)
                d1 = std::min(d1, d[i]);
            else
                d0 = std::min(d0, d[i]);
        }
        out[b] = (d1 - d0) / var;
    }
}

CVec map_bits(const Bits& bits, const Constellation& c)
{
    const int k = c.bits_per_symbol();
    if (bits.size() % static_cast<std::size_t>(k) != 0)
        throw std::invalid_argument("bit count not a multiple of bits per symbol");
    CVec out(bits.size() / k);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::size_t w = 0;
        for (int b = 0; b < k; ++b) w = (w << 1) | (bits[s * k + b] & 1u);
        out[s] = c.points()[w];
    }
    return out;
}

void word_to_bits(std::size_t word, int k, Bits& out)
{
    for (int b = k - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((word >> b) & 1u));
}

std::vector<std::uint8_t> pilot_mask(std::size_t Lc, std::size_t P, std::size_t pilot_heads)
{
    std::vector<std::uint8_t> m(Lc * P, 0);
    for (std::size_t l = 0; l < Lc; ++l) m[l] = 1;
    const std::size_t h = std::min(pilot_heads, Lc);
    for (std::size_t p = 1; p < P; ++p)
        for (std::size_t l = 0; l < h; ++l) m[p * Lc + l] = 1;
    return m;
}

std::size_t payload_count(std::size_t Lc, std::size_t P, std::size_t pilot_heads)
{
    if (P == 0) return 0;
    return (P - 1) * (Lc - std::min(pilot_heads, Lc));
}

SymbolFrame make_frame(std::size_t Lc, std::size_t P, const Constellation& c,
                       std::size_t pilot_heads, std::uint64_t pilot_key, const CVec& payload)
{
    if (payload.size() != payload_count(Lc, P, pilot_heads))
        throw std::invalid_argument("payload length does not match frame layout");
    SymbolFrame f{CMatrix(Lc, P), c, pilot_mask(Lc, P, pilot_heads)};
    std::size_t k = 0;
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t l = 0; l < Lc; ++l) {
            if (f.is_pilot(l, p)) {
                const std::uint64_t h = dsp::splitmix(pilot_key * 0x100000001b3ull + p * Lc + l);
                f.symbols(l, p) = c.points()[h % c.size()];
            } else {
                f.symbols(l, p) = payload[k++];
            }
        }
    }
    return f;
}

CVec payload_symbols(const SymbolFrame& f)
{
    CVec out;
    for (std::size_t p = 0; p < f.P(); ++p)
        for (std::size_t l = 0; l < f.Lc(); ++l)
            if (!f.is_pilot(l, p)) out.push_back(f.symbols(l, p));
    return out;
}

cd chirp_value(const WaveformParams& w, double t)
{
    const double ph = -kPi * w.B * t + kPi * w.slope() * t * t;
    return {std::cos(ph), std::sin(ph)};
}

namespace {

void check_frame(const SymbolFrame& f, const WaveformParams& w)
{
    if (f.Lc() != w.Lc || f.P() != w.P)
        throw std::invalid_argument("symbol frame shape does not match waveform parameters");
}

}  // namespace

ComplexSignal chirp_train(const WaveformParams& w)
{
    const std::size_t npri = w.samples_per_pri();
    const std::size_t npul = w.samples_per_pulse();
    const double Ts = w.Ts();
    ComplexSignal s{CVec(w.frame_samples()), Ts, 0.0};
    // One pulse, then copies: the chirp restarts every PRI.
    for (std::size_t m = 0; m < npul; ++m) s.samples[m] = chirp_value(w, m * Ts);
    for (std::size_t p = 1; p < w.P; ++p)
        std::copy_n(s.samples.begin(), npul, s.samples.begin() + p * npri);
    return s;
}

ComplexSignal payload(const SymbolFrame& f, const WaveformParams& w)
{
    check_frame(f, w);
    const std::size_t npri = w.samples_per_pri();
    ComplexSignal s{CVec(w.frame_samples()), w.Ts(), 0.0};
    for (std::size_t p = 0; p < w.P; ++p)
        for (std::size_t l = 0; l < w.Lc; ++l)
            std::fill_n(s.samples.begin() + p * npri + l * w.Mos, w.Mos, f.symbols(l, p));
    return s;
}

ComplexSignal pc_fmcw(const SymbolFrame& f, const WaveformParams& w)
{
    ComplexSignal c = chirp_train(w);
    ComplexSignal d = payload(f, w);
    for (std::size_t i = 0; i < c.samples.size(); ++i) c.samples[i] *= d.samples[i];
    return c;
}

cd waveform_at(const SymbolFrame* f, const WaveformParams& w, double u)
{
    const double npri = static_cast<double>(w.samples_per_pri());
    const double npul = static_cast<double>(w.samples_per_pulse());
    const double uu = u + 1e-9;
    if (uu < 0) return {};
    const double pf = std::floor(uu / npri);
    if (pf >= static_cast<double>(w.P)) return {};
    const double ul = uu - pf * npri;
    if (ul >= npul) return {};
    const double t = (u - pf * npri) * w.Ts();
    cd v = chirp_value(w, t);
    if (f) {
        const auto l = static_cast<std::size_t>(ul / static_cast<double>(w.Mos));
        v *= f->symbols(std::min(l, w.Lc - 1), static_cast<std::size_t>(pf));
    }
    return v;
}

CMatrix reshape_fast_slow(const ComplexSignal& s, const WaveformParams& w)
{
    const std::size_t npri = w.samples_per_pri();
    if (s.samples.size() != npri * w.P)
        throw std::invalid_argument("signal length does not span P PRIs");
    CMatrix m(npri, w.P);
    m.data = s.samples;
    return m;
}

ComplexSignal flatten(const CMatrix& m, double Ts) { return {m.data, Ts, 0.0}; }

}  // namespace isac
