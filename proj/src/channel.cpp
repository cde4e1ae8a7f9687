#include "isac/channel.hpp"

#include "isac/fft.hpp"

#include <cmath>

namespace isac {

double Vec2::norm() const { return std::hypot(x, y); }

namespace {

std::size_t nice_size(std::size_t n)
{
    for (;; ++n) {
        std::size_t m = n;
        for (std::size_t f : {2u, 3u, 5u, 7u})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

}  // namespace

ComplexSignal apply_path(const ComplexSignal& x, const PropagationPath& path)
{
    const std::size_t n = x.samples.size();
    const double Ts = x.sample_period;
    if (!(Ts > 0)) throw std::invalid_argument("sample period must be positive");
    if (path.tau < 0 || path.tau > n * Ts) throw std::invalid_argument("delay exceeds frame duration");

    ComplexSignal out{CVec(n), Ts, x.start_time};
    if (n == 0) return out;
    const std::size_t L = nice_size(n + static_cast<std::size_t>(std::ceil(path.tau / Ts)) + 1);
    CVec buf(L);
    std::copy(x.samples.begin(), x.samples.end(), buf.begin());
    fft::forward(buf);
    for (std::size_t k = 0; k < L; ++k)
        buf[k] *= std::polar(1.0 / L, -2.0 * kPi * fft::bin_frequency(k, L, Ts) * path.tau);
    fft::backward(buf);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x.start_time + i * Ts;
        out.samples[i] = path.alpha * std::polar(1.0, 2.0 * kPi * path.f_D * t) * buf[i];
    }
    return out;
}

void accumulate_path(CVec& acc, const SymbolFrame& frame, const WaveformParams& w,
                     const PropagationPath& path)
{
    // Sample n integrates the symbol envelope over [n, n+1) (sample units),
    // so a delay moves symbol edges continuously; the chirp phase is taken
    // at the sample instant. Integer delays reduce to point sampling.
    const double Ts = w.Ts();
    const double d = path.tau / Ts;
    const std::size_t npri = w.samples_per_pri();
    const double npul = static_cast<double>(w.samples_per_pulse());
    const double mos = static_cast<double>(w.Mos);
    const double slope = w.slope();
    const long long N = static_cast<long long>(acc.size());
    for (std::size_t p = 0; p < w.P; ++p) {
        const double start = static_cast<double>(p * npri) + d;
        long long n0 = static_cast<long long>(std::floor(start));
        long long n1 = static_cast<long long>(std::ceil(start + npul));
        n0 = std::max<long long>(n0, 0);
        n1 = std::min(n1, N);
        for (long long n = n0; n < n1; ++n) {
            const double ul = static_cast<double>(n) - start;
            const double a = std::max(ul, 0.0);
            const double b = std::min(ul + 1.0, npul);
            if (!(b > a)) continue;
            auto l = static_cast<std::size_t>(a / mos);
            if (l >= w.Lc) l = w.Lc - 1;
            const double edge = static_cast<double>(l + 1) * mos;
            cd env;
            if (b <= edge || l + 1 >= w.Lc)
                env = frame.symbols(l, p) * (b - a);
            else
                env = frame.symbols(l, p) * (edge - a) + frame.symbols(l + 1, p) * (b - edge);
            const double t = ul * Ts;
            const double ph = -kPi * w.B * t + kPi * slope * t * t + 2.0 * kPi * path.f_D * (n * Ts);
            acc[n] += path.alpha * env * cd(std::cos(ph), std::sin(ph));
        }
    }
}

ComplexSignal propagate(const SymbolFrame& frame, const WaveformParams& w,
                        const PropagationPath& path)
{
    if (path.tau < 0) throw std::invalid_argument("negative delay");
    ComplexSignal out{CVec(w.frame_samples()), w.Ts(), 0.0};
    accumulate_path(out.samples, frame, w, path);
    return out;
}

void add_awgn(CVec& x, double sigma2, Rng& rng)
{
    if (sigma2 <= 0) return;
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
    for (auto& v : x) {
        const double re = g(rng);
        const double im = g(rng);
        v += cd(re, im);
    }
}

ComplexSignal superpose(const Scenario& sc, const SymbolFrame& tx_frame, const WaveformParams& w)
{
    if (sc.noise_sigma2 < 0) throw std::invalid_argument("negative noise variance");
    ComplexSignal r{CVec(w.frame_samples()), w.Ts(), 0.0};
    auto add = [&](const SymbolFrame& f, const PropagationPath& path) {
        if (f.Lc() != w.Lc || f.P() != w.P) throw std::invalid_argument("frame shape mismatch");
        if (sc.delay_model == DelayModel::Analytic) {
            accumulate_path(r.samples, f, w, path);
        } else {
            ComplexSignal y = apply_path(pc_fmcw(f, w), path);
            for (std::size_t i = 0; i < y.samples.size(); ++i) r.samples[i] += y.samples[i];
        }
    };
    for (const auto& p : sc.radar_paths) add(tx_frame, p);
    for (const auto& c : sc.comm_links) add(c.frame, c.path);
    Rng rng(sc.rng_seed);
    add_awgn(r.samples, sc.noise_sigma2, rng);
    return r;
}

Vec2 target_position(const VehicleState& s, std::size_t n)
{
    const double r0 = s.p_R.norm();
    if (!(r0 > 0)) throw std::invalid_argument("target at the origin");
    const double r = r0 - s.v * s.delta_t * static_cast<double>(n);
    return {s.p_R.x * r / r0, s.p_R.y * r / r0};
}

LinkPair vehicular_link(const VehicleState& s, std::size_t n, double fc)
{
    const double dC = s.p_C.norm();
    const Vec2 pr = target_position(s, n);
    const double dR = pr.norm();
    if (!(dC > 0) || !(dR > 0)) throw std::invalid_argument("zero link distance");
    const double c = kSpeedOfLight;
    LinkPair lp;
    lp.comm.tau = dC / c;
    lp.comm.f_D = 0.0;
    lp.comm.alpha = c * std::polar(1.0, -2.0 * kPi * fc * lp.comm.tau) / (4.0 * kPi * fc * dC);
    lp.radar.tau = 2.0 * dR / c;
    lp.radar.f_D = 2.0 * fc * s.v / c;
    lp.radar.alpha =
        c * s.rho * std::polar(1.0, -2.0 * kPi * fc * lp.radar.tau) / (4.0 * kPi * fc * 2.0 * dR);
    return lp;
}

double radar_sir(const VehicleState& s, std::size_t n)
{
    const double dC = s.p_C.norm();
    const double dR = target_position(s, n).norm();
    if (!(dC > 0) || !(dR > 0)) throw std::invalid_argument("zero link distance");
    return dC * dC / (4.0 * dR * dR);
}

}  // namespace isac
