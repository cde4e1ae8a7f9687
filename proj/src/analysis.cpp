#include "isac/analysis.hpp"

#include <cmath>

namespace isac {

double dirichlet_sq_ratio(double x, double num_period, double den_period, double limit)
{
    const double d = std::sin(kPi * x / den_period);
    if (std::abs(d) < 1e-9) return limit * limit;
    const double n = std::sin(kPi * x / num_period);
    return (n * n) / (d * d);
}

namespace {

// sin(πx)/sin(πx/n) with its limit ±n at the poles.
double dirichlet(double x, double n)
{
    const double d = std::sin(kPi * x / n);
    if (std::abs(d) < 1e-9) {
        const double k = std::round(x / n);
        return (std::fmod(std::abs(k) * (n - 1), 2.0) == 0.0) ? n : -n;
    }
    return std::sin(kPi * x) / d;
}

}  // namespace

RealMatrix interference_dispersion(const DispersionSpec& s, const std::vector<double>& tau_bins,
                                   const std::vector<double>& f_bins)
{
    const auto& w = s.w;
    const double Lc = static_cast<double>(w.Lc);
    const double N = static_cast<double>(w.Lc * w.Mos);
    const double pre = s.sigma2 * static_cast<double>(w.P) * Lc;
    RealMatrix out(tau_bins.size(), f_bins.size());
    for (std::size_t i = 0; i < tau_bins.size(); ++i) {
        const double x = tau_bins[i] + s.f_B * w.T;
        const double v = pre * dirichlet_sq_ratio(x, Lc, N, static_cast<double>(w.Mos));
        for (std::size_t j = 0; j < f_bins.size(); ++j) out(i, j) = v;
    }
    return out;
}

RealMatrix echo_dispersion(const DispersionSpec& s, const std::vector<double>& tau_bins,
                           const std::vector<double>& f_bins)
{
    const auto& w = s.w;
    const double N = static_cast<double>(w.Lc * w.Mos);
    const double P = static_cast<double>(w.P);
    const double pre = s.sigma2 * N * P;
    RealMatrix out(tau_bins.size(), f_bins.size());
    for (std::size_t i = 0; i < tau_bins.size(); ++i) {
        const double dt = dirichlet(tau_bins[i] - s.f_B * w.T, N);
        for (std::size_t j = 0; j < f_bins.size(); ++j)
            out(i, j) = pre * dirichlet(f_bins[j] - s.f_D * w.T_CPI(), P) * dt;
    }
    return out;
}

CMatrix synthesize_echo(const WaveformParams& w, cd gamma, double f_B, double f_D)
{
    const std::size_t n = w.samples_per_pulse();
    CMatrix z(n, w.P);
    for (std::size_t p = 0; p < w.P; ++p)
        for (std::size_t m = 0; m < n; ++m)
            z(m, p) = gamma * std::polar(1.0, 2.0 * kPi * (f_D * w.T_PRI * p - f_B * m * w.Ts()));
    return z;
}

CMatrix synthesize_interferer(const WaveformParams& w, cd gamma, double f_B, double f_D,
                              const SymbolFrame& I_C, const SymbolFrame& I_R)
{
    CMatrix z = synthesize_echo(w, gamma, f_B, f_D);
    for (std::size_t p = 0; p < w.P; ++p)
        for (std::size_t m = 0; m < z.rows; ++m) {
            const std::size_t l = m / w.Mos;
            const cd r = I_R.symbols(l, p);
            z(m, p) *= I_C.symbols(l, p) * std::conj(r) / std::norm(r);
        }
    return z;
}

CMatrix autocorr_zC_bruteforce(const WaveformParams& w, const PropagationPath& path,
                               std::size_t frames, Rng& rng, std::size_t max_dl, std::size_t max_dp)
{
    if (frames == 0) throw std::invalid_argument("zero frame count");
    const Constellation q(Modulation::QPSK);
    const double f_B = w.slope() * path.tau - path.f_D;
    std::uniform_int_distribution<std::size_t> pick(0, 3);
    auto random_frame = [&]() {
        SymbolFrame f{CMatrix(w.Lc, w.P), q, std::vector<std::uint8_t>(w.Lc * w.P, 0)};
        for (auto& s : f.symbols.data) s = q.points()[pick(rng)];
        return f;
    };
    CMatrix acc(max_dl + 1, max_dp + 1);
    for (std::size_t it = 0; it < frames; ++it) {
        const SymbolFrame ic = random_frame();
        const SymbolFrame ir = random_frame();
        const CMatrix z = synthesize_interferer(w, path.alpha, f_B, path.f_D, ic, ir);
        for (std::size_t dp = 0; dp <= max_dp; ++dp)
            for (std::size_t dl = 0; dl <= max_dl; ++dl) {
                cd s{};
                for (std::size_t p = dp; p < z.cols; ++p)
                    for (std::size_t m = dl; m < z.rows; ++m) s += z(m, p) * std::conj(z(m - dl, p - dp));
                acc(dl, dp) += s;
            }
    }
    for (auto& v : acc.data) v /= static_cast<double>(frames);
    return acc;
}

ResolutionAccuracy resolution_accuracy(const WaveformParams& w, double f_D_true, std::size_t Z_D)
{
    ResolutionAccuracy ra;
    ra.resolution = 1.0 / ((1.0 + static_cast<double>(Z_D)) * w.T_CPI());
    ra.accuracy = std::abs(f_D_true - ra.resolution * std::round(f_D_true / ra.resolution));
    return ra;
}

}  // namespace isac
