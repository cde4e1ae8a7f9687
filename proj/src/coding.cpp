#include "isac/coding.hpp"

#include <array>
#include <limits>

namespace isac {

namespace {

// State s = (a[k-1] << 1) | a[k-2]. Returns next state, writes parity.
int step(int s, int u, int& parity)
{
    const int s1 = (s >> 1) & 1;
    const int s2 = s & 1;
    const int a = u ^ s1 ^ s2;
    parity = a ^ s1;
    return (a << 1) | s1;
}

}  // namespace

CodedBits encode(const Bits& bits)
{
    CodedBits out;
    out.systematic.reserve(bits.size() + CodeConfig::kTail);
    out.parity.reserve(bits.size() + CodeConfig::kTail);
    int s = 0;
    int par = 0;
    for (auto b : bits) {
        s = step(s, b & 1, par);
        out.systematic.push_back(b & 1);
        out.parity.push_back(static_cast<std::uint8_t>(par));
    }
    // Tail input cancels the feedback so the register drains to zero.
    for (int t = 0; t < CodeConfig::kTail; ++t) {
        const int u = ((s >> 1) & 1) ^ (s & 1);
        s = step(s, u, par);
        out.systematic.push_back(static_cast<std::uint8_t>(u));
        out.parity.push_back(static_cast<std::uint8_t>(par));
    }
    return out;
}

Bits viterbi_decode(const std::vector<double>& llr_sys, const std::vector<double>& llr_par)
{
    if (llr_sys.size() != llr_par.size()) throw std::invalid_argument("LLR length mismatch");
    const std::size_t n = llr_sys.size();
    if (n < static_cast<std::size_t>(CodeConfig::kTail)) throw std::invalid_argument("LLR sequence shorter than tail");

    constexpr int S = CodeConfig::kStates;
    constexpr double kNeg = -std::numeric_limits<double>::infinity();
    std::array<int, S * 2> next{};
    std::array<int, S * 2> outp{};
    for (int s = 0; s < S; ++s)
        for (int u = 0; u < 2; ++u) {
            int par = 0;
            next[s * 2 + u] = step(s, u, par);
            outp[s * 2 + u] = par;
        }

    std::array<double, S> pm;
    pm.fill(kNeg);
    pm[0] = 0.0;
    // prev[k][s] packs (previous state << 1 | input bit).
    std::vector<std::array<std::uint8_t, S>> prev(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::array<double, S> nm;
        nm.fill(kNeg);
        for (int s = 0; s < S; ++s) {
            if (pm[s] == kNeg) continue;
            for (int u = 0; u < 2; ++u) {
                const int ns = next[s * 2 + u];
                const double m = pm[s] + (u ? -llr_sys[k] : llr_sys[k]) +
                                 (outp[s * 2 + u] ? -llr_par[k] : llr_par[k]);
                if (m > nm[ns]) {
                    nm[ns] = m;
                    prev[k][ns] = static_cast<std::uint8_t>((s << 1) | u);
                }
            }
        }
        pm = nm;
    }
    if (pm[0] == kNeg) throw std::logic_error("terminated trellis unreachable");

    Bits all(n);
    int s = 0;
    for (std::size_t k = n; k-- > 0;) {
        const int e = prev[k][s];
        all[k] = static_cast<std::uint8_t>(e & 1);
        s = e >> 1;
    }
    all.resize(n - CodeConfig::kTail);
    return all;
}

std::vector<std::size_t> interleaver_permutation(std::size_t n, std::size_t rows)
{
    std::vector<std::size_t> perm(n);
    if (rows <= 1 || n == 0) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        return perm;
    }
    // Write row-wise into a rows x cols array, read column-wise; the
    // incomplete last row is skipped where empty.
    const std::size_t cols = (n + rows - 1) / rows;
    std::size_t k = 0;
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t idx = r * cols + c;
            if (idx < n) perm[k++] = idx;
        }
    return perm;
}

}  // namespace isac
