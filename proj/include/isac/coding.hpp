#pragma once

#include "isac/types.hpp"

namespace isac {

// Recursive systematic code G(D) = [1, (1+D)/(1+D+D²)], memory 2,
// terminated with two tail bits.
struct CodeConfig {
    static constexpr int kMemory = 2;
    static constexpr int kStates = 4;
    static constexpr int kTail = 2;
    static constexpr double kRate = 0.5;
};

struct CodedBits {
    Bits systematic;  // input followed by the tail bits
    Bits parity;
};

CodedBits encode(const Bits& bits);

// Soft-input Viterbi over the terminated trellis. LLR > 0 favours bit 0.
// Inputs include the tail; the returned vector does not.
Bits viterbi_decode(const std::vector<double>& llr_sys, const std::vector<double>& llr_par);

// Row-column block interleaver over `rows` rows (rows <= 1: identity).
template <class T>
std::vector<T> interleave(const std::vector<T>& x, std::size_t rows);
template <class T>
std::vector<T> deinterleave(const std::vector<T>& x, std::size_t rows);

std::vector<std::size_t> interleaver_permutation(std::size_t n, std::size_t rows);

template <class T>
std::vector<T> interleave(const std::vector<T>& x, std::size_t rows)
{
    const auto perm = interleaver_permutation(x.size(), rows);
    std::vector<T> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[perm[i]];
    return y;
}

template <class T>
std::vector<T> deinterleave(const std::vector<T>& x, std::size_t rows)
{
    const auto perm = interleaver_permutation(x.size(), rows);
    std::vector<T> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[perm[i]] = x[i];
    return y;
}

}  // namespace isac
