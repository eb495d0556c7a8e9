#pragma once

// Probabilistic shaping: Maxwell-Boltzmann entropy fitting and integer
// composition quantization for constant-composition streams.

#include <vector>

#include "nli/constellation.hpp"

namespace nli {

struct MaxwellBoltzmannPS {
    Constellation4D base;       // uniform base constellation (normalized)
    double lambda = 0.0;        // shaping rate parameter, >= 0
    double target_entropy_bits = 0.0;
    std::vector<double> probs;  // induced distribution p_m proportional to exp(-lambda E_m)

    // Base coordinates with the shaped distribution, re-normalized to unit
    // power per polarization.
    Constellation4D shaped() const;
};

// Finds lambda by bisection so the Maxwell-Boltzmann distribution over the
// base constellation's 4D point energies meets the target entropy to 1e-9 bits.
MaxwellBoltzmannPS fit_mb_entropy(const Constellation4D& base, double target_entropy_bits);

struct CompositionBlock {
    int n = 0;                // blocklength in symbols
    std::vector<int> counts;  // per-point occurrence counts, sum == n
};

// Integer composition of n minimizing KL divergence to dist: floor(n p) plus
// largest-remainder assignment of the leftover, ties broken by point index.
CompositionBlock quantize_composition(const std::vector<double>& dist, int n);

// KL(counts/n || dist) in bits; +inf if counts place mass where dist has none.
double composition_kl_bits(const CompositionBlock& block, const std::vector<double>& dist);

} // namespace nli
