#pragma once

// Symbol stream generation: i.i.d. draws or constant-composition blocks
// (each block an independent uniform permutation of a fixed multiset).
// Constant composition comes in two flavours: a joint 4D composition, or one
// 2D composition per polarization (independent streams, aligned blocks).

#include <cstdint>
#include <memory>
#include <vector>

#include "nli/constellation.hpp"
#include "nli/rng.hpp"
#include "nli/shaping.hpp"

namespace nli {

enum class SourceMode { Iid, ConstantComposition4D, ConstantCompositionPerPol };

// The per-polarization marginal of a 4D product constellation, used for
// per-polarization composition matching.
struct PolMarginal {
    std::vector<cdouble> points;
    std::vector<double> probs;
};

// Extracts the 2D marginal of a constellation whose distribution factorizes
// over polarizations (throws ConfigError otherwise).
PolMarginal pol_marginal(const Constellation4D& c, double tol = 1e-9);

class SymbolSource {
public:
    // i.i.d. symbols from the constellation's distribution
    static SymbolSource iid(const Constellation4D& c, std::uint64_t seed, int block_size = 1024);

    // joint 4D constant composition with blocklength block.n
    static SymbolSource constant_composition(const Constellation4D& c, const CompositionBlock& block,
                                             std::uint64_t seed);

    // per-polarization 2D constant composition (independent x/y streams)
    static SymbolSource per_pol_composition(const Constellation4D& c, const PolMarginal& marginal,
                                            const CompositionBlock& block2d, std::uint64_t seed);

    SourceMode mode() const { return mode_; }
    const Constellation4D& constellation() const { return constellation_; }
    int block_length() const { return block_length_; }

    // Next block of symbols: block_length() of them. For the composition modes
    // every call yields a fresh independent permutation of the block multiset.
    std::vector<Jones> next_block();

    // convenience: concatenate blocks until at least n symbols, truncate to n
    std::vector<Jones> take(std::size_t n);

private:
    SymbolSource(SourceMode mode, Constellation4D c, std::uint64_t seed);

    SourceMode mode_;
    Constellation4D constellation_;
    Rng rng_;
    int block_length_ = 0;

    // iid sampling
    std::vector<double> cdf_;

    // joint composition: multiset of point indices
    std::vector<int> multiset_;

    // per-pol composition
    std::vector<cdouble> pol_points_;
    std::vector<int> pol_multiset_;
    Rng rng_y_;
};

} // namespace nli
