#pragma once

// Time-index coincidence patterns for the symbol-moment products arising in
// the first-order perturbation variance. A pattern partitions a set of symbol
// factors (each a possibly conjugated x or y component) into blocks of equal
// time indices, distinct across blocks. Pattern moments are combined with
// partition-lattice Moebius coefficients into "free-sum" weights that pair
// with unconstrained tone-lattice kernel sums.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace nli {

using cdouble = std::complex<double>;

// One symbol factor inside a moment monomial.
struct MonoFactor {
    bool pol_y = false; // false: x component, true: y component
    bool conj = false;

    bool operator<(const MonoFactor& o) const {
        if (pol_y != o.pol_y) return !pol_y;
        return !conj && o.conj;
    }
    bool operator==(const MonoFactor& o) const { return pol_y == o.pol_y && conj == o.conj; }
};

// A block: the factors sharing one time slot. Canonical form is sorted.
struct MonoBlock {
    std::vector<MonoFactor> factors;

    void canonicalize();
    // exponents (ex, exc, ey, eyc)
    void exponents(int& ex, int& exc, int& ey, int& eyc) const;
    std::string key() const;
};

// A pattern within one channel's symbol stream: blocks at pairwise distinct
// times. pinned identifies the block tied to the probe symbol's slot (-1: none).
struct GroupPattern {
    std::vector<MonoBlock> blocks;
    int pinned = -1;

    // canonical: blocks sorted by key, pinned block first
    void canonicalize();
    std::string key() const;
};

// All set partitions of {0, ..., n-1}, each partition a list of blocks,
// blocks listed with ascending smallest element, elements ascending.
std::vector<std::vector<std::vector<int>>> set_partitions(int n);

// Moebius coefficient for a single merged block split into k sub-blocks:
// (-1)^(k-1) (k-1)!
double moebius_block(int k);

} // namespace nli
