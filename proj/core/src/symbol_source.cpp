#include "nli/symbol_source.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nli {

namespace {

struct CKey {
    double re, im;
    bool operator<(const CKey& o) const {
        if (re != o.re) return re < o.re;
        return im < o.im;
    }
};

CKey key_of(const cdouble& z, double tol) {
    // snap to a tolerance grid so nearly-identical coordinates merge
    return {std::round(z.real() / tol) * tol, std::round(z.imag() / tol) * tol};
}

} // namespace

PolMarginal pol_marginal(const Constellation4D& c, double tol) {
    std::map<CKey, double> px, py;
    for (std::size_t m = 0; m < c.size(); ++m) {
        px[key_of(c.points[m].x, tol)] += c.probs[m];
        py[key_of(c.points[m].y, tol)] += c.probs[m];
    }
    if (px.size() != py.size())
        throw ConfigError("pol_marginal: polarizations have different marginals");
    PolMarginal out;
    double factor_check = 0.0;
    for (const auto& [k, p] : px) {
        out.points.emplace_back(k.re, k.im);
        out.probs.push_back(p);
    }
    // verify the joint factorizes as the product of marginals
    for (std::size_t m = 0; m < c.size(); ++m) {
        const auto kx = key_of(c.points[m].x, tol);
        const auto ky = key_of(c.points[m].y, tol);
        const auto ity = py.find(ky);
        const auto itx = px.find(kx);
        if (itx == px.end() || ity == py.end())
            throw ConfigError("pol_marginal: internal marginal lookup failure");
        factor_check = std::max(factor_check, std::abs(c.probs[m] - itx->second * ity->second));
    }
    if (factor_check > 100 * tol)
        throw ConfigError("pol_marginal: joint distribution does not factorize over polarizations "
                          "(max deviation " + std::to_string(factor_check) + ")");
    return out;
}

SymbolSource::SymbolSource(SourceMode mode, Constellation4D c, std::uint64_t seed)
    : mode_(mode), constellation_(std::move(c)), rng_(seed, 0x51f0), rng_y_(seed, 0x51f1) {}

SymbolSource SymbolSource::iid(const Constellation4D& c, std::uint64_t seed, int block_size) {
    if (block_size < 1) throw ConfigError("SymbolSource: block size must be >= 1");
    SymbolSource s(SourceMode::Iid, c, seed);
    s.block_length_ = block_size;
    s.cdf_.resize(c.size());
    double acc = 0.0;
    for (std::size_t m = 0; m < c.size(); ++m) {
        acc += c.probs[m];
        s.cdf_[m] = acc;
    }
    s.cdf_.back() = 1.0;
    return s;
}

SymbolSource SymbolSource::constant_composition(const Constellation4D& c, const CompositionBlock& block,
                                                std::uint64_t seed) {
    if (block.counts.size() != c.size())
        throw ConfigError("SymbolSource: composition size mismatch with constellation");
    SymbolSource s(SourceMode::ConstantComposition4D, c, seed);
    s.block_length_ = block.n;
    for (std::size_t m = 0; m < block.counts.size(); ++m) {
        if (block.counts[m] < 0) throw ConfigError("SymbolSource: negative composition count");
        for (int r = 0; r < block.counts[m]; ++r) s.multiset_.push_back(static_cast<int>(m));
    }
    if (static_cast<int>(s.multiset_.size()) != block.n)
        throw ConfigError("SymbolSource: composition counts do not sum to n");
    return s;
}

SymbolSource SymbolSource::per_pol_composition(const Constellation4D& c, const PolMarginal& marginal,
                                               const CompositionBlock& block2d, std::uint64_t seed) {
    if (block2d.counts.size() != marginal.points.size())
        throw ConfigError("SymbolSource: 2D composition size mismatch with marginal");
    SymbolSource s(SourceMode::ConstantCompositionPerPol, c, seed);
    s.block_length_ = block2d.n;
    s.pol_points_ = marginal.points;
    for (std::size_t m = 0; m < block2d.counts.size(); ++m) {
        if (block2d.counts[m] < 0) throw ConfigError("SymbolSource: negative composition count");
        for (int r = 0; r < block2d.counts[m]; ++r) s.pol_multiset_.push_back(static_cast<int>(m));
    }
    if (static_cast<int>(s.pol_multiset_.size()) != block2d.n)
        throw ConfigError("SymbolSource: 2D composition counts do not sum to n");
    return s;
}

std::vector<Jones> SymbolSource::next_block() {
    std::vector<Jones> out;
    out.reserve(static_cast<std::size_t>(block_length_));
    switch (mode_) {
        case SourceMode::Iid: {
            for (int i = 0; i < block_length_; ++i) {
                const double u = rng_.uniform();
                const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
                const std::size_t m = std::min<std::size_t>(
                    static_cast<std::size_t>(it - cdf_.begin()), constellation_.size() - 1);
                out.push_back(constellation_.points[m]);
            }
            break;
        }
        case SourceMode::ConstantComposition4D: {
            std::vector<int> perm = multiset_;
            for (std::size_t i = perm.size(); i > 1; --i)
                std::swap(perm[i - 1], perm[rng_.uniform_below(i)]);
            for (int idx : perm) out.push_back(constellation_.points[static_cast<std::size_t>(idx)]);
            break;
        }
        case SourceMode::ConstantCompositionPerPol: {
            std::vector<int> px = pol_multiset_;
            std::vector<int> py = pol_multiset_;
            for (std::size_t i = px.size(); i > 1; --i)
                std::swap(px[i - 1], px[rng_.uniform_below(i)]);
            for (std::size_t i = py.size(); i > 1; --i)
                std::swap(py[i - 1], py[rng_y_.uniform_below(i)]);
            for (int i = 0; i < block_length_; ++i)
                out.push_back({pol_points_[static_cast<std::size_t>(px[static_cast<std::size_t>(i)])],
                               pol_points_[static_cast<std::size_t>(py[static_cast<std::size_t>(i)])]});
            break;
        }
    }
    return out;
}

std::vector<Jones> SymbolSource::take(std::size_t n) {
    std::vector<Jones> out;
    out.reserve(n);
    while (out.size() < n) {
        auto b = next_block();
        for (auto& s : b) {
            out.push_back(s);
            if (out.size() == n) break;
        }
    }
    return out;
}

} // namespace nli
