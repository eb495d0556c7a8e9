#pragma once

// Statistical moments of modulation formats, pattern-classified by time-index
// coincidence. Providers serve two quantities per channel-group pattern:
//   pattern_moment:  joint moment with the pattern's blocks at pairwise
//                    distinct time slots,
//   group_cumulant:  the Moebius combination over refinements that pairs with
//                    unconstrained tone-lattice kernel sums.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nli/constellation.hpp"
#include "nli/patterns.hpp"
#include "nli/shaping.hpp"
#include "nli/symbol_source.hpp"

namespace nli {

class MomentProvider {
public:
    virtual ~MomentProvider() = default;

    // Joint moment over pairwise-distinct times. Blocks see the same symbol;
    // different blocks see symbols at different slots of the same stream.
    virtual cdouble pattern_moment(const GroupPattern& pat) const = 0;

    // Standard error of the pattern_moment estimate (0 for exact providers).
    virtual double pattern_stderr(const GroupPattern&) const { return 0.0; }

    virtual std::string label() const = 0;

    // Moebius-weighted sum over refinements of pat (per-block sub-partitions).
    cdouble group_cumulant(const GroupPattern& pat) const;

private:
    mutable std::unordered_map<std::string, cdouble> cum_cache_;
    mutable std::mutex cum_mutex_;
};

// Exact i.i.d. moments of a constellation by enumeration.
class ConstellationMoments : public MomentProvider {
public:
    explicit ConstellationMoments(Constellation4D c);
    cdouble pattern_moment(const GroupPattern& pat) const override;
    std::string label() const override { return label_; }

    cdouble block_moment(const MonoBlock& b) const;

private:
    Constellation4D c_;
    std::string label_;
    mutable std::unordered_map<std::string, cdouble> block_cache_;
    mutable std::mutex mutex_;
};

// Unit-power dual-polarization circularly-symmetric Gaussian reference.
class GaussianMoments : public MomentProvider {
public:
    cdouble pattern_moment(const GroupPattern& pat) const override;
    std::string label() const override { return "gaussian"; }
};

// i.i.d. moments with every block factorized across polarizations
// (the independent-polarization assumption of the EGN baseline).
class EgnMoments : public MomentProvider {
public:
    explicit EgnMoments(Constellation4D c);
    cdouble pattern_moment(const GroupPattern& pat) const override;
    std::string label() const override { return label_; }

private:
    ConstellationMoments inner_;
    std::string label_;
};

// Exact moments of constant-composition streams under the uniform-permutation
// block model: hypergeometric within-block statistics combined with the
// geometry of a length-W observation window sliding over length-n blocks.
class CompositionMoments : public MomentProvider {
public:
    // joint 4D composition; aligned=true pins the window start to a block
    // boundary (periodic-frame semantics), otherwise all offsets are averaged.
    CompositionMoments(Constellation4D c, CompositionBlock block, int window, bool aligned = false);
    // per-polarization 2D composition (independent aligned streams)
    CompositionMoments(Constellation4D c, PolMarginal marginal, CompositionBlock block2d, int window,
                       bool aligned = false);

    cdouble pattern_moment(const GroupPattern& pat) const override;
    std::string label() const override { return label_; }
    int window() const { return window_; }

private:
    struct Stream {
        // multiset values per 2D point (or 4D joint); counts
        std::vector<Jones> points;   // for joint mode
        std::vector<cdouble> pts2d;  // for per-pol mode
        std::vector<int> counts;
        int n = 0;
        bool per_pol = false;
    };

    cdouble stream_pattern_moment(const std::vector<MonoBlock>& blocks, bool use_y) const;
    cdouble multiset_distinct_moment(const std::vector<MonoBlock>& blocks, bool use_y) const;
    cdouble multiset_power_sum(const MonoBlock& combined, bool use_y) const;

    Constellation4D c_;
    Stream stream_;
    int window_;
    bool aligned_ = false;
    std::string label_;
    mutable std::unordered_map<std::string, cdouble> cache_;
    mutable std::mutex mutex_;
};

// Sampling estimator of windowed pattern moments over an arbitrary source
// (the windowed_moments operation). Deterministic given the source seed.
class SampledWindowMoments : public MomentProvider {
public:
    SampledWindowMoments(SymbolSource src, int window, int n_windows);

    cdouble pattern_moment(const GroupPattern& pat) const override;
    double pattern_stderr(const GroupPattern& pat) const override;
    std::string label() const override { return label_; }
    int window() const { return window_; }

private:
    struct Est {
        cdouble mean;
        double se;
    };
    Est estimate(const GroupPattern& pat) const;

    std::vector<Jones> stream_;
    int window_;
    int n_windows_;
    std::string label_;
    mutable std::unordered_map<std::string, Est> cache_;
    mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Reporting snapshot (serializable): class id -> value (+- stderr).

struct MomentSet {
    std::string format_label;
    std::optional<int> window;
    std::map<std::string, cdouble> values;
    std::map<std::string, double> stderrs;

    std::string serialize() const;
};

// The documented reporting catalog of pattern classes.
std::vector<GroupPattern> moment_catalog();

MomentSet exact_iid_moments(const Constellation4D& c);
MomentSet gaussian_reference();
MomentSet windowed_moments(SymbolSource src, int window, int n_windows);
MomentSet snapshot_moments(const MomentProvider& provider, std::optional<int> window = std::nullopt);

} // namespace nli
