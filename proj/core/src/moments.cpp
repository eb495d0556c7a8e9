#include "nli/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace nli {

namespace {

const std::vector<std::vector<std::vector<int>>>& partitions_of(int n) {
    static std::vector<std::vector<std::vector<std::vector<int>>>> table = [] {
        std::vector<std::vector<std::vector<std::vector<int>>>> t;
        for (int k = 0; k <= 7; ++k) t.push_back(set_partitions(k));
        return t;
    }();
    return table[static_cast<std::size_t>(n)];
}

double falling(double x, int k) {
    double f = 1.0;
    for (int i = 0; i < k; ++i) f *= (x - i);
    return f;
}

cdouble eval_monomial(const Jones& s, const MonoBlock& b) {
    cdouble v(1.0, 0.0);
    for (const auto& f : b.factors) {
        const cdouble base = f.pol_y ? s.y : s.x;
        v *= f.conj ? std::conj(base) : base;
    }
    return v;
}

cdouble eval_monomial_2d(const cdouble& s, const MonoBlock& b) {
    cdouble v(1.0, 0.0);
    for (const auto& f : b.factors) v *= f.conj ? std::conj(s) : s;
    return v;
}

MonoBlock merge_blocks(const std::vector<MonoBlock>& blocks, const std::vector<int>& which) {
    MonoBlock out;
    for (int i : which)
        for (const auto& f : blocks[static_cast<std::size_t>(i)].factors) out.factors.push_back(f);
    out.canonicalize();
    return out;
}

// Ordered-distinct-slot sum identity: for blocks g_1..g_G at pairwise distinct
// slots, sum over slots = sum over partitions tau of blocks of
// prod_classes moebius(|c|) * S(merged monomial of c), with S a plain slot sum.
template <typename PowerSum>
cdouble distinct_sum(const std::vector<MonoBlock>& blocks, const PowerSum& power_sum) {
    const int g = static_cast<int>(blocks.size());
    cdouble total(0.0, 0.0);
    for (const auto& tau : partitions_of(g)) {
        cdouble term(1.0, 0.0);
        for (const auto& cls : tau) {
            term *= moebius_block(static_cast<int>(cls.size()));
            term *= power_sum(merge_blocks(blocks, cls));
        }
        total += term;
    }
    return total;
}

} // namespace

// ---------------------------------------------------------------------------
// MomentProvider: Moebius combination over refinements

cdouble MomentProvider::group_cumulant(const GroupPattern& pat) const {
    const std::string key = pat.key();
    {
        std::lock_guard<std::mutex> lock(cum_mutex_);
        const auto it = cum_cache_.find(key);
        if (it != cum_cache_.end()) return it->second;
    }

    // enumerate refinements: a sub-partition per block
    const int nb = static_cast<int>(pat.blocks.size());
    cdouble total(0.0, 0.0);
    std::vector<std::size_t> choice(static_cast<std::size_t>(nb), 0);
    while (true) {
        double coeff = 1.0;
        GroupPattern refined;
        refined.pinned = -1;
        for (int b = 0; b < nb; ++b) {
            const auto& block = pat.blocks[static_cast<std::size_t>(b)];
            const auto& subs = partitions_of(static_cast<int>(block.factors.size()));
            const auto& sub = subs[choice[static_cast<std::size_t>(b)]];
            coeff *= moebius_block(static_cast<int>(sub.size()));
            for (const auto& sb : sub) {
                MonoBlock nbk;
                for (int idx : sb) nbk.factors.push_back(block.factors[static_cast<std::size_t>(idx)]);
                nbk.canonicalize();
                refined.blocks.push_back(std::move(nbk));
            }
        }
        total += coeff * pattern_moment(refined);

        // advance the mixed-radix counter
        int b = 0;
        for (; b < nb; ++b) {
            const auto& subs = partitions_of(static_cast<int>(pat.blocks[static_cast<std::size_t>(b)].factors.size()));
            if (++choice[static_cast<std::size_t>(b)] < subs.size()) break;
            choice[static_cast<std::size_t>(b)] = 0;
        }
        if (b == nb) break;
    }

    std::lock_guard<std::mutex> lock(cum_mutex_);
    cum_cache_.emplace(key, total);
    return total;
}

// ---------------------------------------------------------------------------
// ConstellationMoments

ConstellationMoments::ConstellationMoments(Constellation4D c) : c_(std::move(c)) {
    label_ = c_.label;
}

cdouble ConstellationMoments::block_moment(const MonoBlock& b) const {
    const std::string key = b.key();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = block_cache_.find(key);
        if (it != block_cache_.end()) return it->second;
    }
    int ex, exc, ey, eyc;
    b.exponents(ex, exc, ey, eyc);
    const cdouble v = c_.raw_moment(ex, exc, ey, eyc);
    std::lock_guard<std::mutex> lock(mutex_);
    block_cache_.emplace(key, v);
    return v;
}

cdouble ConstellationMoments::pattern_moment(const GroupPattern& pat) const {
    cdouble v(1.0, 0.0);
    for (const auto& b : pat.blocks) v *= block_moment(b);
    return v;
}

// ---------------------------------------------------------------------------
// GaussianMoments

cdouble GaussianMoments::pattern_moment(const GroupPattern& pat) const {
    double v = 1.0;
    for (const auto& b : pat.blocks) {
        int ex, exc, ey, eyc;
        b.exponents(ex, exc, ey, eyc);
        if (ex != exc || ey != eyc) return cdouble(0.0, 0.0);
        double m = 1.0;
        for (int i = 2; i <= ex; ++i) m *= i;
        for (int i = 2; i <= ey; ++i) m *= i;
        v *= m;
    }
    return cdouble(v, 0.0);
}

// ---------------------------------------------------------------------------
// EgnMoments

EgnMoments::EgnMoments(Constellation4D c) : inner_(std::move(c)) {
    label_ = inner_.label() + "-egn";
}

cdouble EgnMoments::pattern_moment(const GroupPattern& pat) const {
    cdouble v(1.0, 0.0);
    for (const auto& b : pat.blocks) {
        MonoBlock bx, by;
        for (const auto& f : b.factors) (f.pol_y ? by : bx).factors.push_back(f);
        bx.canonicalize();
        by.canonicalize();
        v *= inner_.block_moment(bx) * inner_.block_moment(by);
    }
    return v;
}

// ---------------------------------------------------------------------------
// CompositionMoments

CompositionMoments::CompositionMoments(Constellation4D c, CompositionBlock block, int window, bool aligned)
    : c_(std::move(c)), window_(window), aligned_(aligned) {
    if (window_ < 1) throw ConfigError("CompositionMoments: window must be >= 1");
    stream_.per_pol = false;
    stream_.points = c_.points;
    stream_.counts = block.counts;
    stream_.n = block.n;
    label_ = c_.label + "-cc" + std::to_string(block.n);
}

CompositionMoments::CompositionMoments(Constellation4D c, PolMarginal marginal, CompositionBlock block2d,
                                       int window, bool aligned)
    : c_(std::move(c)), window_(window), aligned_(aligned) {
    if (window_ < 1) throw ConfigError("CompositionMoments: window must be >= 1");
    stream_.per_pol = true;
    stream_.pts2d = marginal.points;
    stream_.counts = block2d.counts;
    stream_.n = block2d.n;
    label_ = c_.label + "-ccpol" + std::to_string(block2d.n);
}

cdouble CompositionMoments::multiset_power_sum(const MonoBlock& combined, bool use_y) const {
    cdouble s(0.0, 0.0);
    if (stream_.per_pol) {
        for (std::size_t p = 0; p < stream_.pts2d.size(); ++p)
            s += static_cast<double>(stream_.counts[p]) * eval_monomial_2d(stream_.pts2d[p], combined);
    } else {
        (void)use_y;
        for (std::size_t p = 0; p < stream_.points.size(); ++p)
            s += static_cast<double>(stream_.counts[p]) * eval_monomial(stream_.points[p], combined);
    }
    return s;
}

cdouble CompositionMoments::multiset_distinct_moment(const std::vector<MonoBlock>& blocks, bool use_y) const {
    if (blocks.empty()) return cdouble(1.0, 0.0);
    const cdouble d = distinct_sum(blocks, [&](const MonoBlock& m) { return multiset_power_sum(m, use_y); });
    return d / falling(static_cast<double>(stream_.n), static_cast<int>(blocks.size()));
}

// Window geometry: a length-W window at offset o over length-n blocks splits
// into intervals; pattern times are assigned to intervals; within one block
// interval the draws are without replacement from the multiset.
cdouble CompositionMoments::stream_pattern_moment(const std::vector<MonoBlock>& blocks, bool) const {
    const int g = static_cast<int>(blocks.size());
    if (g == 0) return cdouble(1.0, 0.0);
    const int w = window_;
    const int n = stream_.n;

    cdouble accum(0.0, 0.0);
    const int n_offsets = aligned_ ? 1 : n; // average over block phases unless aligned
    for (int o = 0; o < n_offsets; ++o) {
        // interval lengths within the window
        std::vector<int> len;
        int pos = 0;
        int first = std::min(w, n - o % n);
        len.push_back(first);
        pos += first;
        while (pos < w) {
            const int l = std::min(n, w - pos);
            len.push_back(l);
            pos += l;
        }
        const int ni = static_cast<int>(len.size());

        // sum over partitions of blocks into groups, each group in one interval
        cdouble offset_sum(0.0, 0.0);
        for (const auto& rho : partitions_of(g)) {
            const int r = static_cast<int>(rho.size());
            // value of each group: product of per-polarization distinct moments
            cdouble vprod(1.0, 0.0);
            for (const auto& grp : rho) {
                std::vector<MonoBlock> sub;
                for (int b : grp) sub.push_back(blocks[static_cast<std::size_t>(b)]);
                if (stream_.per_pol) {
                    std::vector<MonoBlock> sx, sy;
                    for (const auto& blk : sub) {
                        MonoBlock bx, by;
                        for (const auto& f : blk.factors) (f.pol_y ? by : bx).factors.push_back(f);
                        if (!bx.factors.empty()) { bx.canonicalize(); sx.push_back(bx); }
                        if (!by.factors.empty()) { by.canonicalize(); sy.push_back(by); }
                    }
                    vprod *= multiset_distinct_moment(sx, false) * multiset_distinct_moment(sy, true);
                } else {
                    vprod *= multiset_distinct_moment(sub, false);
                }
            }
            // injective assignments of groups to intervals, weighted by
            // falling factorials of interval lengths
            std::vector<int> gsize;
            for (const auto& grp : rho) gsize.push_back(static_cast<int>(grp.size()));
            // DP over groups with used-interval mask is exponential in intervals;
            // recurse over groups with a used mask over intervals (ni can be ~11).
            std::function<double(int, std::uint64_t)> assign = [&](int gi, std::uint64_t used) -> double {
                if (gi == r) return 1.0;
                double s = 0.0;
                for (int j = 0; j < ni; ++j) {
                    if (used & (1ULL << j)) continue;
                    const double fbase = falling(static_cast<double>(len[static_cast<std::size_t>(j)]),
                                                 gsize[static_cast<std::size_t>(gi)]);
                    if (fbase != 0.0) s += fbase * assign(gi + 1, used | (1ULL << j));
                }
                return s;
            };
            offset_sum += vprod * assign(0, 0);
        }
        accum += offset_sum;
    }
    accum /= static_cast<double>(n_offsets);
    accum /= falling(static_cast<double>(w), g);
    return accum;
}

cdouble CompositionMoments::pattern_moment(const GroupPattern& pat) const {
    const std::string key = pat.key();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const cdouble v = stream_pattern_moment(pat.blocks, false);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, v);
    return v;
}

// ---------------------------------------------------------------------------
// SampledWindowMoments

SampledWindowMoments::SampledWindowMoments(SymbolSource src, int window, int n_windows)
    : window_(window), n_windows_(n_windows) {
    if (window < 1) throw ConfigError("windowed_moments: W must be >= 1");
    if (n_windows < 2) throw ConfigError("windowed_moments: need at least 2 windows");
    label_ = src.constellation().label + "-windowed";
    stream_ = src.take(static_cast<std::size_t>(window) * static_cast<std::size_t>(n_windows));
}

SampledWindowMoments::Est SampledWindowMoments::estimate(const GroupPattern& pat) const {
    const int g = static_cast<int>(pat.blocks.size());
    const double norm = falling(static_cast<double>(window_), g);
    if (norm <= 0.0)
        throw ConfigError("windowed_moments: window shorter than the pattern block count");

    cdouble sum(0.0, 0.0);
    double sum_sq = 0.0;
    std::vector<cdouble> per_window(static_cast<std::size_t>(n_windows_));
    for (int wnd = 0; wnd < n_windows_; ++wnd) {
        const Jones* base = stream_.data() + static_cast<std::size_t>(wnd) * static_cast<std::size_t>(window_);
        const auto power_sum = [&](const MonoBlock& m) {
            cdouble s(0.0, 0.0);
            for (int t = 0; t < window_; ++t) s += eval_monomial(base[t], m);
            return s;
        };
        const cdouble v = distinct_sum(pat.blocks, power_sum) / norm;
        per_window[static_cast<std::size_t>(wnd)] = v;
        sum += v;
    }
    const cdouble mean = sum / static_cast<double>(n_windows_);
    for (const auto& v : per_window) sum_sq += std::norm(v - mean);
    const double se = std::sqrt(sum_sq / (static_cast<double>(n_windows_) *
                                          std::max(1.0, static_cast<double>(n_windows_ - 1))));
    return {mean, se};
}

cdouble SampledWindowMoments::pattern_moment(const GroupPattern& pat) const {
    const std::string key = pat.key();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second.mean;
    }
    const Est e = estimate(pat);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, e);
    return e.mean;
}

double SampledWindowMoments::pattern_stderr(const GroupPattern& pat) const {
    const std::string key = pat.key();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second.se;
    }
    const Est e = estimate(pat);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, e);
    return e.se;
}

// ---------------------------------------------------------------------------
// MomentSet

namespace {

GroupPattern single_block_pattern(const std::string& spec) {
    GroupPattern p;
    MonoBlock cur;
    for (char ch : spec) {
        if (ch == '|') {
            cur.canonicalize();
            p.blocks.push_back(cur);
            cur = MonoBlock{};
            continue;
        }
        MonoFactor f;
        f.pol_y = (ch == 'y' || ch == 'Y');
        f.conj = (ch == 'X' || ch == 'Y');
        cur.factors.push_back(f);
    }
    cur.canonicalize();
    p.blocks.push_back(cur);
    return p;
}

} // namespace

std::vector<GroupPattern> moment_catalog() {
    std::vector<GroupPattern> out;
    // every single-slot monomial up to sixth order (the classes the kernel
    // pairing can request from an i.i.d. format)
    for (int deg = 1; deg <= 6; ++deg) {
        for (int ex = 0; ex <= deg; ++ex)
            for (int exc = 0; exc + ex <= deg; ++exc)
                for (int ey = 0; ey + ex + exc <= deg; ++ey) {
                    const int eyc = deg - ex - exc - ey;
                    GroupPattern p;
                    MonoBlock b;
                    for (int i = 0; i < ex; ++i) b.factors.push_back({false, false});
                    for (int i = 0; i < exc; ++i) b.factors.push_back({false, true});
                    for (int i = 0; i < ey; ++i) b.factors.push_back({true, false});
                    for (int i = 0; i < eyc; ++i) b.factors.push_back({true, true});
                    b.canonicalize();
                    p.blocks.push_back(std::move(b));
                    out.push_back(std::move(p));
                }
    }
    // representative multi-slot (windowed) classes
    static const char* kMulti[] = {"xX|xX", "yY|yY", "xX|yY", "xxXX|xX", "xX|xX|xX"};
    for (const char* s : kMulti) out.push_back(single_block_pattern(s));
    return out;
}

std::string MomentSet::serialize() const {
    std::ostringstream os;
    os << "format: " << format_label << "\n";
    if (window) os << "window: " << *window << "\n";
    char buf[160];
    for (const auto& [k, v] : values) {
        const auto it = stderrs.find(k);
        const double se = it == stderrs.end() ? 0.0 : it->second;
        if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v.real())))
            std::snprintf(buf, sizeof(buf), "%s: %.12g%+.12gi +- %.3g\n", k.c_str(), v.real(), v.imag(), se);
        else
            std::snprintf(buf, sizeof(buf), "%s: %.12g +- %.3g\n", k.c_str(), v.real(), se);
        os << buf;
    }
    return os.str();
}

MomentSet snapshot_moments(const MomentProvider& provider, std::optional<int> window) {
    MomentSet ms;
    ms.format_label = provider.label();
    ms.window = window;
    for (const auto& pat : moment_catalog()) {
        ms.values[pat.key()] = provider.pattern_moment(pat);
        ms.stderrs[pat.key()] = provider.pattern_stderr(pat);
    }
    return ms;
}

MomentSet exact_iid_moments(const Constellation4D& c) {
    ConstellationMoments p(c);
    return snapshot_moments(p);
}

MomentSet gaussian_reference() {
    GaussianMoments p;
    return snapshot_moments(p);
}

MomentSet windowed_moments(SymbolSource src, int window, int n_windows) {
    SampledWindowMoments p(std::move(src), window, n_windows);
    return snapshot_moments(p, window);
}

} // namespace nli
