#include "nli/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "nli/patterns.hpp"

namespace nli {

std::array<VarFactor, 6> variance_factors(const Triple& t, const Triple& tp, int probe) {
    std::array<VarFactor, 6> f;
    f[0] = {t.ch_first(probe), false, PolVar::Q, true};
    f[1] = {t.ch_second(probe), false, PolVar::P, true};
    f[2] = {t.ch_conj(probe), true, PolVar::Q, true};
    f[3] = {tp.ch_first(probe), true, PolVar::Qp, false};
    f[4] = {tp.ch_second(probe), true, PolVar::P, false};
    f[5] = {tp.ch_conj(probe), false, PolVar::Qp, false};
    return f;
}

std::array<VarFactor, 4> projection_factors(const Triple& t, int probe) {
    std::array<VarFactor, 4> f;
    f[0] = {probe, true, PolVar::P, true}; // pinned probe symbol, conjugated
    f[1] = {t.ch_first(probe), false, PolVar::Q, true};
    f[2] = {t.ch_second(probe), false, PolVar::P, true};
    f[3] = {t.ch_conj(probe), true, PolVar::Q, true};
    return f;
}

std::string partition_id(const Partition& p) {
    Partition s = p;
    for (auto& b : s) std::sort(b.begin(), b.end());
    std::sort(s.begin(), s.end());
    std::string id;
    for (const auto& b : s) {
        id += '[';
        for (int e : b) id += static_cast<char>('0' + e);
        id += ']';
    }
    return id;
}

namespace {

struct BlockInfo {
    std::vector<int> tm, ts; // T-side member factor indices / signs
    std::vector<int> pm, ps; // T'-side
    int tlo = 0, thi = 0;    // achievable T-side signed sum
    int plo = 0, phi = 0;
    bool pinned = false;     // contains the pinned probe factor (projection only)
};

template <std::size_t NF>
std::vector<BlockInfo> build_blocks(const std::array<VarFactor, NF>& factors, const Partition& blocks,
                                    const ToneLattice& lat, int pinned_factor) {
    std::vector<BlockInfo> out;
    for (const auto& blk : blocks) {
        BlockInfo bi;
        for (int e : blk) {
            if (e == pinned_factor) {
                bi.pinned = true;
                continue; // the pinned symbol carries no tone variable
            }
            const auto& f = factors[static_cast<std::size_t>(e)];
            const int sign = f.conj ? -1 : 1;
            if (f.t_side) {
                bi.tm.push_back(e);
                bi.ts.push_back(sign);
            } else {
                bi.pm.push_back(e);
                bi.ps.push_back(sign);
            }
            const int clo = sign > 0 ? lat.lo() : -lat.hi();
            const int chi = sign > 0 ? lat.hi() : -lat.lo();
            if (f.t_side) {
                bi.tlo += clo;
                bi.thi += chi;
            } else {
                bi.plo += clo;
                bi.phi += chi;
            }
        }
        out.push_back(std::move(bi));
    }
    return out;
}

// Sums mu over all assignments of the listed blocks' side members subject to
// per-block signed-sum targets. Factor tone values land in m[]; the leaf
// callback reads them.
class SideSummer {
public:
    SideSummer(const std::vector<BlockInfo>& blocks, bool t_side, const ToneLattice& lat)
        : lat_(lat) {
        for (const auto& b : blocks) {
            const auto& mem = t_side ? b.tm : b.pm;
            const auto& sgn = t_side ? b.ts : b.ps;
            if (mem.empty()) continue;
            if (b.pinned && t_side) {
                // unconstrained block: all members free
                for (std::size_t j = 0; j < mem.size(); ++j) free_.push_back({mem[j], sgn[j]});
                unconstrained_.push_back(static_cast<int>(free_.size()));
                continue;
            }
            Group g;
            for (std::size_t j = 0; j + 1 < mem.size(); ++j) g.free_members.push_back({mem[j], sgn[j]});
            g.last = mem.back();
            g.last_sign = sgn.back();
            groups_.push_back(std::move(g));
        }
    }

    // targets: one per constrained group, in the order groups were added
    template <typename Leaf>
    cdouble sum(const std::vector<int>& targets, int m[], const Leaf& leaf) const {
        return rec_group(0, targets, m, leaf);
    }

    int n_groups() const { return static_cast<int>(groups_.size()); }

private:
    struct Member {
        int factor;
        int sign;
    };
    struct Group {
        std::vector<Member> free_members;
        int last = -1;
        int last_sign = 1;
    };

    template <typename Leaf>
    cdouble rec_group(std::size_t gi, const std::vector<int>& targets, int m[], const Leaf& leaf) const {
        if (gi == groups_.size()) return rec_free(0, m, leaf);
        const Group& g = groups_[gi];
        return rec_member(g, 0, targets[gi], gi, targets, m, leaf);
    }

    template <typename Leaf>
    cdouble rec_member(const Group& g, std::size_t mi, int remaining, std::size_t gi,
                       const std::vector<int>& targets, int m[], const Leaf& leaf) const {
        if (mi == g.free_members.size()) {
            const int val = g.last_sign * remaining; // solve sign*m == remaining
            if (!lat_.contains(val)) return cdouble(0.0, 0.0);
            m[g.last] = val;
            return rec_group(gi + 1, targets, m, leaf);
        }
        const Member& mem = g.free_members[mi];
        cdouble acc(0.0, 0.0);
        for (int v = lat_.lo(); v <= lat_.hi(); ++v) {
            m[mem.factor] = v;
            acc += rec_member(g, mi + 1, remaining - mem.sign * v, gi, targets, m, leaf);
        }
        return acc;
    }

    template <typename Leaf>
    cdouble rec_free(std::size_t fi, int m[], const Leaf& leaf) const {
        if (fi == free_.size()) return leaf(m);
        cdouble acc(0.0, 0.0);
        for (int v = lat_.lo(); v <= lat_.hi(); ++v) {
            m[free_[fi].factor] = v;
            acc += rec_free(fi + 1, m, leaf);
        }
        return acc;
    }

    std::vector<Group> groups_;
    std::vector<Member> free_; // members of unconstrained (pinned) blocks
    std::vector<int> unconstrained_;
    ToneLattice lat_;
};

} // namespace

cdouble eval_variance_kernel(const std::array<VarFactor, 6>& factors, const Partition& blocks,
                             const MuView& mu_t, const MuView& mu_tp, const ToneLattice& lat) {
    const int n = lat.n_tones;
    const auto infos = build_blocks(factors, blocks, lat, /*pinned_factor=*/-1);

    // classify blocks and order: mixed first (chi enumeration), then pure
    std::vector<int> mixed, pure_t, pure_tp;
    for (std::size_t b = 0; b < infos.size(); ++b) {
        const bool ht = !infos[b].tm.empty();
        const bool hp = !infos[b].pm.empty();
        if (ht && hp) mixed.push_back(static_cast<int>(b));
        else if (ht) pure_t.push_back(static_cast<int>(b));
        else pure_tp.push_back(static_cast<int>(b));
    }

    SideSummer sum_t(infos, true, lat);
    SideSummer sum_tp(infos, false, lat);
    // target order must match SideSummer's group order: blocks in input order
    // with non-empty side membership.
    std::vector<int> t_target_slot(infos.size(), -1), p_target_slot(infos.size(), -1);
    {
        int ts = 0, ps = 0;
        for (std::size_t b = 0; b < infos.size(); ++b) {
            if (!infos[b].tm.empty()) t_target_slot[b] = ts++;
            if (!infos[b].pm.empty()) p_target_slot[b] = ps++;
        }
    }
    std::vector<int> t_targets(static_cast<std::size_t>(sum_t.n_groups()));
    std::vector<int> p_targets(static_cast<std::size_t>(sum_tp.n_groups()));

    cdouble total(0.0, 0.0);
    int m_t[8], m_p[8];

    // recursion over blocks assigning (chi, w)
    std::function<void(std::size_t, int, int)> rec = [&](std::size_t idx, int sum_chi_pure, int sum_w) {
        if (idx == infos.size()) {
            const int mL = sum_chi_pure;
            if (!lat.contains(mL)) return;
            const int mLp = mL - n * sum_w;
            if (!lat.contains(mLp)) return;
            const cdouble st = sum_t.sum(t_targets, m_t, [&](const int* m) {
                return mu_t(m[0], m[1], mL);
            });
            if (st == cdouble(0.0, 0.0)) return;
            const cdouble stp = sum_tp.sum(p_targets, m_p, [&](const int* m) {
                return std::conj(mu_tp(m[3], m[4], mLp));
            });
            total += st * stp;
            return;
        }
        const BlockInfo& bi = infos[idx];
        const bool ht = !bi.tm.empty();
        const bool hp = !bi.pm.empty();
        if (ht && hp) {
            for (int chi = bi.tlo; chi <= bi.thi; ++chi) {
                // feasible w: w*n - chi must be an achievable T'-side sum
                const int wlo = static_cast<int>(std::ceil(static_cast<double>(bi.plo + chi) / n));
                const int whi = static_cast<int>(std::floor(static_cast<double>(bi.phi + chi) / n));
                for (int w = wlo; w <= whi; ++w) {
                    t_targets[static_cast<std::size_t>(t_target_slot[idx])] = chi;
                    p_targets[static_cast<std::size_t>(p_target_slot[idx])] = w * n - chi;
                    rec(idx + 1, sum_chi_pure + chi, sum_w + w);
                }
            }
        } else if (ht) {
            const int wlo = static_cast<int>(std::ceil(static_cast<double>(bi.tlo) / n));
            const int whi = static_cast<int>(std::floor(static_cast<double>(bi.thi) / n));
            for (int w = wlo; w <= whi; ++w) {
                t_targets[static_cast<std::size_t>(t_target_slot[idx])] = w * n;
                rec(idx + 1, sum_chi_pure + w * n, sum_w + w);
            }
        } else if (hp) {
            const int wlo = static_cast<int>(std::ceil(static_cast<double>(bi.plo) / n));
            const int whi = static_cast<int>(std::floor(static_cast<double>(bi.phi) / n));
            for (int w = wlo; w <= whi; ++w) {
                p_targets[static_cast<std::size_t>(p_target_slot[idx])] = w * n;
                rec(idx + 1, sum_chi_pure, sum_w + w);
            }
        } else {
            rec(idx + 1, sum_chi_pure, sum_w);
        }
    };
    rec(0, 0, 0);

    const double weight = std::pow(static_cast<double>(n), static_cast<double>(infos.size()) - 6.0);
    return total * weight;
}

cdouble eval_projection_kernel(const std::array<VarFactor, 4>& factors, const Partition& blocks,
                               const MuView& mu_t, const ToneLattice& lat) {
    const int n = lat.n_tones;
    const auto infos = build_blocks(factors, blocks, lat, /*pinned_factor=*/0);

    SideSummer sum_t(infos, true, lat);
    std::vector<int> t_target_slot(infos.size(), -1);
    int free_blocks = 0;
    {
        int ts = 0;
        for (std::size_t b = 0; b < infos.size(); ++b) {
            if (infos[b].pinned) continue;
            if (!infos[b].tm.empty()) t_target_slot[b] = ts++;
            ++free_blocks;
        }
    }
    std::vector<int> t_targets(static_cast<std::size_t>(sum_t.n_groups()));

    cdouble total(0.0, 0.0);
    int m_t[8];

    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
        if (idx == infos.size()) {
            total += sum_t.sum(t_targets, m_t, [&](const int* m) -> cdouble {
                const int mL = m[1] + m[2] - m[3];
                if (!lat.contains(mL)) return cdouble(0.0, 0.0);
                return mu_t(m[1], m[2], mL);
            });
            return;
        }
        const BlockInfo& bi = infos[idx];
        if (bi.pinned || bi.tm.empty()) {
            rec(idx + 1);
            return;
        }
        const int wlo = static_cast<int>(std::ceil(static_cast<double>(bi.tlo) / n));
        const int whi = static_cast<int>(std::floor(static_cast<double>(bi.thi) / n));
        for (int w = wlo; w <= whi; ++w) {
            t_targets[static_cast<std::size_t>(t_target_slot[idx])] = w * n;
            rec(idx + 1);
        }
    };
    rec(0);

    const double weight = std::pow(static_cast<double>(n), static_cast<double>(free_blocks) - 3.0);
    return total * weight;
}

// ---------------------------------------------------------------------------
// Spec-facing kernel sets

namespace {

// partitions of a (T,T') case: product of per-channel-group partitions
std::vector<Partition> case_partitions(const std::array<VarFactor, 6>& factors) {
    // group factor indices by channel
    std::map<int, std::vector<int>> groups;
    for (int e = 0; e < 6; ++e) groups[factors[static_cast<std::size_t>(e)].channel].push_back(e);

    std::vector<Partition> result;
    result.push_back({});
    for (const auto& [ch, members] : groups) {
        (void)ch;
        const auto& parts = set_partitions(static_cast<int>(members.size()));
        std::vector<Partition> next;
        for (const auto& base : result) {
            for (const auto& p : parts) {
                Partition np = base;
                for (const auto& blk : p) {
                    std::vector<int> b;
                    for (int e : blk) b.push_back(members[static_cast<std::size_t>(e)]);
                    np.push_back(std::move(b));
                }
                next.push_back(std::move(np));
            }
        }
        result = std::move(next);
    }
    return result;
}

KernelSet kernels_for_cases(int i, int k, const LinkSpec& link,
                            const std::vector<std::pair<Triple, Triple>>& cases, int n_tones,
                            bool with_error) {
    KernelSet ks;
    ks.probe = i;
    ks.interferer = k;
    ks.n_tones = n_tones;

    const auto eval_all = [&](int nt, std::map<std::string, cdouble>& out) {
        const MuTable tab_i(link, i, i, nt);
        std::unique_ptr<MuTable> tab_k;
        if (k != i) tab_k = std::make_unique<MuTable>(link, k, i, nt);
        const ToneLattice lat{nt, link.grid.symbol_rate / nt};
        for (const auto& [t, tp] : cases) {
            const auto factors = variance_factors(t, tp, i);
            const auto mu_of = [&](const Triple& tr) {
                if (tr.kind == TripleKind::Sci) return MuView(&tab_i, false);
                const MuTable* tb = tr.k == i ? &tab_i : tab_k.get();
                return MuView(tb, tr.kind == TripleKind::B);
            };
            const MuView mt = mu_of(t);
            const MuView mtp = mu_of(tp);
            for (const auto& part : case_partitions(factors)) {
                const std::string id = std::string(1, t.tag()) + tp.tag() + ":" + partition_id(part);
                out[id] = eval_variance_kernel(factors, part, mt, mtp, lat);
            }
        }
    };

    eval_all(n_tones, ks.values);
    if (with_error) {
        std::map<std::string, cdouble> coarse;
        eval_all(std::max(8, n_tones / 2), coarse);
        double rel = 0.0;
        double scale = 0.0;
        for (const auto& [id, v] : ks.values) scale = std::max(scale, std::abs(v));
        for (const auto& [id, v] : ks.values) {
            const auto it = coarse.find(id);
            if (it != coarse.end() && scale > 0.0)
                rel = std::max(rel, std::abs(v - it->second) / scale);
        }
        ks.error_estimate = rel;
    }
    return ks;
}

} // namespace

KernelSet sci_kernels(int i, const LinkSpec& link, int n_tones, bool with_error) {
    link.validate();
    const Triple s{TripleKind::Sci, i};
    return kernels_for_cases(i, i, link, {{s, s}}, n_tones, with_error);
}

KernelSet xpm_kernels(int i, int k, const LinkSpec& link, int n_tones, bool with_error) {
    link.validate();
    if (k == i) throw ConfigError("xpm_kernels: interferer must differ from probe channel");
    const Triple a{TripleKind::A, k};
    const Triple b{TripleKind::B, k};
    return kernels_for_cases(i, k, link, {{a, a}, {a, b}, {b, a}, {b, b}}, n_tones, with_error);
}

} // namespace nli
