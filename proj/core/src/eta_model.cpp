#include "nli/eta_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nli/patterns.hpp"

namespace nli {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<Triple> probe_triples(int probe, int n_channels) {
    std::vector<Triple> ts;
    ts.push_back({TripleKind::Sci, probe});
    for (int k = 1; k <= n_channels; ++k) {
        if (k == probe) continue;
        ts.push_back({TripleKind::A, k});
        ts.push_back({TripleKind::B, k});
    }
    return ts;
}

std::string case_key(int probe, const Triple& t, const Triple& tp) {
    std::ostringstream os;
    os << probe << ':' << t.tag() << t.k << ':' << tp.tag() << tp.k;
    return os.str();
}

bool assign_pol(PolVar v, int combo) {
    // combo bits: 0 -> q, 1 -> q', 2 -> p; bit set = y polarization
    switch (v) {
        case PolVar::Q: return combo & 1;
        case PolVar::Qp: return combo & 2;
        case PolVar::P: return combo & 4;
    }
    return false;
}

// per-channel-group patterns of one partition under one polarization combo
template <std::size_t NF>
cdouble partition_weight(const std::array<VarFactor, NF>& factors, const Partition& part, int combo,
                         int probe, const EtaModel::ProviderFn& providers, int pinned_factor) {
    // group blocks by channel
    std::map<int, GroupPattern> groups;
    for (const auto& blk : part) {
        int ch = -1;
        MonoBlock mb;
        bool has_pinned = false;
        for (int e : blk) {
            const auto& f = factors[static_cast<std::size_t>(e)];
            if (ch < 0) ch = f.channel;
            if (f.channel != ch) return cdouble(0.0, 0.0); // cross-channel block: zero weight
            if (e == pinned_factor) has_pinned = true;
            mb.factors.push_back({assign_pol(f.pol, combo), f.conj});
        }
        mb.canonicalize();
        auto& gp = groups[ch];
        gp.blocks.push_back(std::move(mb));
        if (has_pinned) gp.pinned = static_cast<int>(gp.blocks.size()) - 1;
    }
    cdouble w(1.0, 0.0);
    for (auto& [ch, gp] : groups) {
        const auto provider = providers(ch, probe);
        w *= provider->group_cumulant(gp);
        if (w == cdouble(0.0, 0.0)) return w;
    }
    return w;
}

} // namespace

int dispersion_memory_window(const LinkSpec& link, int i, int k, int blocklength) {
    const double df = i == k ? link.grid.symbol_rate
                             : std::abs(link.grid.channel_freq(k) - link.grid.channel_freq(i));
    const double l_tot = link.fiber.span_length * link.fiber.num_spans;
    const double w = 2.0 * M_PI * std::abs(link.fiber.beta2) * l_tot * df * link.grid.symbol_rate;
    int wi = static_cast<int>(std::ceil(w));
    wi = std::max(1, wi);
    if (blocklength > 0) wi = std::min(wi, 10 * blocklength);
    return wi;
}

struct EtaModel::CaseData {
    std::array<VarFactor, 6> factors;
    std::vector<Partition> partitions;
    std::vector<cdouble> kernels;
    std::vector<char> ready;
    Triple t, tp;
};

EtaModel::EtaModel(LinkSpec link, ModelOptions opt)
    : link_(std::move(link)), opt_(opt), profile_(link_.fiber, link_.grid) {
    link_.validate();
    if (opt_.n_tones < 4) throw ConfigError("model: n_tones must be >= 4");
}

std::shared_ptr<const MuTable> EtaModel::table(int ch_a, int probe) const {
    const std::string key = std::to_string(ch_a) + ":" + std::to_string(probe);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
    auto tab = std::make_shared<const MuTable>(link_, ch_a, probe, opt_.n_tones);
    if (tables_.size() >= 52) tables_.clear(); // bounded memory; rebuilt on demand
    tables_.emplace(key, tab);
    return tab;
}

const EtaModel::CaseData& EtaModel::case_data(int probe, const Triple& t, const Triple& tp) const {
    const std::string key = case_key(probe, t, tp);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cases_.find(key);
        if (it != cases_.end()) return *it->second;
    }
    auto cd = std::make_shared<CaseData>();
    cd->t = t;
    cd->tp = tp;
    cd->factors = variance_factors(t, tp, probe);
    // partitions: product of per-channel-group set partitions
    std::map<int, std::vector<int>> groups;
    for (int e = 0; e < 6; ++e) groups[cd->factors[static_cast<std::size_t>(e)].channel].push_back(e);
    std::vector<Partition> result;
    result.push_back({});
    for (const auto& [ch, members] : groups) {
        (void)ch;
        const auto& parts = set_partitions(static_cast<int>(members.size()));
        std::vector<Partition> next;
        next.reserve(result.size() * parts.size());
        for (const auto& base : result) {
            for (const auto& p : parts) {
                Partition np = base;
                for (const auto& blk : p) {
                    std::vector<int> b;
                    b.reserve(blk.size());
                    for (int e : blk) b.push_back(members[static_cast<std::size_t>(e)]);
                    np.push_back(std::move(b));
                }
                next.push_back(std::move(np));
            }
        }
        result = std::move(next);
    }
    cd->partitions = std::move(result);
    cd->kernels.assign(cd->partitions.size(), cdouble(0.0, 0.0));
    cd->ready.assign(cd->partitions.size(), 0);

    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = cases_.emplace(key, cd);
    return *it->second;
}

cdouble EtaModel::case_kernel(int probe, const Triple& t, const Triple& tp, std::size_t part_idx) const {
    auto& cd = const_cast<CaseData&>(case_data(probe, t, tp));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (cd.ready[part_idx]) return cd.kernels[part_idx];
    }
    const ToneLattice lat{opt_.n_tones, link_.grid.symbol_rate / opt_.n_tones};
    const auto view_of = [&](const Triple& tr) {
        const int ch = tr.kind == TripleKind::Sci ? probe : tr.k;
        return MuView(table(ch, probe).get(), tr.kind == TripleKind::B);
    };
    const MuView mt = view_of(t);
    const MuView mtp = view_of(tp);
    const cdouble v = eval_variance_kernel(cd.factors, cd.partitions[part_idx], mt, mtp, lat);
    std::lock_guard<std::mutex> lock(mutex_);
    cd.kernels[part_idx] = v;
    cd.ready[part_idx] = 1;
    return v;
}

cdouble EtaModel::projection_kernel(int probe, const Triple& t, std::size_t part_idx) const {
    // projection cases are few; evaluate without caching
    const auto factors = projection_factors(t, probe);
    std::map<int, std::vector<int>> groups;
    for (int e = 0; e < 4; ++e) groups[factors[static_cast<std::size_t>(e)].channel].push_back(e);
    std::vector<Partition> parts;
    parts.push_back({});
    for (const auto& [ch, members] : groups) {
        (void)ch;
        const auto& sub = set_partitions(static_cast<int>(members.size()));
        std::vector<Partition> next;
        for (const auto& base : parts) {
            for (const auto& p : sub) {
                Partition np = base;
                for (const auto& blk : p) {
                    std::vector<int> b;
                    for (int e : blk) b.push_back(members[static_cast<std::size_t>(e)]);
                    np.push_back(std::move(b));
                }
                next.push_back(std::move(np));
            }
        }
        parts = std::move(next);
    }
    const ToneLattice lat{opt_.n_tones, link_.grid.symbol_rate / opt_.n_tones};
    const int ch = t.kind == TripleKind::Sci ? probe : t.k;
    const MuView mt(table(ch, probe).get(), t.kind == TripleKind::B);
    return eval_projection_kernel(factors, parts[part_idx], mt, lat);
}

ChannelEta EtaModel::eta_channel(int probe, const ProviderFn& providers) const {
    const auto& grid = link_.grid;
    const double p_probe = grid.power_w[static_cast<std::size_t>(probe - 1)];
    const auto triples = probe_triples(probe, grid.num_channels);

    const auto pw = [&](const Triple& t) {
        const double pa = grid.power_w[static_cast<std::size_t>(t.ch_conj(probe) - 1)];
        const double pb = grid.power_w[static_cast<std::size_t>(t.ch_first(probe) - 1)];
        const double pc = grid.power_w[static_cast<std::size_t>(t.ch_second(probe) - 1)];
        return std::sqrt(pa * pb * pc / (4.0 * p_probe));
    };

    cdouble v_total(0.0, 0.0);
    cdouble v_sci(0.0, 0.0);

    for (std::size_t ti = 0; ti < triples.size(); ++ti) {
        for (std::size_t tj = ti; tj < triples.size(); ++tj) {
            const Triple& t = triples[ti];
            const Triple& tp = triples[tj];
            const auto& cd = case_data(probe, t, tp);
            const double pref = pw(t) * pw(tp);
            const bool diagonal = ti == tj;
            for (std::size_t pi = 0; pi < cd.partitions.size(); ++pi) {
                const cdouble mdot = [&] {
                    cdouble s(0.0, 0.0);
                    for (int combo = 0; combo < 8; ++combo)
                        s += partition_weight(cd.factors, cd.partitions[pi], combo, probe, providers, -1);
                    return s;
                }();
                if (std::abs(mdot) <= opt_.moment_tol) continue;
                const cdouble kern = case_kernel(probe, t, tp, pi);
                cdouble contrib = pref * mdot * kern;
                if (!diagonal) contrib += std::conj(contrib);
                v_total += contrib;
                if (t.kind == TripleKind::Sci && tp.kind == TripleKind::Sci) v_sci += contrib;
            }
        }
    }

    cdouble delta(0.0, 0.0);
    cdouble delta_sci(0.0, 0.0);
    if (opt_.include_projection) {
        for (const auto& t : triples) {
            const auto factors = projection_factors(t, probe);
            // enumerate projection partitions the same way projection_kernel does
            std::map<int, std::vector<int>> groups;
            for (int e = 0; e < 4; ++e) groups[factors[static_cast<std::size_t>(e)].channel].push_back(e);
            std::vector<Partition> parts;
            parts.push_back({});
            for (const auto& [ch, members] : groups) {
                (void)ch;
                const auto& sub = set_partitions(static_cast<int>(members.size()));
                std::vector<Partition> next;
                for (const auto& base : parts) {
                    for (const auto& p : sub) {
                        Partition np = base;
                        for (const auto& blk : p) {
                            std::vector<int> b;
                            for (int e : blk) b.push_back(members[static_cast<std::size_t>(e)]);
                            np.push_back(std::move(b));
                        }
                        next.push_back(std::move(np));
                    }
                }
                parts = std::move(next);
            }
            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                cdouble mdot(0.0, 0.0);
                // Qp is absent from projection factors: combos over q and p only
                for (int qbit = 0; qbit < 2; ++qbit)
                    for (int pbit = 0; pbit < 2; ++pbit) {
                        const int combo = qbit | (pbit << 2);
                        mdot += partition_weight(factors, parts[pi], combo, probe, providers, 0);
                    }
                if (std::abs(mdot) <= opt_.moment_tol) continue;
                const cdouble kern = projection_kernel(probe, t, pi);
                const cdouble c = 0.5 * pw(t) * mdot * kern;
                delta += c;
                if (t.kind == TripleKind::Sci) delta_sci += c;
            }
        }
    }

    const double xi = (8.0 / 9.0) * link_.fiber.gamma_nl;
    const double xi2 = xi * xi * span_power_multiplier(link_.fiber);
    const double den = 2.0 * p_probe * p_probe;

    ChannelEta out;
    out.eta = xi2 * (v_total.real() - 2.0 * std::norm(delta)) / den;
    out.sci = xi2 * (v_sci.real() - 2.0 * std::norm(delta_sci)) / den;
    out.xpm = out.eta - out.sci;
    return out;
}

// ---------------------------------------------------------------------------
// Spec-facing estimator wrappers

std::string link_fingerprint(const LinkSpec& link) {
    std::ostringstream os;
    os.precision(17);
    os << link.fiber.alpha << '|' << link.fiber.beta2 << '|' << link.fiber.beta3 << '|'
       << link.fiber.gamma_nl << '|' << link.fiber.cr << '|' << link.fiber.span_length << '|'
       << link.fiber.num_spans << '|' << static_cast<int>(link.fiber.span_sum) << '|'
       << link.grid.num_channels << '|' << link.grid.symbol_rate << '|' << link.grid.spacing << '|'
       << link.grid.rolloff;
    for (double p : link.grid.power_w) os << '|' << p;
    return hex64(fnv1a(os.str()));
}

namespace {

EtaReport report_from(const EtaModel& model, const std::string& estimator, const std::string& format,
                      const EtaModel::ProviderFn& providers) {
    const auto& link = model.link();
    EtaReport rep;
    rep.estimator = estimator;
    rep.format = format;
    rep.link_fingerprint = link_fingerprint(link);
    for (int i = 1; i <= link.grid.num_channels; ++i) {
        const ChannelEta ce = model.eta_channel(i, providers);
        EtaRow row;
        row.channel = i;
        row.f_center_thz = link.grid.channel_freq(i);
        row.eta_db = db10(ce.eta);
        row.sci_db = db10(std::max(ce.sci, 0.0));
        row.xpm_db = db10(std::max(ce.xpm, 0.0));
        row.stderr_db = 0.0;
        rep.rows.push_back(row);
    }
    rep.validate();
    return rep;
}

EtaModel::ProviderFn uniform_provider(std::shared_ptr<const MomentProvider> p) {
    return [p](int, int) { return p; };
}

} // namespace

ChannelEta eta_4d_channel(const EtaModel& model, const Constellation4D& format, int probe) {
    format.validate();
    auto p = std::make_shared<ConstellationMoments>(format);
    return model.eta_channel(probe, uniform_provider(p));
}

EtaReport eta_4d_with(const EtaModel& model, const Constellation4D& format) {
    format.validate();
    if (!format.is_zero_mean())
        throw ConfigError("eta_4d: constellation must be zero-mean");
    auto p = std::make_shared<ConstellationMoments>(format);
    return report_from(model, "FourD", format.label, uniform_provider(p));
}

EtaReport eta_gn_with(const EtaModel& model) {
    auto p = std::make_shared<GaussianMoments>();
    return report_from(model, "GN", "gaussian", uniform_provider(p));
}

EtaReport eta_egn_with(const EtaModel& model, const Constellation4D& format) {
    format.validate();
    auto p = std::make_shared<EgnMoments>(format);
    return report_from(model, "EGN", format.label, uniform_provider(p));
}

EtaReport eta_4d_ps_with(const EtaModel& model, const PsFormatSpec& ps) {
    ps.target.validate();
    const auto& opt = model.options();
    const int n = ps.per_pol ? ps.block2d.n : ps.block.n;
    // one provider per distinct window length
    auto cache = std::make_shared<std::map<int, std::shared_ptr<const MomentProvider>>>();
    auto mtx = std::make_shared<std::mutex>();
    EtaModel::ProviderFn fn = [&model, ps, cache, mtx, n, opt](int group_ch, int probe) {
        const int w = opt.window_override > 0
                          ? opt.window_override
                          : dispersion_memory_window(model.link(), probe, group_ch, n);
        std::lock_guard<std::mutex> lock(*mtx);
        auto it = cache->find(w);
        if (it != cache->end()) return it->second;
        std::shared_ptr<const MomentProvider> p;
        if (ps.per_pol)
            p = std::make_shared<CompositionMoments>(ps.target, ps.marginal, ps.block2d, w,
                                                     opt.aligned_windows);
        else
            p = std::make_shared<CompositionMoments>(ps.target, ps.block, w, opt.aligned_windows);
        cache->emplace(w, p);
        return p;
    };
    EtaReport rep = report_from(model, "FourD", ps.label, fn);
    return rep;
}

EtaReport eta_4d(const Constellation4D& format, const LinkSpec& link, ModelOptions opt) {
    EtaModel model(link, opt);
    return eta_4d_with(model, format);
}

EtaReport eta_gn(const LinkSpec& link, ModelOptions opt) {
    EtaModel model(link, opt);
    return eta_gn_with(model);
}

EtaReport eta_egn(const Constellation4D& format, const LinkSpec& link, ModelOptions opt) {
    EtaModel model(link, opt);
    return eta_egn_with(model, format);
}

EtaReport eta_4d_ps(const PsFormatSpec& ps, const LinkSpec& link, ModelOptions opt) {
    EtaModel model(link, opt);
    return eta_4d_ps_with(model, ps);
}

namespace {

// i.i.d. provider backed by a serialized MomentSet: single-slot classes are
// looked up, multi-slot patterns factorize into products.
class MomentSetProvider : public MomentProvider {
public:
    explicit MomentSetProvider(MomentSet ms) : ms_(std::move(ms)) {}

    cdouble pattern_moment(const GroupPattern& pat) const override {
        cdouble v(1.0, 0.0);
        for (const auto& b : pat.blocks) {
            GroupPattern single;
            single.blocks.push_back(b);
            const auto it = ms_.values.find(single.key());
            if (it == ms_.values.end())
                throw ContractError("eta_4d: MomentSet lacks class '" + single.key() + "'");
            v *= it->second;
        }
        return v;
    }
    std::string label() const override { return ms_.format_label; }

private:
    MomentSet ms_;
};

} // namespace

EtaReport eta_4d(const MomentSet& moments, const LinkSpec& link, ModelOptions opt) {
    EtaModel model(link, opt);
    auto p = std::make_shared<MomentSetProvider>(moments);
    return report_from(model, "FourD", moments.format_label, uniform_provider(p));
}

} // namespace nli
