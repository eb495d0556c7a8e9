#pragma once

// Assembly of per-channel eta: pattern-class moments paired with tone-lattice
// link kernels, the Gaussian and independent-polarization baselines, and the
// receiver scalar-projection correction.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "nli/kernels.hpp"
#include "nli/link.hpp"
#include "nli/moments.hpp"
#include "nli/report.hpp"

namespace nli {

struct ModelOptions {
    int n_tones = 64;
    // Skip classes whose pol-summed moment weight is below this bound.
    double moment_tol = 1e-12;
    // Per-pair windowed moments for constant-composition formats: 0 = use the
    // dispersion-memory rule, otherwise a fixed window length.
    int window_override = 0;
    // Pin composition windows to block boundaries (periodic-frame oracle mode).
    bool aligned_windows = false;
    // Include the receiver scalar-projection correction (constant phase/gain
    // compensation applied by the receiver chain).
    bool include_projection = true;
};

// Dispersion-memory moment window for the pair (i, k): the number of symbols
// the channels slide past each other over the whole link, clamped to
// [1, 10 * blocklength] when a blocklength applies (0 = no clamp).
int dispersion_memory_window(const LinkSpec& link, int i, int k, int blocklength);

struct ChannelEta {
    double eta = 0.0; // linear, 1/W^2
    double sci = 0.0;
    double xpm = 0.0;
};

class EtaModel {
public:
    explicit EtaModel(LinkSpec link, ModelOptions opt = {});

    // Returns the moment provider for factors of channel `group_ch` when
    // evaluating probe channel `probe`.
    using ProviderFn =
        std::function<std::shared_ptr<const MomentProvider>(int group_ch, int probe)>;

    ChannelEta eta_channel(int probe, const ProviderFn& providers) const;

    const LinkSpec& link() const { return link_; }
    const ModelOptions& options() const { return opt_; }

private:
    struct CaseData;
    const CaseData& case_data(int probe, const Triple& t, const Triple& tp) const;
    cdouble case_kernel(int probe, const Triple& t, const Triple& tp, std::size_t part_idx) const;
    cdouble projection_kernel(int probe, const Triple& t, std::size_t part_idx) const;
    std::shared_ptr<const MuTable> table(int ch_a, int probe) const;

    LinkSpec link_;
    ModelOptions opt_;
    IsrsProfile profile_;

    mutable std::map<std::string, std::shared_ptr<CaseData>> cases_;
    mutable std::map<std::string, std::shared_ptr<const MuTable>> tables_;
    mutable std::mutex mutex_;
};

// Spec-facing estimators. Each provider evaluates every class the link
// kernels produce; the class sets match by construction.
EtaReport eta_4d(const Constellation4D& format, const LinkSpec& link, ModelOptions opt = {});
EtaReport eta_gn(const LinkSpec& link, ModelOptions opt = {});
EtaReport eta_egn(const Constellation4D& format, const LinkSpec& link, ModelOptions opt = {});

// i.i.d. evaluation from a serialized MomentSet (single-slot classes; joint
// patterns factorize). Throws ContractError if a required class is missing.
EtaReport eta_4d(const MomentSet& moments, const LinkSpec& link, ModelOptions opt = {});

// Constant-composition (probabilistically shaped) formats: per-pair windowed
// moments via the exact permutation-model provider.
struct PsFormatSpec {
    Constellation4D target;      // shaped target distribution (normalized)
    bool per_pol = true;         // per-polarization 2D composition
    CompositionBlock block;      // joint composition (per_pol == false)
    PolMarginal marginal;        // per-pol marginal (per_pol == true)
    CompositionBlock block2d;    // per-pol composition (per_pol == true)
    std::string label;
};

EtaReport eta_4d_ps(const PsFormatSpec& ps, const LinkSpec& link, ModelOptions opt = {});

// Shared-model variants reusing cached kernels across formats.
ChannelEta eta_4d_channel(const EtaModel& model, const Constellation4D& format, int probe);
EtaReport eta_4d_with(const EtaModel& model, const Constellation4D& format);
EtaReport eta_gn_with(const EtaModel& model);
EtaReport eta_egn_with(const EtaModel& model, const Constellation4D& format);
EtaReport eta_4d_ps_with(const EtaModel& model, const PsFormatSpec& ps);

std::string link_fingerprint(const LinkSpec& link);

} // namespace nli
