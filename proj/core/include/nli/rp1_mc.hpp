#pragma once

// Direct first-order-perturbation Monte-Carlo estimator: draws symbol frames,
// builds the discrete perturbation field for each channel as the triple sum
// over tone indices weighted by the FWM efficiency, applies the same receiver
// scalar-projection convention as the analytical model and the waveform
// simulator, and estimates eta with a batch-means standard error.
//
// No moment factorization is involved, which makes this the internal ground
// truth for the moment-kernel pairing of the analytical model.

#include <cstdint>
#include <optional>

#include "nli/eta_model.hpp"
#include "nli/link.hpp"
#include "nli/report.hpp"
#include "nli/symbol_source.hpp"

namespace nli {

struct McFormat {
    enum class Kind { Iid, CcJoint, CcPerPol };
    Kind kind = Kind::Iid;
    Constellation4D constellation; // normalized target
    CompositionBlock block;        // joint composition (CcJoint)
    PolMarginal marginal;          // per-pol marginal (CcPerPol)
    CompositionBlock block2d;      // per-pol composition (CcPerPol)
    std::string label;

    static McFormat iid(const Constellation4D& c);
    static McFormat cc_joint(const Constellation4D& target, const CompositionBlock& block);
    static McFormat cc_per_pol(const Constellation4D& target, const PolMarginal& marginal,
                               const CompositionBlock& block2d);
};

struct Rp1McOptions {
    int frame_symbols = 64;   // symbols per periodic frame (= tones per channel)
    int realizations = 2000;  // >= 2
    int batches = 20;
    std::uint64_t seed = 12345;
};

EtaReport eta_rp1_mc(const McFormat& format, const LinkSpec& link, const Rp1McOptions& opt);

// Single-channel variant used by fast oracle tests.
EtaRow eta_rp1_mc_channel(const McFormat& format, const LinkSpec& link, int probe,
                          const Rp1McOptions& opt);

} // namespace nli
