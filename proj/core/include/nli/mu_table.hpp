#pragma once

// Tone-lattice tables of the FWM efficiency. The analytical model and the
// perturbation Monte-Carlo both discretize each channel into n_tones Fourier
// tones spaced symbol_rate / n_tones apart; every kernel reduces to sums of
// mu over this lattice.

#include <memory>
#include <vector>

#include "nli/link.hpp"

namespace nli {

// Tone index m runs over [-floor(N/2), ceil(N/2)-1]; frequency = f_ch + m*dnu.
struct ToneLattice {
    int n_tones;
    double dnu; // THz

    int lo() const { return -(n_tones / 2); }
    int hi() const { return lo() + n_tones - 1; }
    bool contains(int m) const { return m >= lo() && m <= hi(); }
};

// mu(f_a + m0*dnu, f_b + m1*dnu, f_i + mL*dnu) for one (interferer, probe)
// channel pair; f_a is the interferer (or the probe itself for intra-channel
// terms), f_b and the landing tone always live on the probe channel.
class MuTable {
public:
    // Precomputes all n_tones^3 entries.
    MuTable(const LinkSpec& link, int ch_a, int ch_probe, int n_tones);

    cdouble at(int m0, int m1, int mL) const {
        const int o = lat_.lo();
        const std::size_t n = static_cast<std::size_t>(lat_.n_tones);
        return data_[(static_cast<std::size_t>(m0 - o) * n + static_cast<std::size_t>(m1 - o)) * n +
                     static_cast<std::size_t>(mL - o)];
    }

    // On-demand evaluation (no table) for sparse access patterns.
    static cdouble evaluate(const LinkSpec& link, const IsrsProfile& profile, double f1, double f2,
                            double fl, int z_panels);

    const ToneLattice& lattice() const { return lat_; }

private:
    ToneLattice lat_;
    std::vector<cdouble> data_;
};

// Lightweight accessor handed to kernel evaluators: either a precomputed
// table (optionally argument-swapped) or lazy per-entry evaluation.
class MuView {
public:
    MuView(const MuTable* table, bool swap_args) : table_(table), swap_(swap_args) {}
    MuView(const LinkSpec* link, const IsrsProfile* profile, double f_a, double f_probe, int n_tones,
           bool swap_args, int z_panels);

    cdouble operator()(int m0, int m1, int mL) const;

private:
    const MuTable* table_ = nullptr;
    bool swap_ = false;
    // lazy mode
    const LinkSpec* link_ = nullptr;
    const IsrsProfile* profile_ = nullptr;
    double f_a_ = 0.0, f_probe_ = 0.0;
    double dnu_ = 0.0;
    int z_panels_ = 64;
};

// Default number of z panels used by the piecewise-linear oscillatory
// integrator backing the tables (validated against fwm_efficiency).
inline constexpr int kDefaultZPanels = 96;

} // namespace nli
