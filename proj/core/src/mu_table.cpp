#include "nli/mu_table.hpp"

#include <cmath>

namespace nli {

namespace {

// integral over one panel [0, h] of exp(-s u) * (g0 + (g1 - g0) u / h) du
cdouble panel_integral(cdouble s, double h, double g0, double g1) {
    const cdouble sh = s * h;
    if (std::abs(sh) < 1e-4) {
        // series in sh
        const cdouble i0 = h * (1.0 - sh / 2.0 + sh * sh / 6.0);
        const cdouble i1 = h * h * (0.5 - sh / 3.0 + sh * sh / 8.0);
        return g0 * i0 + (g1 - g0) * i1 / h;
    }
    const cdouble e = std::exp(-sh);
    const cdouble i0 = (1.0 - e) / s;
    const cdouble i1 = (1.0 - (1.0 + sh) * e) / (s * s);
    return g0 * i0 + (g1 - g0) * i1 / h;
}

// single-span mu for one frequency triple given precomputed g(z_p) samples
cdouble mu_from_panels(double alpha, double phi, double span, const std::vector<double>& g) {
    const int panels = static_cast<int>(g.size()) - 1;
    const double h = span / panels;
    const cdouble s(alpha, phi);
    // exp(-s z_p) by recurrence
    const cdouble step = std::exp(-s * h);
    cdouble ez(1.0, 0.0);
    cdouble acc(0.0, 0.0);
    for (int p = 0; p < panels; ++p) {
        acc += ez * panel_integral(s, h, g[static_cast<std::size_t>(p)], g[static_cast<std::size_t>(p + 1)]);
        ez *= step;
    }
    return acc;
}

} // namespace

// Adaptive FWM efficiency: the oscillatory factor is integrated exactly per
// panel, so refinement only tracks the smooth Raman-tilt profile. The panel
// count doubles until successive values agree to rel_tol. The profile is
// always integrated numerically here (no closed-form shortcut), so the
// analytic reduction at Cr = 0 is a real check of the integrator.
cdouble fwm_efficiency(double f1, double f2, double fi, const FiberParams& fiber, const WdmGrid& grid,
                       double rel_tol) {
    fiber.validate();
    grid.validate();
    const IsrsProfile profile(fiber, grid);
    const double phi = phase_mismatch(f1, f2, fi, fiber.beta2, fiber.beta3);
    const double f3 = f1 + f2 - fi;

    const auto with_panels = [&](int panels) {
        std::vector<double> g(static_cast<std::size_t>(panels) + 1);
        const double h = fiber.span_length / panels;
        for (int p = 0; p <= panels; ++p) {
            const double z = p * h;
            g[static_cast<std::size_t>(p)] = profile.rho(z, f3) * std::exp(fiber.alpha * z);
        }
        return mu_from_panels(fiber.alpha, phi, fiber.span_length, g);
    };

    // Richardson-extrapolated refinement: the panel rule is O(h^2) in the
    // smooth profile, the extrapolated pair is O(h^4).
    cdouble prev = with_panels(32);
    cdouble cur = with_panels(64);
    cdouble extrap_prev = (4.0 * cur - prev) / 3.0;
    // strongly phase-mismatched triples cancel to values far below the
    // natural kernel scale; hold those to an absolute tolerance instead
    const double floor_scale = 1e-3 * effective_length(fiber.alpha, fiber.span_length);
    for (int panels = 128; panels <= 16384; panels *= 2) {
        prev = cur;
        cur = with_panels(panels);
        const cdouble extrap = (4.0 * cur - prev) / 3.0;
        const double scale = std::max(std::abs(extrap), floor_scale);
        if (std::abs(extrap - extrap_prev) <= rel_tol * scale)
            return extrap * span_coherence_factor(phi, fiber);
        extrap_prev = extrap;
    }
    throw NumericalError("fwm_efficiency: panel refinement did not converge to the requested tolerance");
}

cdouble MuTable::evaluate(const LinkSpec& link, const IsrsProfile& profile, double f1, double f2, double fl,
                          int z_panels) {
    const FiberParams& fb = link.fiber;
    const double phi = phase_mismatch(f1, f2, fl, fb.beta2, fb.beta3);
    cdouble mu;
    if (fb.cr == 0.0) {
        const cdouble s(fb.alpha, phi);
        mu = (1.0 - std::exp(-s * fb.span_length)) / s;
    } else {
        const double f3 = f1 + f2 - fl;
        std::vector<double> g(static_cast<std::size_t>(z_panels) + 1);
        const double h = fb.span_length / z_panels;
        for (int p = 0; p <= z_panels; ++p) {
            const double z = p * h;
            // rho = exp(-alpha z) * g(z); g absorbs the Raman tilt
            g[static_cast<std::size_t>(p)] = profile.rho(z, f3) * std::exp(fb.alpha * z);
        }
        mu = mu_from_panels(fb.alpha, phi, fb.span_length, g);
    }
    return mu * span_coherence_factor(phi, fb);
}

MuTable::MuTable(const LinkSpec& link, int ch_a, int ch_probe, int n_tones) {
    lat_.n_tones = n_tones;
    lat_.dnu = link.grid.symbol_rate / n_tones;
    const double fa = link.grid.channel_freq(ch_a);
    const double fp = link.grid.channel_freq(ch_probe);
    const FiberParams& fb = link.fiber;
    const IsrsProfile profile(fb, link.grid);

    const std::size_t n = static_cast<std::size_t>(n_tones);
    data_.resize(n * n * n);

    const int z_panels = kDefaultZPanels;
    const double h = fb.span_length / z_panels;

    // Raman tilt factors on the f3 lattice: f3 = fa + fp*0 + (m0 + m1 - mL)*dnu
    // with m0 in the interferer channel, m1 and mL on the probe channel:
    // f3 = fa + (m0 + m1 - mL) * dnu. Precompute g(z_p, t) over the integer
    // offset t = m0 + m1 - mL.
    const int tmin = 3 * lat_.lo();
    const int tmax = 3 * lat_.hi();
    std::vector<std::vector<double>> gz; // [panel][t - tmin]
    if (fb.cr != 0.0) {
        gz.assign(static_cast<std::size_t>(z_panels) + 1,
                  std::vector<double>(static_cast<std::size_t>(tmax - tmin + 1)));
        for (int p = 0; p <= z_panels; ++p) {
            const double z = p * h;
            const double beta = profile.total_power() * fb.cr * effective_length(fb.alpha, z);
            const double denom = profile.gtx_weighted_integral(beta);
            const double base = profile.total_power() / denom;
            // g(z, f3) = base * exp(-beta f3)
            const double step = std::exp(-beta * lat_.dnu);
            double val = base * std::exp(-beta * (fa + tmin * lat_.dnu));
            for (int t = tmin; t <= tmax; ++t) {
                gz[static_cast<std::size_t>(p)][static_cast<std::size_t>(t - tmin)] = val;
                val *= step;
            }
        }
    }

    std::vector<double> gcol(static_cast<std::size_t>(z_panels) + 1);
    const int lo = lat_.lo();
    const int hi = lat_.hi();
    for (int m0 = lo; m0 <= hi; ++m0) {
        const double f1 = fa + m0 * lat_.dnu;
        for (int m1 = lo; m1 <= hi; ++m1) {
            const double f2 = fp + m1 * lat_.dnu;
            for (int mL = lo; mL <= hi; ++mL) {
                const double fl = fp + mL * lat_.dnu;
                const double phi = phase_mismatch(f1, f2, fl, fb.beta2, fb.beta3);
                cdouble mu;
                if (fb.cr == 0.0) {
                    const cdouble s(fb.alpha, phi);
                    mu = (1.0 - std::exp(-s * fb.span_length)) / s;
                } else {
                    const int t = m0 + m1 - mL;
                    for (int p = 0; p <= z_panels; ++p)
                        gcol[static_cast<std::size_t>(p)] = gz[static_cast<std::size_t>(p)][static_cast<std::size_t>(t - tmin)];
                    mu = mu_from_panels(fb.alpha, phi, fb.span_length, gcol);
                }
                mu *= span_coherence_factor(phi, fb);
                data_[(static_cast<std::size_t>(m0 - lo) * n + static_cast<std::size_t>(m1 - lo)) * n +
                      static_cast<std::size_t>(mL - lo)] = mu;
            }
        }
    }
}

MuView::MuView(const LinkSpec* link, const IsrsProfile* profile, double f_a, double f_probe, int n_tones,
               bool swap_args, int z_panels)
    : swap_(swap_args), link_(link), profile_(profile), f_a_(f_a), f_probe_(f_probe),
      dnu_(link->grid.symbol_rate / n_tones), z_panels_(z_panels) {}

cdouble MuView::operator()(int m0, int m1, int mL) const {
    if (swap_) std::swap(m0, m1);
    if (table_) return table_->at(m0, m1, mL);
    const double f1 = f_a_ + m0 * dnu_;
    const double f2 = f_probe_ + m1 * dnu_;
    const double fl = f_probe_ + mL * dnu_;
    return MuTable::evaluate(*link_, *profile_, f1, f2, fl, z_panels_);
}

} // namespace nli
