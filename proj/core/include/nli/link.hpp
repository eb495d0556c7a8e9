#pragma once

// Fiber/link physics: parameter sets, the ISRS-modified power profile along z,
// the phase-mismatch factor, and the four-wave-mixing efficiency integral.
//
// Unit discipline (everywhere in this library): frequencies THz, lengths km,
// powers W, beta2 ps^2/km, beta3 ps^3/km, Raman slope 1/W/km/THz, attenuation
// 1/km. Conversions from engineering units (dB/km, ps/nm/km, dBm) happen once,
// at config ingestion.

#include <complex>
#include <vector>

#include "nli/errors.hpp"

namespace nli {

using cdouble = std::complex<double>;

inline constexpr double kLog10InvNeper = 4.342944819032518; // 10/ln(10)
inline constexpr double kSpeedOfLight_m_s = 299792458.0;

// How per-span contributions accumulate in the FWM efficiency.
//   Coherent:   per-span phase factor exp(-j*phi*(j-1)*Ls), power profile reset each span.
//   Incoherent: NLI power adds per span (kernel-level multiplier N_s).
//   Plain:      mu multiplied by N_s with no inter-span phase (literal sum of identical spans).
enum class SpanSum { Coherent, Incoherent, Plain };

struct FiberParams {
    double alpha = 0.2 / kLog10InvNeper; // 1/km
    double beta2 = -21.683;              // ps^2/km
    double beta3 = 0.1447;               // ps^3/km
    double gamma_nl = 1.2;               // 1/W/km
    double cr = 0.0;                     // 1/W/km/THz
    double span_length = 100.0;          // km
    int num_spans = 1;
    SpanSum span_sum = SpanSum::Coherent;

    void validate() const;
};

// alpha [1/km] from attenuation in dB/km.
double alpha_from_db_per_km(double alpha_db);
// beta2 [ps^2/km] from D [ps/nm/km] at wavelength lambda [nm].
double beta2_from_dispersion(double d_ps_nm_km, double lambda_nm = 1550.0);
// beta3 [ps^3/km] from slope S [ps/nm^2/km] and D [ps/nm/km] at lambda [nm].
double beta3_from_slope(double s_ps_nm2_km, double d_ps_nm_km, double lambda_nm = 1550.0);

struct WdmGrid {
    int num_channels = 1;
    double symbol_rate = 0.045;     // THz (baud)
    double spacing = 0.046;         // THz
    double rolloff = 0.01;
    std::vector<double> power_w;    // per-channel launch power (both polarizations), W

    void validate() const;

    // center frequency of 1-based channel k, relative to band center [THz]
    double channel_freq(int k) const {
        return (k - 0.5 * (num_channels + 1)) * spacing;
    }
    double total_power() const {
        double s = 0.0;
        for (double p : power_w) s += p;
        return s;
    }
    static WdmGrid uniform(int n_channels, double symbol_rate_thz, double spacing_thz,
                           double power_per_channel_w, double rolloff = 0.01);
};

struct LinkSpec {
    FiberParams fiber;
    WdmGrid grid;

    void validate() const {
        fiber.validate();
        grid.validate();
    }
};

// L_eff(z) = (1 - exp(-alpha z)) / alpha, with a series fallback near alpha*z = 0.
double effective_length(double alpha, double z);

// phi = 4 pi^2 (f1 - fi)(f2 - fi) [beta2 + pi (f1 + f2) beta3], in rad/km.
double phase_mismatch(double f1, double f2, double fi, double beta2, double beta3);

// Normalized ISRS signal power profile rho(z, f): ratio of local PSD to launch
// PSD under the triangular Raman-slope approximation with a rectangular
// transmitted spectrum. Satisfies rho(0, f) = 1 and, for every z,
//   integral G_Tx(v) rho(z, v) dv = P_tot exp(-alpha z).
class IsrsProfile {
public:
    IsrsProfile(const FiberParams& fiber, const WdmGrid& grid);

    double rho(double z, double f) const;

    // d/dz ln rho at fixed f (used by the split-step simulator), via the
    // analytic derivative of the closed-form profile.
    double dlnrho_dz(double z, double f) const;

    // integral of G_Tx(v) * exp(-beta v) dv over the rectangular spectrum (closed form)
    double gtx_weighted_integral(double beta) const;

    double total_power() const { return p_tot_; }

private:
    double alpha_;
    double cr_;
    double p_tot_;
    double rs_;
    std::vector<double> fk_;
    std::vector<double> pk_;
};

// FWM efficiency mu(f1, f2, fi): sum over spans of the z-integral of
// exp(-j phi z) * rho(z, f1 + f2 - fi), computed by adaptive Gauss-Kronrod
// quadrature with the given relative tolerance. Units: km.
cdouble fwm_efficiency(double f1, double f2, double fi, const FiberParams& fiber,
                       const WdmGrid& grid, double rel_tol = 1e-8);

// Inter-span accumulation factor applied multiplicatively to the single-span mu.
cdouble span_coherence_factor(double phi, const FiberParams& fiber);

// Kernel-level power multiplier (N_s for incoherent accumulation, else 1).
double span_power_multiplier(const FiberParams& fiber);

} // namespace nli
