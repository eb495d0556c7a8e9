#include "nli/link.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nli {

void FiberParams::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("fiber: alpha must be > 0");
    if (gamma_nl < 0.0) throw ConfigError("fiber: gamma must be >= 0");
    if (cr < 0.0) throw ConfigError("fiber: Raman slope Cr must be >= 0");
    if (!(span_length > 0.0)) throw ConfigError("fiber: span length must be > 0");
    if (num_spans < 1) throw ConfigError("fiber: number of spans must be >= 1");
}

void WdmGrid::validate() const {
    if (num_channels < 1) throw ConfigError("grid: need at least one channel");
    if (!(symbol_rate > 0.0)) throw ConfigError("grid: symbol rate must be > 0");
    if (rolloff < 0.0 || rolloff > 1.0) throw ConfigError("grid: roll-off out of [0,1]");
    if (num_channels > 1 && spacing < symbol_rate * (1.0 + rolloff) * (1.0 - 1e-12))
        throw ConfigError("grid: channel spacing below (1+rolloff)*symbol_rate");
    if (static_cast<int>(power_w.size()) != num_channels)
        throw ConfigError("grid: power vector size mismatch");
    for (double p : power_w)
        if (!(p > 0.0)) throw ConfigError("grid: launch powers must be > 0");
}

WdmGrid WdmGrid::uniform(int n_channels, double symbol_rate_thz, double spacing_thz,
                         double power_per_channel_w, double rolloff) {
    WdmGrid g;
    g.num_channels = n_channels;
    g.symbol_rate = symbol_rate_thz;
    g.spacing = spacing_thz;
    g.rolloff = rolloff;
    g.power_w.assign(static_cast<std::size_t>(n_channels), power_per_channel_w);
    g.validate();
    return g;
}

double alpha_from_db_per_km(double alpha_db) {
    return alpha_db / kLog10InvNeper;
}

double beta2_from_dispersion(double d_ps_nm_km, double lambda_nm) {
    // beta2 = -D lambda^2 / (2 pi c); result in ps^2/km
    const double lambda_m = lambda_nm * 1e-9;
    const double d_si = d_ps_nm_km * 1e-6; // s/m^2
    const double beta2_si = -d_si * lambda_m * lambda_m / (2.0 * M_PI * kSpeedOfLight_m_s);
    return beta2_si * 1e27; // s^2/m -> ps^2/km
}

double beta3_from_slope(double s_ps_nm2_km, double d_ps_nm_km, double lambda_nm) {
    // S = dD/dlambda;  beta3 = (lambda^2/(2 pi c))^2 [S - (4 pi c / lambda^3) beta2]
    const double lambda_m = lambda_nm * 1e-9;
    const double s_si = s_ps_nm2_km * 1e3;                       // s/m^3
    const double beta2_si = beta2_from_dispersion(d_ps_nm_km, lambda_nm) * 1e-27; // s^2/m
    const double factor = lambda_m * lambda_m / (2.0 * M_PI * kSpeedOfLight_m_s); // m*s
    const double beta3_si =
        factor * factor *
        (s_si - 4.0 * M_PI * kSpeedOfLight_m_s / (lambda_m * lambda_m * lambda_m) * beta2_si);
    return beta3_si * 1e39; // s^3/m -> ps^3/km
}

double effective_length(double alpha, double z) {
    const double az = alpha * z;
    if (std::abs(az) < 1e-6) {
        return z * (1.0 - 0.5 * az + az * az / 6.0);
    }
    return (1.0 - std::exp(-az)) / alpha;
}

double phase_mismatch(double f1, double f2, double fi, double beta2, double beta3) {
    return 4.0 * M_PI * M_PI * (f1 - fi) * (f2 - fi) * (beta2 + M_PI * (f1 + f2) * beta3);
}

// ---------------------------------------------------------------------------
// IsrsProfile

namespace {

// w(beta) = integral over one rectangle of width R centered at 0 of exp(-beta v) dv
//         = 2 sinh(beta R / 2) / beta   (-> R as beta -> 0)
double rect_weight(double beta, double r) {
    const double x = 0.5 * beta * r;
    if (std::abs(x) < 1e-6) {
        return r * (1.0 + x * x / 6.0);
    }
    return 2.0 * std::sinh(x) / beta;
}

// d/dbeta of rect_weight
double rect_weight_dbeta(double beta, double r) {
    const double x = 0.5 * beta * r;
    if (std::abs(x) < 1e-5) {
        // w(beta) = r (1 + x^2/6 + x^4/120), x = beta r/2
        return r * (beta * r * r / 12.0) * (1.0 + x * x / 10.0);
    }
    return (r * std::cosh(x) * beta - 2.0 * std::sinh(x)) / (beta * beta);
}

} // namespace

IsrsProfile::IsrsProfile(const FiberParams& fiber, const WdmGrid& grid)
    : alpha_(fiber.alpha), cr_(fiber.cr), p_tot_(grid.total_power()), rs_(grid.symbol_rate) {
    fk_.resize(static_cast<std::size_t>(grid.num_channels));
    pk_ = grid.power_w;
    for (int k = 1; k <= grid.num_channels; ++k)
        fk_[static_cast<std::size_t>(k - 1)] = grid.channel_freq(k);
}

double IsrsProfile::gtx_weighted_integral(double beta) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < fk_.size(); ++k)
        sum += pk_[k] / rs_ * std::exp(-beta * fk_[k]) * rect_weight(beta, rs_);
    return sum;
}

double IsrsProfile::rho(double z, double f) const {
    if (cr_ == 0.0) return std::exp(-alpha_ * z);
    const double beta = p_tot_ * cr_ * effective_length(alpha_, z);
    const double denom = gtx_weighted_integral(beta);
    return p_tot_ * std::exp(-alpha_ * z - beta * f) / denom;
}

double IsrsProfile::dlnrho_dz(double z, double f) const {
    if (cr_ == 0.0) return -alpha_;
    const double beta = p_tot_ * cr_ * effective_length(alpha_, z);
    const double dbeta_dz = p_tot_ * cr_ * std::exp(-alpha_ * z);
    double d = 0.0, dprime = 0.0;
    for (std::size_t k = 0; k < fk_.size(); ++k) {
        const double e = pk_[k] / rs_ * std::exp(-beta * fk_[k]);
        d += e * rect_weight(beta, rs_);
        dprime += e * (rect_weight_dbeta(beta, rs_) - fk_[k] * rect_weight(beta, rs_));
    }
    return -alpha_ - dbeta_dz * f - dprime / d * dbeta_dz;
}

// ---------------------------------------------------------------------------
// FWM efficiency

cdouble span_coherence_factor(double phi, const FiberParams& fiber) {
    switch (fiber.span_sum) {
        case SpanSum::Plain:
            return cdouble(static_cast<double>(fiber.num_spans), 0.0);
        case SpanSum::Incoherent:
            return cdouble(1.0, 0.0);
        case SpanSum::Coherent: {
            cdouble sum(0.0, 0.0);
            for (int j = 0; j < fiber.num_spans; ++j) {
                const double arg = -phi * fiber.span_length * static_cast<double>(j);
                sum += cdouble(std::cos(arg), std::sin(arg));
            }
            return sum;
        }
    }
    return cdouble(1.0, 0.0);
}

double span_power_multiplier(const FiberParams& fiber) {
    return fiber.span_sum == SpanSum::Incoherent ? static_cast<double>(fiber.num_spans) : 1.0;
}

// fwm_efficiency is implemented next to the tone-table machinery in
// mu_table.cpp: both share the oscillation-exact panel integrator.

} // namespace nli
