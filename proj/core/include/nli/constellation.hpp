#pragma once

// Dual-polarization 4D constellations: built-in PM-QAM families, the
// polarization-ring-switched 64-point format, and a text file format for
// arbitrary coordinate/probability pairs.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nli/errors.hpp"

namespace nli {

using cdouble = std::complex<double>;

// One dual-polarization symbol: complex amplitude per polarization.
struct Jones {
    cdouble x{0.0, 0.0};
    cdouble y{0.0, 0.0};

    double energy() const { return std::norm(x) + std::norm(y); }
};

struct Constellation4D {
    std::vector<Jones> points;
    std::vector<double> probs;
    std::string label;

    std::size_t size() const { return points.size(); }

    // mean 4D symbol energy sum p_m (|x|^2 + |y|^2)
    double mean_energy() const;

    // E[x^ex conj(x)^exc y^ey conj(y)^eyc] by direct enumeration
    cdouble raw_moment(int ex, int exc, int ey, int eyc) const;

    double entropy_bits() const;

    // Scales coordinates so the mean 4D energy is exactly 2
    // (unit mean power per polarization).
    Constellation4D normalized() const;

    // Checks all type invariants: probability simplex, normalization,
    // per-polarization power balance, distinct points.
    void validate() const;

    bool is_zero_mean(double tol = 1e-9) const;
};

// PM-QAM over two independent polarizations; order_per_pol in {4, 8, 16, 64}.
// 8QAM uses the rectangular cross layout ({+-1,+-3} x {+-1}).
// If probs is given it must have order_per_pol^2 entries (4D probabilities).
Constellation4D make_pm_qam(int order_per_pol, const std::optional<std::vector<double>>& probs = std::nullopt);

// Star 8QAM alternative layout: two 4-PSK rings, the outer rotated 45 degrees.
Constellation4D make_pm_8qam_star();

// Polarization-ring-switched 64-point 4D format with constant 4D energy:
// per polarization two 8-PSK rings with radius ratio `ring_ratio`, the two
// polarizations always on opposite rings, joint phase parity constraint.
Constellation4D make_prs64(double ring_ratio = 0.65);

// Names accepted by builtin_constellation / the CLI.
std::vector<std::string> builtin_constellation_names();
Constellation4D builtin_constellation(const std::string& name);

// Text format: header "M=<int> dims=4", then M rows "xr xi yr yi [prob]".
Constellation4D load_constellation(const std::string& path);
void save_constellation(const std::string& path, const Constellation4D& c);

} // namespace nli
