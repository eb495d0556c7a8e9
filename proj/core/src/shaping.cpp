#include "nli/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nli {

namespace {

std::vector<double> mb_distribution(const std::vector<double>& energies, double lambda) {
    std::vector<double> p(energies.size());
    // subtract the minimum energy for overflow safety
    const double e0 = *std::min_element(energies.begin(), energies.end());
    double z = 0.0;
    for (std::size_t m = 0; m < energies.size(); ++m) {
        p[m] = std::exp(-lambda * (energies[m] - e0));
        z += p[m];
    }
    for (double& v : p) v /= z;
    return p;
}

double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

} // namespace

Constellation4D MaxwellBoltzmannPS::shaped() const {
    Constellation4D c = base;
    c.probs = probs;
    c.label = base.label + "-mb" + std::to_string(target_entropy_bits);
    c = c.normalized();
    c.validate();
    return c;
}

MaxwellBoltzmannPS fit_mb_entropy(const Constellation4D& base, double target_entropy_bits) {
    const double hmax = std::log2(static_cast<double>(base.size()));
    if (!(target_entropy_bits > 0.0) || target_entropy_bits > hmax + 1e-12)
        throw ConfigError("fit_mb_entropy: target entropy " + std::to_string(target_entropy_bits) +
                          " outside (0, log2 M = " + std::to_string(hmax) + "]");
    for (double p : base.probs)
        if (std::abs(p - base.probs[0]) > 1e-12)
            throw ConfigError("fit_mb_entropy: base constellation must be uniform");

    std::vector<double> energies(base.size());
    for (std::size_t m = 0; m < base.size(); ++m) energies[m] = base.points[m].energy();

    MaxwellBoltzmannPS out;
    out.base = base;
    out.target_entropy_bits = target_entropy_bits;

    const double tol = 1e-9;
    if (std::abs(hmax - target_entropy_bits) <= tol) {
        out.lambda = 0.0;
        out.probs.assign(base.size(), 1.0 / static_cast<double>(base.size()));
        return out;
    }

    const double espan = *std::max_element(energies.begin(), energies.end()) -
                         *std::min_element(energies.begin(), energies.end());
    if (espan < 1e-12)
        throw NumericalError("fit_mb_entropy: constant-energy constellation cannot be shaped below log2 M");

    // bracket: H(0) = hmax > target; find hi with H(hi) < target
    double lo = 0.0;
    double hi = 1.0 / espan;
    int guard = 0;
    while (entropy_bits(mb_distribution(energies, hi)) > target_entropy_bits) {
        hi *= 2.0;
        if (++guard > 200)
            throw NumericalError("fit_mb_entropy: cannot bracket target entropy " +
                                 std::to_string(target_entropy_bits));
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h = entropy_bits(mb_distribution(energies, mid));
        if (h > target_entropy_bits)
            lo = mid;
        else
            hi = mid;
        if (std::abs(h - target_entropy_bits) <= tol) {
            out.lambda = mid;
            out.probs = mb_distribution(energies, mid);
            return out;
        }
    }
    throw NumericalError("fit_mb_entropy: bisection did not converge to 1e-9 bits");
}

CompositionBlock quantize_composition(const std::vector<double>& dist, int n) {
    if (n < 1) throw ConfigError("quantize_composition: n must be >= 1");
    CompositionBlock block;
    block.n = n;
    block.counts.resize(dist.size());
    std::vector<std::pair<double, std::size_t>> remainder(dist.size());
    long assigned = 0;
    for (std::size_t m = 0; m < dist.size(); ++m) {
        const double exact = dist[m] * n;
        const int fl = static_cast<int>(std::floor(exact + 1e-12));
        block.counts[m] = fl;
        assigned += fl;
        remainder[m] = {exact - fl, m};
    }
    long leftover = n - assigned;
    // stable sort by descending remainder; ties resolved by point index
    std::stable_sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; leftover > 0 && i < remainder.size(); ++i, --leftover)
        block.counts[remainder[i].second] += 1;
    if (leftover != 0)
        throw NumericalError("quantize_composition: leftover symbols after assignment");
    return block;
}

double composition_kl_bits(const CompositionBlock& block, const std::vector<double>& dist) {
    double kl = 0.0;
    for (std::size_t m = 0; m < block.counts.size(); ++m) {
        if (block.counts[m] == 0) continue;
        const double q = static_cast<double>(block.counts[m]) / block.n;
        if (dist[m] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += q * std::log2(q / dist[m]);
    }
    return kl;
}

} // namespace nli
