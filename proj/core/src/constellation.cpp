#include "nli/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nli {

double Constellation4D::mean_energy() const {
    double e = 0.0;
    for (std::size_t m = 0; m < points.size(); ++m) e += probs[m] * points[m].energy();
    return e;
}

cdouble Constellation4D::raw_moment(int ex, int exc, int ey, int eyc) const {
    cdouble acc(0.0, 0.0);
    for (std::size_t m = 0; m < points.size(); ++m) {
        cdouble term(probs[m], 0.0);
        for (int i = 0; i < ex; ++i) term *= points[m].x;
        for (int i = 0; i < exc; ++i) term *= std::conj(points[m].x);
        for (int i = 0; i < ey; ++i) term *= points[m].y;
        for (int i = 0; i < eyc; ++i) term *= std::conj(points[m].y);
        acc += term;
    }
    return acc;
}

double Constellation4D::entropy_bits() const {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

Constellation4D Constellation4D::normalized() const {
    Constellation4D out = *this;
    const double e = mean_energy();
    if (!(e > 0.0)) throw ConfigError("constellation '" + label + "': zero mean energy");
    const double s = std::sqrt(2.0 / e);
    for (auto& p : out.points) {
        p.x *= s;
        p.y *= s;
    }
    return out;
}

void Constellation4D::validate() const {
    if (points.empty()) throw ConfigError("constellation '" + label + "': no points");
    if (points.size() != probs.size())
        throw ConfigError("constellation '" + label + "': probs/points size mismatch");
    double psum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw ConfigError("constellation '" + label + "': negative probability");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw ConfigError("constellation '" + label + "': probabilities sum to " + std::to_string(psum));
    if (std::abs(mean_energy() - 2.0) > 1e-12)
        throw ConfigError("constellation '" + label + "': mean 4D energy != 2 (not normalized)");
    const double px = raw_moment(1, 1, 0, 0).real();
    const double py = raw_moment(0, 0, 1, 1).real();
    if (std::abs(px - 1.0) > 1e-9 || std::abs(py - 1.0) > 1e-9)
        throw ConfigError("constellation '" + label + "': per-polarization power imbalance (E|x|^2=" +
                          std::to_string(px) + ", E|y|^2=" + std::to_string(py) + ")");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d2 = std::norm(points[i].x - points[j].x) + std::norm(points[i].y - points[j].y);
            if (d2 < 1e-24)
                throw ConfigError("constellation '" + label + "': duplicate points " +
                                  std::to_string(i) + " and " + std::to_string(j));
        }
}

bool Constellation4D::is_zero_mean(double tol) const {
    const cdouble mx = raw_moment(1, 0, 0, 0);
    const cdouble my = raw_moment(0, 0, 1, 0);
    return std::abs(mx) <= tol && std::abs(my) <= tol;
}

namespace {

std::vector<cdouble> qam_2d_points(int order) {
    std::vector<cdouble> pts;
    switch (order) {
        case 4:
            for (double re : {-1.0, 1.0})
                for (double im : {-1.0, 1.0}) pts.emplace_back(re, im);
            break;
        case 8:
            // rectangular cross layout: 4 in-phase levels, 2 quadrature levels
            for (double re : {-3.0, -1.0, 1.0, 3.0})
                for (double im : {-1.0, 1.0}) pts.emplace_back(re, im);
            break;
        case 16:
            for (double re : {-3.0, -1.0, 1.0, 3.0})
                for (double im : {-3.0, -1.0, 1.0, 3.0}) pts.emplace_back(re, im);
            break;
        case 64:
            for (double re : {-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0})
                for (double im : {-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0}) pts.emplace_back(re, im);
            break;
        default:
            throw ConfigError("make_pm_qam: unsupported per-polarization order " + std::to_string(order) +
                              " (supported: 4, 8, 16, 64)");
    }
    return pts;
}

// Reorders points so that each point is immediately followed by its negation.
// Composition quantizers break remainder ties by point index, so this keeps
// integer compositions sign-symmetric whenever the tied group has even size.
template <typename PointT, typename NegEq>
void reorder_sign_pairs(std::vector<PointT>& pts, std::vector<double>& probs, const NegEq& is_neg_pair) {
    std::vector<PointT> new_pts;
    std::vector<double> new_probs;
    std::vector<bool> used(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        new_pts.push_back(pts[i]);
        new_probs.push_back(probs[i]);
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (!used[j] && is_neg_pair(pts[i], pts[j])) {
                used[j] = true;
                new_pts.push_back(pts[j]);
                new_probs.push_back(probs[j]);
                break;
            }
        }
    }
    pts = std::move(new_pts);
    probs = std::move(new_probs);
}

Constellation4D finish(Constellation4D c) {
    reorder_sign_pairs(c.points, c.probs, [](const Jones& a, const Jones& b) {
        return std::abs(a.x + b.x) < 1e-12 && std::abs(a.y + b.y) < 1e-12;
    });
    c = c.normalized();
    c.validate();
    return c;
}

} // namespace

Constellation4D make_pm_qam(int order_per_pol, const std::optional<std::vector<double>>& probs) {
    const auto pts2d = qam_2d_points(order_per_pol);
    const std::size_t m2 = pts2d.size();
    Constellation4D c;
    c.label = "pm-" + std::to_string(order_per_pol) + "qam";
    c.points.reserve(m2 * m2);
    for (std::size_t ix = 0; ix < m2; ++ix)
        for (std::size_t iy = 0; iy < m2; ++iy) c.points.push_back({pts2d[ix], pts2d[iy]});
    if (probs) {
        if (probs->size() != m2 * m2)
            throw ConfigError("make_pm_qam: probability vector has " + std::to_string(probs->size()) +
                              " entries, expected " + std::to_string(m2 * m2));
        c.probs = *probs;
    } else {
        c.probs.assign(m2 * m2, 1.0 / static_cast<double>(m2 * m2));
    }
    return finish(std::move(c));
}

Constellation4D make_pm_8qam_star() {
    std::vector<cdouble> pts2d;
    const double r_out = 1.0 + std::sqrt(3.0);
    for (int k = 0; k < 4; ++k) {
        const double phi = 0.5 * M_PI * k;
        pts2d.emplace_back(std::cos(phi), std::sin(phi));
    }
    for (int k = 0; k < 4; ++k) {
        const double phi = 0.5 * M_PI * k + 0.25 * M_PI;
        pts2d.emplace_back(r_out * std::cos(phi), r_out * std::sin(phi));
    }
    Constellation4D c;
    c.label = "pm-8qam-star";
    for (const auto& px : pts2d)
        for (const auto& py : pts2d) c.points.push_back({px, py});
    c.probs.assign(64, 1.0 / 64.0);
    return finish(std::move(c));
}

Constellation4D make_prs64(double ring_ratio) {
    if (!(ring_ratio > 0.0) || ring_ratio >= 1.0)
        throw ConfigError("make_prs64: ring ratio must be in (0, 1)");
    const double r_big = 1.0;
    const double r_small = ring_ratio;
    Constellation4D c;
    c.label = "4d-64prs";
    for (int state = 0; state < 2; ++state) {
        const double rx = state == 0 ? r_big : r_small;
        const double ry = state == 0 ? r_small : r_big;
        for (int mx = 0; mx < 8; ++mx) {
            for (int my = 0; my < 8; ++my) {
                if ((mx + my) % 2 != 0) continue; // joint phase parity
                const double tx = (2 * mx + 1) * M_PI / 8.0;
                const double ty = (2 * my + 1) * M_PI / 8.0;
                c.points.push_back({cdouble(rx * std::cos(tx), rx * std::sin(tx)),
                                    cdouble(ry * std::cos(ty), ry * std::sin(ty))});
            }
        }
    }
    c.probs.assign(c.points.size(), 1.0 / static_cast<double>(c.points.size()));
    return finish(std::move(c));
}

std::vector<std::string> builtin_constellation_names() {
    return {"pm-qpsk", "pm-8qam", "pm-8qam-star", "pm-16qam", "pm-64qam", "4d-64prs"};
}

Constellation4D builtin_constellation(const std::string& name) {
    if (name == "pm-qpsk" || name == "pm-4qam") return make_pm_qam(4);
    if (name == "pm-8qam") return make_pm_qam(8);
    if (name == "pm-8qam-star") return make_pm_8qam_star();
    if (name == "pm-16qam") return make_pm_qam(16);
    if (name == "pm-64qam") return make_pm_qam(64);
    if (name == "4d-64prs") return make_prs64();
    throw ConfigError("unknown built-in constellation '" + name + "'");
}

Constellation4D load_constellation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open constellation file '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw ConfigError(path + ": empty file");
    int m = 0;
    int dims = 0;
    if (std::sscanf(header.c_str(), "M=%d dims=%d", &m, &dims) != 2)
        throw ConfigError(path + ": bad header '" + header + "' (expected 'M=<int> dims=4')");
    if (dims != 4) throw ConfigError(path + ": dims=" + std::to_string(dims) + " unsupported (need 4)");
    if (m < 1) throw ConfigError(path + ": M must be >= 1");

    Constellation4D c;
    c.label = path;
    bool any_prob = false;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ls(line);
        double v[5];
        int got = 0;
        while (got < 5 && (ls >> v[got])) ++got;
        std::string trailing;
        if (ls >> trailing)
            throw ConfigError(path + ": row " + std::to_string(row + 1) + ": too many columns");
        if (got != 4 && got != 5)
            throw ConfigError(path + ": row " + std::to_string(row + 1) + ": expected 4 or 5 columns, got " +
                              std::to_string(got));
        c.points.push_back({cdouble(v[0], v[1]), cdouble(v[2], v[3])});
        if (got == 5) {
            any_prob = true;
            c.probs.push_back(v[4]);
        } else {
            c.probs.push_back(-1.0);
        }
        ++row;
    }
    if (row != m)
        throw ConfigError(path + ": header says M=" + std::to_string(m) + " but file has " +
                          std::to_string(row) + " rows");
    if (any_prob) {
        double sum = 0.0;
        for (double p : c.probs) {
            if (p < 0.0) throw ConfigError(path + ": rows mix present and missing probabilities");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw ConfigError(path + ": probabilities sum to " + std::to_string(sum));
        for (double& p : c.probs) p /= sum;
    } else {
        c.probs.assign(c.points.size(), 1.0 / static_cast<double>(c.points.size()));
    }
    Constellation4D out = c.normalized();
    out.validate();
    return out;
}

void save_constellation(const std::string& path, const Constellation4D& c) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write constellation file '" + path + "'");
    out << "M=" << c.points.size() << " dims=4\n";
    char buf[256];
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g\n", c.points[i].x.real(),
                      c.points[i].x.imag(), c.points[i].y.real(), c.points[i].y.imag(), c.probs[i]);
        out << buf;
    }
}

} // namespace nli
