#include "nli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nli {

double db10(double linear) {
    return 10.0 * std::log10(linear);
}

double undb10(double db) {
    return std::pow(10.0, db / 10.0);
}

void EtaReport::validate() const {
    for (const auto& r : rows) {
        // NaN or +inf is an error; -inf is the legitimate zero-NLI floor
        if (std::isnan(r.eta_db) || r.eta_db == HUGE_VAL)
            throw NumericalError("EtaReport: bad eta for channel " + std::to_string(r.channel));
        if (!std::isfinite(r.eta_db)) continue;
        // breakdown consistency in linear units (deterministic estimators)
        const double total = undb10(r.eta_db);
        const double parts = undb10(r.sci_db) + undb10(r.xpm_db);
        if (total > 0.0 && std::abs(parts - total) > 1e-10 * total && stderr_consistent(r))
            throw NumericalError("EtaReport: breakdown does not sum to total on channel " +
                                 std::to_string(r.channel));
    }
}

bool EtaReport::stderr_consistent(const EtaRow& r) {
    return r.stderr_db == 0.0; // breakdown contract applies to deterministic estimators
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

void write_eta_csv(const std::string& path, const EtaReport& report,
                   const std::map<std::string, std::string>& header_meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "# estimator: " << report.estimator << "\n";
    out << "# format: " << report.format << "\n";
    out << "# link_fingerprint: " << report.link_fingerprint << "\n";
    if (!report.prng.empty()) out << "# prng: " << report.prng << "\n";
    for (const auto& [k, v] : header_meta) out << "# " << k << ": " << v << "\n";
    out << "channel_index,f_center_THz,eta_dB,sci_dB,xpm_dB,estimator,format,stderr_dB\n";
    for (const auto& r : report.rows) {
        out << r.channel << ',' << fmt(r.f_center_thz) << ',' << fmt(r.eta_db) << ',' << fmt(r.sci_db)
            << ',' << fmt(r.xpm_db) << ',' << report.estimator << ',' << report.format << ','
            << fmt(r.stderr_db) << "\n";
    }
}

EtaReport read_eta_csv(const std::string& path, std::map<std::string, std::string>* header_meta) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    EtaReport rep;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                std::string key = line.substr(1, colon - 1);
                std::string val = line.substr(colon + 1);
                const auto strip = [](std::string& s) {
                    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
                    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
                };
                strip(key);
                strip(val);
                if (key == "estimator") rep.estimator = val;
                else if (key == "format") rep.format = val;
                else if (key == "link_fingerprint") rep.link_fingerprint = val;
                else if (key == "prng") rep.prng = val;
                else if (header_meta) (*header_meta)[key] = val;
            }
            continue;
        }
        if (!header_done) { // column header line
            header_done = true;
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw ConfigError(path + ": malformed CSV row '" + line + "'");
        EtaRow r;
        r.channel = std::stoi(fields[0]);
        r.f_center_thz = std::stod(fields[1]);
        r.eta_db = std::stod(fields[2]);
        r.sci_db = std::stod(fields[3]);
        r.xpm_db = std::stod(fields[4]);
        r.stderr_db = std::stod(fields[7]);
        rep.rows.push_back(r);
        if (rep.estimator.empty()) rep.estimator = fields[5];
        if (rep.format.empty()) rep.format = fields[6];
    }
    return rep;
}

ComparisonReport ComparisonReport::diff(const EtaReport& a, const EtaReport& b, double flag_threshold_db) {
    if (a.rows.size() != b.rows.size())
        throw ConfigError("diff: reports have different channel counts (" + std::to_string(a.rows.size()) +
                          " vs " + std::to_string(b.rows.size()) + ")");
    ComparisonReport cr;
    cr.label_a = a.estimator + "/" + a.format;
    cr.label_b = b.estimator + "/" + b.format;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].channel != b.rows[i].channel)
            throw ConfigError("diff: channel grids do not match");
        if (std::abs(a.rows[i].f_center_thz - b.rows[i].f_center_thz) > 1e-9)
            throw ConfigError("diff: channel center frequencies do not match");
        ComparisonRow row;
        row.channel = a.rows[i].channel;
        row.eta_a_db = a.rows[i].eta_db;
        row.eta_b_db = b.rows[i].eta_db;
        row.gap_db = a.rows[i].eta_db - b.rows[i].eta_db;
        cr.rows.push_back(row);
        const double g = std::abs(row.gap_db);
        sum += g;
        cr.max_abs_gap_db = std::max(cr.max_abs_gap_db, g);
        if (g > flag_threshold_db) cr.flagged.push_back(row.channel);
    }
    cr.mean_abs_gap_db = a.rows.empty() ? 0.0 : sum / static_cast<double>(a.rows.size());
    return cr;
}

} // namespace nli
