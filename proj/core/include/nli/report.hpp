#pragma once

// Per-channel eta reports, CSV serialization, and report comparison.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nli/errors.hpp"

namespace nli {

struct EtaRow {
    int channel = 0;          // 1-based
    double f_center_thz = 0.0;
    double eta_db = 0.0;      // 10 log10(eta * 1 W^2)
    double sci_db = 0.0;
    double xpm_db = 0.0;
    double stderr_db = 0.0;   // 0 for deterministic estimators
};

struct EtaReport {
    std::string estimator; // FourD | GN | EGN | RP1MC | SSFM
    std::string format;
    std::string link_fingerprint;
    std::string prng;
    std::vector<EtaRow> rows;

    void validate() const;
    static bool stderr_consistent(const EtaRow& r);
};

double db10(double linear);
double undb10(double db);

// CSV schema: channel_index, f_center_THz, eta_dB, sci_dB, xpm_dB, estimator,
// format, stderr_dB. Header comments carry the config hash and seeds.
void write_eta_csv(const std::string& path, const EtaReport& report,
                   const std::map<std::string, std::string>& header_meta);
EtaReport read_eta_csv(const std::string& path, std::map<std::string, std::string>* header_meta = nullptr);

struct ComparisonRow {
    int channel = 0;
    double eta_a_db = 0.0;
    double eta_b_db = 0.0;
    double gap_db = 0.0;
};

struct ComparisonReport {
    std::string label_a, label_b;
    std::vector<ComparisonRow> rows;
    double mean_abs_gap_db = 0.0;
    double max_abs_gap_db = 0.0;
    std::vector<int> flagged; // channels exceeding the threshold

    static ComparisonReport diff(const EtaReport& a, const EtaReport& b, double flag_threshold_db);
};

} // namespace nli
