#include "qreset/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "qreset/errors.hpp"

namespace qreset {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_to_string(const CsvTable& table) {
    std::string out;
    for (const auto& c : table.comments) out += "# " + c + "\n";
    for (size_t i = 0; i < table.columns.size(); ++i) {
        out += table.columns[i];
        out += (i + 1 < table.columns.size()) ? ',' : '\n';
    }
    const size_t rows = table.data.empty() ? 0 : table.data[0].size();
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < table.data.size(); ++c) {
            out += format_double(table.data[c][r]);
            out += (c + 1 < table.data.size()) ? ',' : '\n';
        }
    }
    return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << csv_to_string(table);
}

CsvTable trajectory_table(const PopulationTrajectory& traj) {
    CsvTable t;
    t.comments = {"columns: time [s], transmon populations, mean photon number"};
    t.columns = {"time_s", "p_g", "p_e", "p_f", "photon"};
    t.data = {traj.times_s, traj.p_g, traj.p_e, traj.p_f, traj.photon};
    return t;
}

std::string trajectory_to_json(const PopulationTrajectory& traj) {
    nlohmann::ordered_json j;
    j["time_s"] = traj.times_s;
    j["p_g"] = traj.p_g;
    j["p_e"] = traj.p_e;
    j["p_f"] = traj.p_f;
    j["photon"] = traj.photon;
    return j.dump(2) + "\n";
}

CsvTable landscape_table(const ResetRateLandscape& ls) {
    CsvTable t;
    t.comments = {"reset rate Gamma over the drive-rate grid",
                  "columns: g_tilde and omega_ef in cyclic MHz, gamma_mhz = Gamma/2pi"};
    t.columns = {"g_tilde_mhz", "omega_ef_mhz", "gamma_mhz"};
    std::vector<double> g, e, v;
    for (size_t i = 0; i < ls.g_axis.size(); ++i)
        for (size_t j = 0; j < ls.ef_axis.size(); ++j) {
            g.push_back(ls.g_axis[i].mhz());
            e.push_back(ls.ef_axis[j].mhz());
            v.push_back(Frequency::from_rad_per_s(ls.gamma(int(i), int(j))).mhz());
        }
    t.data = {g, e, v};
    return t;
}

CsvTable ridge_table(const ResetRateLandscape& ls) {
    CsvTable t;
    t.comments = {"omega_ef maximizing Gamma at each g_tilde"};
    t.columns = {"g_tilde_mhz", "omega_ef_opt_mhz", "gamma_mhz"};
    std::vector<double> g, e, v;
    for (size_t i = 0; i < ls.g_axis.size(); ++i) {
        g.push_back(ls.g_axis[i].mhz());
        e.push_back(ls.ridge[i].omega_ef.mhz());
        v.push_back(ls.ridge[i].gamma.mhz());
    }
    t.data = {g, e, v};
    return t;
}

std::string landscape_to_json(const ResetRateLandscape& ls) {
    nlohmann::ordered_json j;
    std::vector<double> g, e;
    for (const auto& f : ls.g_axis) g.push_back(f.mhz());
    for (const auto& f : ls.ef_axis) e.push_back(f.mhz());
    j["g_tilde_mhz"] = g;
    j["omega_ef_mhz"] = e;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < ls.gamma.rows(); ++i) {
        std::vector<double> row(static_cast<size_t>(ls.gamma.cols()));
        for (int c = 0; c < ls.gamma.cols(); ++c)
            row[size_t(c)] = Frequency::from_rad_per_s(ls.gamma(i, c)).mhz();
        rows.push_back(std::move(row));
    }
    j["gamma_mhz"] = rows;
    std::vector<double> ro, rg;
    for (const auto& r : ls.ridge) {
        ro.push_back(r.omega_ef.mhz());
        rg.push_back(r.gamma.mhz());
    }
    j["ridge_omega_ef_mhz"] = ro;
    j["ridge_gamma_mhz"] = rg;
    return j.dump(2) + "\n";
}

CsvTable shots_table(const ShotSet& set, const std::vector<double>& herald) {
    CsvTable t;
    t.comments = {"integrated quadratures; label = latent truth state (-1 if unknown)"};
    t.columns = {"u", "v", "label"};
    std::vector<double> u, v, lab, her;
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        u.push_back(set.points(0, i));
        v.push_back(set.points(1, i));
        lab.push_back(set.latent.empty() ? -1.0 : double(set.latent[size_t(i)]));
        if (!herald.empty()) her.push_back(herald[size_t(i)]);
    }
    t.data = {u, v, lab};
    if (!herald.empty()) {
        t.columns.push_back("herald_c1");
        t.data.push_back(her);
    }
    return t;
}

std::string gmm_to_json(const GmmModel& m) {
    nlohmann::ordered_json j;
    for (int s = 0; s < 3; ++s)
        j["means"].push_back({m.means[size_t(s)](0), m.means[size_t(s)](1)});
    j["sigma"] = {{m.sigma(0, 0), m.sigma(0, 1)}, {m.sigma(1, 0), m.sigma(1, 1)}};
    for (int p = 0; p < 3; ++p)
        j["weights"].push_back({m.weights(0, p), m.weights(1, p), m.weights(2, p)});
    return j.dump(2) + "\n";
}

std::string assignment_to_json(const Eigen::Matrix3d& r, double condition_number) {
    nlohmann::ordered_json j;
    for (int row = 0; row < 3; ++row) j["r"].push_back({r(row, 0), r(row, 1), r(row, 2)});
    j["condition_number"] = condition_number;
    return j.dump(2) + "\n";
}

}  // namespace qreset
