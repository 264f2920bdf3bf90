#include "qreset/params.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qreset/errors.hpp"

namespace qreset {

using ordered_json = nlohmann::ordered_json;

void SystemParams::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw InvalidParameter("SystemParams: " + what);
    };
    require(omega_ge.rad_per_s() > 0, "omega_ge must be positive");
    require(omega_r.rad_per_s() > 0, "omega_r must be positive");
    require(omega_m.rad_per_s() > 0, "omega_m must be positive");
    require(alpha.rad_per_s() != 0, "alpha must be nonzero");
    require(kappa.rad_per_s() > 0, "kappa must be positive");
    require(kappa_m.rad_per_s() > 0, "kappa_m must be positive");
    require(kappa_int.rad_per_s() >= 0, "kappa_int must be >= 0");
    require(g_r.rad_per_s() > 0, "g_r must be positive");
    require(g_m.rad_per_s() > 0, "g_m must be positive");
    require(t1_ge_s > 0 && t1_ef_s > 0 && t2_ge_s > 0 && t2_ef_s > 0,
            "T1/T2 times must be positive");
    require(n_th >= 0.0 && n_th < 0.5, "n_th must be in [0, 0.5)");
    require(k_up.rad_per_s() >= 0, "k_up must be >= 0");
    require(gamma_phi_ge() >= -1e-12 / t1_ge_s, "gamma_phi_ge is negative (T2_ge > 2 T1_ge)");
    require(gamma_phi_ef() >= -1e-12 / t1_ef_s, "gamma_phi_ef is negative (T2_ef > 2 T1_ef)");
}

SystemParams default_params() {
    SystemParams p;
    p.omega_ge = Frequency::from_mhz(6343.0);
    p.omega_r = Frequency::from_mhz(8400.0);
    p.omega_m = Frequency::from_mhz(4787.0);
    p.alpha = Frequency::from_mhz(-265.0);
    p.chi_r = Frequency::from_mhz(-6.3);
    p.chi_m = Frequency::from_mhz(-5.8);
    p.kappa = Frequency::from_mhz(9.0);
    p.kappa_m = Frequency::from_mhz(12.6);
    p.kappa_int = Frequency::from_mhz(0.0);
    p.g_r = Frequency::from_mhz(335.0);
    p.g_m = Frequency::from_mhz(210.0);
    p.t1_ge_s = 5.5e-6;
    p.t1_ef_s = 2.1e-6;
    p.t2_ge_s = 7.6e-6;
    p.t2_ef_s = 4.2e-6;
    p.n_th = 0.17;
    p.k_up = Frequency::from_khz(5.0);
    p.purcell_r = PurcellMetadata{8443.0, 60.0, 20.9};
    p.purcell_m = PurcellMetadata{4778.0, 91.0, 13.6};
    return p;
}

void DriveConfig::validate() const {
    if (g_tilde.rad_per_s() < 0) throw InvalidParameter("DriveConfig: g_tilde must be >= 0");
    if (omega_ef.rad_per_s() < 0) throw InvalidParameter("DriveConfig: omega_ef must be >= 0");
}

namespace {

const std::set<std::string> kParamKeys = {
    "omega_ge_mhz", "omega_r_mhz", "omega_m_mhz", "alpha_mhz",  "chi_r_mhz",
    "chi_m_mhz",    "kappa_mhz",   "kappa_m_mhz", "kappa_int_mhz", "g_r_mhz",
    "g_m_mhz",      "t1_ge_us",    "t1_ef_us",    "t2_ge_us",   "t2_ef_us",
    "n_th",         "k_up_khz",    "purcell_r",   "purcell_m"};

PurcellMetadata purcell_from_json(const ordered_json& j) {
    PurcellMetadata m;
    m.omega_pf_mhz = j.at("omega_pf_mhz").get<double>();
    m.q_pf = j.at("q_pf").get<double>();
    m.j_mhz = j.at("j_mhz").get<double>();
    return m;
}

ordered_json purcell_to_json(const PurcellMetadata& m) {
    return ordered_json{{"omega_pf_mhz", m.omega_pf_mhz}, {"q_pf", m.q_pf}, {"j_mhz", m.j_mhz}};
}

}  // namespace

std::string params_to_json(const SystemParams& p) {
    ordered_json j;
    j["omega_ge_mhz"] = p.omega_ge.mhz();
    j["omega_r_mhz"] = p.omega_r.mhz();
    j["omega_m_mhz"] = p.omega_m.mhz();
    j["alpha_mhz"] = p.alpha.mhz();
    j["chi_r_mhz"] = p.chi_r.mhz();
    j["chi_m_mhz"] = p.chi_m.mhz();
    j["kappa_mhz"] = p.kappa.mhz();
    j["kappa_m_mhz"] = p.kappa_m.mhz();
    j["kappa_int_mhz"] = p.kappa_int.mhz();
    j["g_r_mhz"] = p.g_r.mhz();
    j["g_m_mhz"] = p.g_m.mhz();
    j["t1_ge_us"] = p.t1_ge_s * 1e6;
    j["t1_ef_us"] = p.t1_ef_s * 1e6;
    j["t2_ge_us"] = p.t2_ge_s * 1e6;
    j["t2_ef_us"] = p.t2_ef_s * 1e6;
    j["n_th"] = p.n_th;
    j["k_up_khz"] = p.k_up.khz();
    if (p.purcell_r) j["purcell_r"] = purcell_to_json(*p.purcell_r);
    if (p.purcell_m) j["purcell_m"] = purcell_to_json(*p.purcell_m);
    return j.dump(2) + "\n";
}

namespace {

// Starts from an existing set (usually the defaults) and overrides the keys
// present; rejects anything it does not recognize.
SystemParams apply_overrides_json(SystemParams p, const ordered_json& j) {
    if (!j.is_object()) throw ConfigError("parameter section must be a JSON object");
    for (auto& [key, val] : j.items()) {
        if (!kParamKeys.count(key)) throw ConfigError("unknown parameter key: " + key);
        if (key == "purcell_r") p.purcell_r = purcell_from_json(val);
        else if (key == "purcell_m") p.purcell_m = purcell_from_json(val);
        else {
            const double v = val.get<double>();
            if (key == "omega_ge_mhz") p.omega_ge = Frequency::from_mhz(v);
            else if (key == "omega_r_mhz") p.omega_r = Frequency::from_mhz(v);
            else if (key == "omega_m_mhz") p.omega_m = Frequency::from_mhz(v);
            else if (key == "alpha_mhz") p.alpha = Frequency::from_mhz(v);
            else if (key == "chi_r_mhz") p.chi_r = Frequency::from_mhz(v);
            else if (key == "chi_m_mhz") p.chi_m = Frequency::from_mhz(v);
            else if (key == "kappa_mhz") p.kappa = Frequency::from_mhz(v);
            else if (key == "kappa_m_mhz") p.kappa_m = Frequency::from_mhz(v);
            else if (key == "kappa_int_mhz") p.kappa_int = Frequency::from_mhz(v);
            else if (key == "g_r_mhz") p.g_r = Frequency::from_mhz(v);
            else if (key == "g_m_mhz") p.g_m = Frequency::from_mhz(v);
            else if (key == "t1_ge_us") p.t1_ge_s = v * 1e-6;
            else if (key == "t1_ef_us") p.t1_ef_s = v * 1e-6;
            else if (key == "t2_ge_us") p.t2_ge_s = v * 1e-6;
            else if (key == "t2_ef_us") p.t2_ef_s = v * 1e-6;
            else if (key == "n_th") p.n_th = v;
            else if (key == "k_up_khz") p.k_up = Frequency::from_khz(v);
        }
    }
    p.validate();
    return p;
}

}  // namespace

SystemParams params_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("parameter file is not valid JSON: ") + e.what());
    }
    return apply_overrides_json(default_params(), j);
}

SystemParams apply_param_overrides(const SystemParams& base, const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("parameter overrides are not valid JSON: ") + e.what());
    }
    return apply_overrides_json(base, j);
}

SystemParams params_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str());
}

void params_to_file(const SystemParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write parameter file: " + path);
    out << params_to_json(p);
}

}  // namespace qreset
