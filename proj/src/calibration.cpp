#include "qreset/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "qreset/effective.hpp"
#include "qreset/errors.hpp"

namespace qreset {

void CalibDataset::validate() const {
    if (x.size() != y.size()) throw InvalidParameter("CalibDataset: x/y length mismatch");
    if (!y_err.empty() && y_err.size() != y.size())
        throw InvalidParameter("CalibDataset: y_err length mismatch");
    for (const double v : y)
        if (v < -0.05 || v > 1.05)
            throw InvalidParameter("CalibDataset: population outside [-0.05, 1.05]");
}

namespace {

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

/// Dominant angular frequency of (x, y) by a dense scan of the periodogram
/// |sum (y - mean) e^{i w x}|^2; robust initializer for the Rabi fits.
double dominant_frequency(std::span<const double> x, std::span<const double> y) {
    const double span = x.back() - x.front();
    if (span <= 0) return 0.0;
    const double ybar = mean(y);
    const double w_min = 0.5 * two_pi / span;
    const double w_max = 0.5 * two_pi * double(x.size() - 1) / span;  // ~Nyquist
    double best_w = w_min, best_p = -1.0;
    const int n_scan = 400;
    for (int k = 0; k <= n_scan; ++k) {
        const double w = w_min + (w_max - w_min) * double(k) / n_scan;
        double re = 0, im = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            re += (y[i] - ybar) * std::cos(w * x[i]);
            im += (y[i] - ybar) * std::sin(w * x[i]);
        }
        const double p = re * re + im * im;
        if (p > best_p) {
            best_p = p;
            best_w = w;
        }
    }
    return best_w;
}

}  // namespace

GaussianPeak fit_gaussian_peak(const CalibDataset& data) {
    data.validate();
    const size_t n = data.x.size();
    if (n < 5) throw FitFailure("fit_gaussian_peak: need at least 5 points");

    const double ybar = mean(data.y);
    const auto [ymin_it, ymax_it] = std::minmax_element(data.y.begin(), data.y.end());
    const double up = *ymax_it - ybar, down = ybar - *ymin_it;
    const double spread = *ymax_it - *ymin_it;
    if (spread < 1e-9) throw FitFailure("fit_gaussian_peak: flat data");

    // Sign auto-detection: a dip pulls further below the baseline than the
    // baseline noise reaches above it, and vice versa.
    const bool is_dip = down > up;
    const size_t i_ext = is_dip ? size_t(ymin_it - data.y.begin()) : size_t(ymax_it - data.y.begin());
    const double x_span = std::abs(data.x.back() - data.x.front());

    Eigen::VectorXd p0(4);  // center, width, amplitude, offset
    p0 << data.x[i_ext], x_span / 6.0, (is_dip ? -down : up) * 1.2, ybar;
    Eigen::VectorXd scales(4);
    scales << std::max(x_span, 1e-12), std::max(x_span / 4.0, 1e-12), 1.0, 1.0;

    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n);
        for (size_t i = 0; i < n; ++i) {
            const double z = (data.x[i] - p(0)) / p(1);
            r(i) = p(3) + p(2) * std::exp(-0.5 * z * z) - data.y[i];
        }
        return r;
    };

    FitResult res;
    try {
        res = fit_multistart(residuals, p0, FitOptions{}, scales);
    } catch (const FitFailure& e) {
        throw FitFailure(std::string("fit_gaussian_peak: ") + e.what());
    }
    // A fit that degenerates to the baseline has no usable center.
    if (std::abs(res.params(2)) < 3.0 * std::sqrt(res.cost / double(n)))
        throw FitFailure("fit_gaussian_peak: no significant peak found", res.cost);
    if (std::abs(res.params(1)) > 10.0 * x_span)
        throw FitFailure("fit_gaussian_peak: peak width unresolved", res.cost);

    GaussianPeak out;
    out.center = res.params(0);
    out.width = std::abs(res.params(1));
    out.amplitude = res.params(2);
    out.offset = res.params(3);
    out.covariance = res.covariance;
    return out;
}

QuadraticFit fit_quadratic_stark(std::span<const double> amplitudes,
                                 std::span<const double> shifts, bool with_offset) {
    if (amplitudes.size() != shifts.size())
        throw InvalidParameter("fit_quadratic_stark: length mismatch");
    const size_t n = amplitudes.size();
    if (n < 3) throw FitFailure("fit_quadratic_stark: need at least 3 points");

    const int k = with_offset ? 2 : 1;
    Eigen::MatrixXd design(n, k);
    Eigen::VectorXd rhs(n);
    for (size_t i = 0; i < n; ++i) {
        design(i, 0) = amplitudes[i] * amplitudes[i];
        if (with_offset) design(i, 1) = 1.0;
        rhs(i) = shifts[i];
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                                Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.rank() < k) throw FitFailure("fit_quadratic_stark: rank-deficient design");
    const Eigen::VectorXd coef = svd.solve(rhs);

    const double ssr = (design * coef - rhs).squaredNorm();
    const double s2 = n > size_t(k) ? ssr / double(n - size_t(k)) : 0.0;
    const Eigen::MatrixXd cov =
        (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(k, k)) * s2;

    QuadraticFit out;
    out.c2 = coef(0);
    out.c0 = with_offset ? coef(1) : 0.0;
    out.with_offset = with_offset;
    out.covariance.setZero();
    out.covariance.topLeftCorner(k, k) = cov;
    return out;
}

F0g1RabiFit fit_f0g1_rabi(const std::vector<CalibDataset>& datasets, const FitOptions& opt) {
    if (datasets.empty()) throw FitFailure("fit_f0g1_rabi: no datasets");
    const size_t nd = datasets.size();
    size_t n_total = 0;
    for (const auto& ds : datasets) {
        ds.validate();
        if (ds.x.size() < 8) throw FitFailure("fit_f0g1_rabi: need >= 8 time points per set");
        n_total += ds.x.size();
    }

    // Parameter layout: [lambda, mu, t0, kappa, g_1 .. g_nd]
    const int np = 4 + int(nd);
    Eigen::VectorXd p0(np), scales(np);
    p0 << 1.0, 0.0, 0.0, 0.0, Eigen::VectorXd::Zero(int(nd));
    double kappa_init = 0.0;
    for (size_t d = 0; d < nd; ++d) {
        const double w_pop = dominant_frequency(datasets[d].x, datasets[d].y);
        p0(4 + int(d)) = 0.5 * w_pop;  // population oscillates at 2 g
        kappa_init += w_pop / double(nd);
    }
    p0(3) = kappa_init;  // same order of magnitude as the oscillation rates
    const double t_scale = datasets[0].x.back() - datasets[0].x.front();
    scales << 1.0, 0.2, 0.05 * t_scale, std::max(kappa_init, 1.0 / t_scale),
        Eigen::VectorXd::Constant(int(nd), std::max(p0.segment(4, int(nd)).maxCoeff(),
                                                    0.5 / t_scale));

    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n_total);
        size_t at = 0;
        for (size_t d = 0; d < nd; ++d) {
            const double g = p(4 + int(d));
            for (size_t i = 0; i < datasets[d].x.size(); ++i) {
                const double t = datasets[d].x[i] - p(2);
                const double pf = t >= 0 ? two_level_pf(t, g, p(3), 0.0) : 1.0;
                r(at++) = p(0) * pf + p(1) - datasets[d].y[i];
            }
        }
        return r;
    };

    FitResult res;
    try {
        res = fit_multistart(residuals, p0, opt, scales);
    } catch (const FitFailure& e) {
        std::string detail = "fit_f0g1_rabi failed;";
        for (size_t d = 0; d < nd; ++d)
            detail += " set" + std::to_string(d) + " n=" + std::to_string(datasets[d].x.size());
        throw FitFailure(detail + ": " + e.what());
    }

    F0g1RabiFit out;
    out.lambda = res.params(0);
    out.mu = res.params(1);
    out.t0_s = res.params(2);
    out.kappa = std::abs(res.params(3));
    out.kappa_err = std::sqrt(std::max(res.covariance(3, 3), 0.0));
    out.cost = res.cost;
    for (size_t d = 0; d < nd; ++d) {
        out.g_tilde.push_back(std::abs(res.params(4 + int(d))));
        out.g_tilde_err.push_back(
            std::sqrt(std::max(res.covariance(4 + int(d), 4 + int(d)), 0.0)));
    }
    return out;
}

EfRabiFit fit_ef_rabi(const std::vector<CalibDataset>& datasets, const FitOptions& opt) {
    if (datasets.empty()) throw FitFailure("fit_ef_rabi: no datasets");
    const size_t nd = datasets.size();
    size_t n_total = 0;
    for (const auto& ds : datasets) {
        ds.validate();
        if (ds.x.size() < 8) throw FitFailure("fit_ef_rabi: need >= 8 time points per set");
        n_total += ds.x.size();
    }

    // Parameter layout: [gamma_a, gamma_b, t0, Omega_1 .. Omega_nd]
    const int np = 3 + int(nd);
    Eigen::VectorXd p0(np), scales(np);
    const double t_scale = datasets[0].x.back() - datasets[0].x.front();
    p0 << 0.05 / t_scale, 0.05 / t_scale, 0.0, Eigen::VectorXd::Zero(int(nd));
    for (size_t d = 0; d < nd; ++d) {
        const double w_pop = dominant_frequency(datasets[d].x, datasets[d].y);
        p0(3 + int(d)) = 2.0 * w_pop;  // cos(Omega t / 2): population rate is Omega / 2
    }
    scales << 1.0 / t_scale, 1.0 / t_scale, 0.05 * t_scale,
        Eigen::VectorXd::Constant(int(nd),
                                  std::max(p0.tail(int(nd)).maxCoeff(), 1.0 / t_scale));

    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n_total);
        size_t at = 0;
        for (size_t d = 0; d < nd; ++d) {
            const double om = p(3 + int(d));
            for (size_t i = 0; i < datasets[d].x.size(); ++i) {
                const double t = datasets[d].x[i] - p(2);
                double model = 0.0;
                if (t >= 0)
                    model = 0.5 * std::exp(-p(0) * t) *
                            (1.0 - std::exp(-p(1) * t) * std::cos(0.5 * om * t));
                r(at++) = model - datasets[d].y[i];
            }
        }
        return r;
    };

    FitResult res;
    try {
        res = fit_multistart(residuals, p0, opt, scales);
    } catch (const FitFailure& e) {
        throw FitFailure(std::string("fit_ef_rabi failed: ") + e.what());
    }

    // An oscillation-free "fit" (Omega stuck near zero) means the drive did
    // not actually rotate the population.
    for (size_t d = 0; d < nd; ++d)
        if (std::abs(res.params(3 + int(d))) * t_scale < 0.5)
            throw FitFailure("fit_ef_rabi: no oscillation resolved in dataset " +
                             std::to_string(d), res.cost);

    EfRabiFit out;
    out.gamma_a = res.params(0);
    out.gamma_b = res.params(1);
    out.t0_s = res.params(2);
    out.cost = res.cost;
    for (size_t d = 0; d < nd; ++d) {
        out.omega_fit.push_back(std::abs(res.params(3 + int(d))));
        out.omega_fit_err.push_back(
            std::sqrt(std::max(res.covariance(3 + int(d), 3 + int(d)), 0.0)));
    }
    return out;
}

void CalibrationResult::validate() const {
    if (rate_slope_f0g1_mhz_per_v <= 0 || rate_slope_ef_mhz_per_v <= 0)
        throw InvalidParameter("CalibrationResult: rate slopes must be positive");
    if (kappa_fit.rad_per_s() <= 0)
        throw InvalidParameter("CalibrationResult: kappa must be positive");
}

double CalibrationResult::f0g1_amp_for(Frequency g_tilde) const {
    return g_tilde.mhz() / rate_slope_f0g1_mhz_per_v;
}

double CalibrationResult::ef_amp_for(Frequency omega_ef) const {
    return omega_ef.mhz() / rate_slope_ef_mhz_per_v;
}

namespace {

// Slope-only straight line through the origin, with the standard error.
std::pair<double, double> fit_slope(const std::vector<RatePoint>& pts) {
    double sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        sxx += p.amplitude_v * p.amplitude_v;
        sxy += p.amplitude_v * p.rate_mhz;
    }
    const double slope = sxy / sxx;
    double ssr = 0;
    for (const auto& p : pts) {
        const double r = p.rate_mhz - slope * p.amplitude_v;
        ssr += r * r;
    }
    const double dof = std::max<double>(double(pts.size()) - 1.0, 1.0);
    return {slope, std::sqrt(ssr / dof / sxx)};
}

}  // namespace

CalibrationResult run_pipeline(const LabTruth& lab, const CalibPlan& plan) {
    if (plan.stark_amps_v.empty() || plan.ef_amps_v.empty() || plan.f0g1_amps_v.empty())
        throw InvalidParameter("run_pipeline: plan grids must be non-empty");
    CalibrationResult result;

    // Step 1: f0-g1 Stark shift vs drive amplitude.
    std::vector<double> centers1;
    try {
        const auto data = generate_step1(lab, plan);
        for (const auto& ds : data) centers1.push_back(fit_gaussian_peak(ds).center);
    } catch (const FitFailure& e) {
        throw PipelineFailure(1, e.what(), e.residual);
    }
    try {
        const QuadraticFit q = fit_quadratic_stark(plan.stark_amps_v, centers1);
        result.stark_f0g1_mhz_per_v2 = q.c2;
        result.stark_f0g1_err = std::sqrt(std::max(q.covariance(0, 0), 0.0));
    } catch (const FitFailure& e) {
        throw PipelineFailure(1, e.what(), e.residual);
    }

    // Step 2: e-f Rabi rate vs amplitude.
    try {
        const auto data = generate_step2(lab, plan);
        const EfRabiFit fit = fit_ef_rabi(data);
        for (size_t d = 0; d < data.size(); ++d) {
            RatePoint pt;
            pt.amplitude_v = plan.ef_amps_v[d];
            pt.rate_mhz = Frequency::from_rad_per_s(drive_rate_from_ef_fit(fit.omega_fit[d])).mhz();
            pt.rate_err_mhz =
                Frequency::from_rad_per_s(drive_rate_from_ef_fit(fit.omega_fit_err[d])).mhz();
            result.rates_ef.push_back(pt);
        }
        auto [slope, err] = fit_slope(result.rates_ef);
        result.rate_slope_ef_mhz_per_v = slope;
    } catch (const FitFailure& e) {
        throw PipelineFailure(2, e.what(), e.residual);
    }

    // Step 3: e-f Stark shift under the f0-g1 drive, using the slope just
    // measured to shape a pi-area probe pulse and the step-1 map to keep the
    // f0-g1 drive resonant.
    std::vector<double> centers3;
    try {
        const double pop_rate_needed = std::numbers::pi / 140e-9;
        const double ef_amp =
            (pop_rate_needed / 2.0) / two_pi / 1e6 / result.rate_slope_ef_mhz_per_v;
        const auto data = generate_step3(lab, plan, ef_amp, result.stark_f0g1_mhz_per_v2);
        for (const auto& ds : data) centers3.push_back(fit_gaussian_peak(ds).center);
        const QuadraticFit q = fit_quadratic_stark(plan.stark_amps_v, centers3);
        result.stark_ef_mhz_per_v2 = q.c2;
        result.stark_ef_err = std::sqrt(std::max(q.covariance(0, 0), 0.0));
    } catch (const FitFailure& e) {
        throw PipelineFailure(3, e.what(), e.residual);
    }

    // Step 4: f0-g1 rate vs amplitude (Stark-compensated drive), plus kappa.
    try {
        const auto data = generate_step4(lab, plan, result.stark_f0g1_mhz_per_v2);
        const F0g1RabiFit fit = fit_f0g1_rabi(data);
        for (size_t d = 0; d < data.size(); ++d) {
            RatePoint pt;
            pt.amplitude_v = plan.f0g1_amps_v[d];
            pt.rate_mhz =
                Frequency::from_rad_per_s(drive_rate_from_f0g1_fit(fit.g_tilde[d])).mhz();
            pt.rate_err_mhz = Frequency::from_rad_per_s(fit.g_tilde_err[d]).mhz();
            result.rates_f0g1.push_back(pt);
        }
        auto [slope, err] = fit_slope(result.rates_f0g1);
        result.rate_slope_f0g1_mhz_per_v = slope;
        result.kappa_fit = Frequency::from_rad_per_s(fit.kappa);
        result.kappa_err_mhz = Frequency::from_rad_per_s(fit.kappa_err).mhz();
    } catch (const FitFailure& e) {
        throw PipelineFailure(4, e.what(), e.residual);
    }

    result.validate();
    return result;
}

std::string calibration_result_to_json(const CalibrationResult& r) {
    nlohmann::ordered_json j;
    j["stark_f0g1_mhz_per_v2"] = r.stark_f0g1_mhz_per_v2;
    j["stark_f0g1_err"] = r.stark_f0g1_err;
    j["stark_ef_mhz_per_v2"] = r.stark_ef_mhz_per_v2;
    j["stark_ef_err"] = r.stark_ef_err;
    j["rate_slope_f0g1_mhz_per_v"] = r.rate_slope_f0g1_mhz_per_v;
    j["rate_slope_ef_mhz_per_v"] = r.rate_slope_ef_mhz_per_v;
    j["kappa_fit_mhz"] = r.kappa_fit.mhz();
    j["kappa_err_mhz"] = r.kappa_err_mhz;
    auto rate_block = [](const std::vector<RatePoint>& pts) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& p : pts)
            arr.push_back({{"amplitude_v", p.amplitude_v},
                           {"rate_mhz", p.rate_mhz},
                           {"rate_err_mhz", p.rate_err_mhz}});
        return arr;
    };
    j["rates_f0g1"] = rate_block(r.rates_f0g1);
    j["rates_ef"] = rate_block(r.rates_ef);
    return j.dump(2) + "\n";
}

}  // namespace qreset
