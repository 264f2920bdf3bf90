#include "qreset/virtual_lab.hpp"

#include <cmath>
#include <numbers>

#include "qreset/errors.hpp"
#include "qreset/lindblad.hpp"
#include "qreset/operators.hpp"
#include "qreset/rng.hpp"

namespace qreset {

namespace {
// Stream-id experiment slots, one per data product.
constexpr std::uint64_t kStreamStep1 = 1, kStreamStep2 = 2, kStreamStep3 = 3, kStreamStep4 = 4;
constexpr std::uint64_t kStreamReference = 40;  // +0/+1/+2 for preparations g/e/f
constexpr std::uint64_t kStreamHerald = 50;
}  // namespace

LabTruth default_lab_truth(std::uint64_t seed) {
    LabTruth t;
    t.params = default_params();
    t.seed = seed;
    // Cluster geometry tuned so the reference assignment matrix lands on the
    // stock diagonal (98.2, 95.7, 93.0)% at 40000 shots; see readout tests.
    t.gmm.sigma << 1.0, 0.15, 0.15, 0.7;
    t.gmm.means[0] = Eigen::Vector2d(-2.0, 1.0);
    t.gmm.means[1] = Eigen::Vector2d(2.914, 1.737);
    t.gmm.means[2] = Eigen::Vector2d(0.957, 4.482);
    return t;
}

DriveConfig lab_drives(const LabTruth& truth, double v_f0g1, double nu_f0g1_offset_mhz,
                       double v_ef, double nu_ef_offset_mhz) {
    if (v_f0g1 < 0 || v_ef < 0) throw InvalidParameter("lab_drives: amplitudes must be >= 0");
    DriveConfig d;
    d.g_tilde = Frequency::from_mhz(truth.slope_f0g1_mhz_per_v * v_f0g1);
    d.omega_ef = Frequency::from_mhz(truth.slope_ef_mhz_per_v * v_ef);
    d.delta_f0g1 = Frequency::from_mhz(nu_f0g1_offset_mhz -
                                       truth.stark_f0g1_mhz_per_v2 * v_f0g1 * v_f0g1);
    d.delta_ef = Frequency::from_mhz(nu_ef_offset_mhz -
                                     truth.stark_ef_mhz_per_v2 * v_f0g1 * v_f0g1);
    if (v_f0g1 == 0.0) d.delta_f0g1 = Frequency{};
    if (v_ef == 0.0) d.delta_ef = Frequency{};
    return d;
}

void PulseSchedule::validate() const {
    int readouts = 0;
    for (const auto& seg : segments) {
        switch (seg.kind) {
            case SegmentKind::drive:
            case SegmentKind::idle:
                if (seg.duration_s <= 0)
                    throw InvalidParameter("PulseSchedule: segment durations must be > 0");
                break;
            case SegmentKind::readout:
                ++readouts;
                break;
            default:
                break;
        }
    }
    if (readouts != 1)
        throw InvalidParameter("PulseSchedule: exactly one readout marker required");
    if (segments.empty() || segments.back().kind != SegmentKind::readout)
        throw InvalidParameter("PulseSchedule: readout marker must come last");
    if (t_gap_s < 0) throw InvalidParameter("PulseSchedule: t_gap must be >= 0");
}

PulseSegment pi_ge() { return {SegmentKind::pi_ge, 0.0, {}}; }
PulseSegment pi_ef() { return {SegmentKind::pi_ef, 0.0, {}}; }
PulseSegment drive_segment(double duration_s, const DriveConfig& drives) {
    return {SegmentKind::drive, duration_s, drives};
}
PulseSegment idle_segment(double duration_s) { return {SegmentKind::idle, duration_s, {}}; }
PulseSegment readout_marker() { return {SegmentKind::readout, 0.0, {}}; }

namespace {

Eigen::MatrixXcd apply_pi(const Eigen::MatrixXcd& rho, int lo, int hi, int nf, double error) {
    // Ideal instantaneous population swap, imperfect with probability `error`.
    QOperator swap_t = QOperator::Identity(3, 3);
    swap_t(lo, lo) = 0;
    swap_t(hi, hi) = 0;
    swap_t(lo, hi) = 1;
    swap_t(hi, lo) = 1;
    const QOperator swap_full = tensor(swap_t, QOperator::Identity(nf, nf));
    return (1.0 - error) * (swap_full * rho * swap_full.adjoint()) + error * rho;
}

}  // namespace

Eigen::Vector3d run_schedule(const LabTruth& truth, const PulseSchedule& schedule) {
    schedule.validate();
    const int nf = 3;
    Eigen::MatrixXcd rho = density_from_ket(product_ket(0, 0, 3, nf));  // heralded |g,0>

    DrivenModel idle_model{truth.params, DriveConfig{}, nf};
    const auto idle_channels = dissipators(idle_model);

    for (const auto& seg : schedule.segments) {
        switch (seg.kind) {
            case SegmentKind::pi_ge:
                rho = apply_pi(rho, 0, 1, nf, truth.pi_error);
                break;
            case SegmentKind::pi_ef:
                rho = apply_pi(rho, 1, 2, nf, truth.pi_error);
                break;
            case SegmentKind::drive: {
                DrivenModel m{truth.params, seg.drives, nf};
                rho = evolve_state(m, dissipators(m), rho, seg.duration_s);
                break;
            }
            case SegmentKind::idle:
                rho = evolve_state(idle_model, idle_channels, rho, seg.duration_s);
                break;
            case SegmentKind::readout: {
                if (schedule.t_gap_s > 0)
                    rho = evolve_state(idle_model, idle_channels, rho, schedule.t_gap_s);
                Eigen::Vector3d p = Eigen::Vector3d::Zero();
                for (int s = 0; s < 3; ++s)
                    for (int n = 0; n < nf; ++n) p(s) += rho(s * nf + n, s * nf + n).real();
                return p;
            }
        }
    }
    throw InvalidParameter("run_schedule: schedule had no readout marker");
}

namespace {

ShotSet sample_shots_impl(const Eigen::Vector3d& populations, const GmmTruth& gmm, int n_shots,
                          std::uint64_t seed, std::uint64_t experiment, std::uint64_t point,
                          bool parallel) {
    if (n_shots < 1) throw InvalidParameter("sample_shots: n_shots must be >= 1");
    const double total = populations.sum();
    if (total <= 0 || (populations.array() < -1e-12).any())
        throw InvalidParameter("sample_shots: populations must be a probability vector");
    const Eigen::Vector3d p = populations / total;
    const double c0 = p(0), c1 = p(0) + p(1);
    const Eigen::Matrix2d chol = gmm.sigma.llt().matrixL();

    ShotSet set;
    set.points.resize(2, n_shots);
    set.latent.resize(size_t(n_shots));
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < n_shots; ++i) {
        const CounterRng rng(seed, pack_stream(experiment, point, std::uint64_t(i)));
        const double u = rng.uniform(0);
        const int s = u < c0 ? 0 : (u < c1 ? 1 : 2);
        const auto [z1, z2] = rng.normal_pair(1);
        set.points.col(i) = gmm.means[size_t(s)] + chol * Eigen::Vector2d(z1, z2);
        set.latent[size_t(i)] = std::int8_t(s);
    }
    return set;
}

}  // namespace

ShotSet sample_shots(const Eigen::Vector3d& populations, const GmmTruth& gmm, int n_shots,
                     std::uint64_t seed, std::uint64_t experiment, std::uint64_t point) {
    return sample_shots_impl(populations, gmm, n_shots, seed, experiment, point, true);
}

ShotSet sample_shots_serial(const Eigen::Vector3d& populations, const GmmTruth& gmm,
                            int n_shots, std::uint64_t seed, std::uint64_t experiment,
                            std::uint64_t point) {
    return sample_shots_impl(populations, gmm, n_shots, seed, experiment, point, false);
}

Eigen::Vector3d sample_population_fraction(const Eigen::Vector3d& populations, int n_shots,
                                           std::uint64_t seed, std::uint64_t experiment,
                                           std::uint64_t point) {
    if (n_shots == 0) return populations;
    const double c0 = populations(0);
    const double c1 = populations(0) + populations(1);
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (int i = 0; i < n_shots; ++i) {
        const CounterRng rng(seed, pack_stream(experiment, point, std::uint64_t(i)));
        const double u = rng.uniform(0) * populations.sum();
        counts(u < c0 ? 0 : (u < c1 ? 1 : 2)) += 1.0;
    }
    return counts / double(n_shots);
}

std::array<ShotSet, 3> reference_shot_sets(const LabTruth& truth, int n_shots,
                                           std::uint64_t experiment) {
    std::array<ShotSet, 3> sets;
    for (int prep = 0; prep < 3; ++prep) {
        PulseSchedule sched;
        if (prep >= 1) sched.segments.push_back(pi_ge());
        if (prep == 2) sched.segments.push_back(pi_ef());
        sched.segments.push_back(readout_marker());
        sched.t_gap_s = truth.t_gap_s;
        const Eigen::Vector3d pops = run_schedule(truth, sched);
        sets[size_t(prep)] =
            sample_shots(pops, truth.gmm, n_shots, truth.seed, experiment + std::uint64_t(prep), 0);
        sets[size_t(prep)].prepared = prep;
    }
    return sets;
}

std::vector<double> generate_herald_traces(const LabTruth& truth, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidParameter("generate_herald_traces: n must be >= 1");
    std::vector<double> out(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const CounterRng rng(seed, pack_stream(kStreamHerald, 0, std::uint64_t(i)));
        const bool excited = rng.uniform(0) < truth.params.n_th;
        const double z = rng.normal(1);
        out[size_t(i)] = excited ? truth.gmm.herald_mu_excited + truth.gmm.herald_sigma_excited * z
                                 : truth.gmm.herald_mu_ground + truth.gmm.herald_sigma_ground * z;
    }
    return out;
}

namespace {

double angular_mhz(double mhz) { return Frequency::from_mhz(mhz).rad_per_s(); }

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[size_t(i)] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

}  // namespace

std::vector<CalibDataset> generate_step1(const LabTruth& truth, const CalibPlan& plan) {
    if (plan.stark_amps_v.empty()) throw InvalidParameter("plan: stark amplitudes empty");
    std::vector<CalibDataset> out(plan.stark_amps_v.size());
    for (size_t ai = 0; ai < plan.stark_amps_v.size(); ++ai) {
        const double v = plan.stark_amps_v[ai];
        const double g_pred_mhz = plan.prior_slope_f0g1_mhz_per_v * v;
        const double pop_rate = 2.0 * angular_mhz(g_pred_mhz);  // population oscillation
        const double t_pulse = std::numbers::pi / pop_rate;     // ~pi of transfer at resonance
        const double shift_pred = plan.prior_stark_f0g1_mhz_per_v2 * v * v;
        const double half_span = 1.8 * (pop_rate / two_pi / 1e6) + 0.4 * std::abs(shift_pred) + 1.0;
        const std::vector<double> nus =
            linspace(shift_pred - half_span, shift_pred + half_span, plan.n_freq);

        CalibDataset& ds = out[ai];
        ds.step = 1;
        ds.amplitude_v = v;
        ds.x = nus;
        ds.y.resize(nus.size());
        if (plan.shots_per_point > 0) ds.y_err.resize(nus.size());
#pragma omp parallel for schedule(dynamic)
        for (int ip = 0; ip < int(nus.size()); ++ip) {
            PulseSchedule sched;
            sched.segments = {qreset::pi_ge(), qreset::pi_ef(),
                              drive_segment(t_pulse + truth.t_edge_s,
                                            lab_drives(truth, v, nus[size_t(ip)], 0.0, 0.0)),
                              readout_marker()};
            sched.t_gap_s = truth.t_gap_s;
            const Eigen::Vector3d pops = run_schedule(truth, sched);
            const Eigen::Vector3d frac = sample_population_fraction(
                pops, plan.shots_per_point, truth.seed, kStreamStep1,
                std::uint64_t(ai) * 4096 + std::uint64_t(ip));
            ds.y[size_t(ip)] = frac(2);  // P_f: dip at the shifted resonance
            if (plan.shots_per_point > 0)
                ds.y_err[size_t(ip)] = std::sqrt(
                    std::max(frac(2) * (1 - frac(2)), 0.25 / plan.shots_per_point) /
                    plan.shots_per_point);
        }
    }
    return out;
}

std::vector<CalibDataset> generate_step2(const LabTruth& truth, const CalibPlan& plan) {
    if (plan.ef_amps_v.empty()) throw InvalidParameter("plan: ef amplitudes empty");
    std::vector<CalibDataset> out(plan.ef_amps_v.size());
    for (size_t ai = 0; ai < plan.ef_amps_v.size(); ++ai) {
        const double v = plan.ef_amps_v[ai];
        const double om_pred_mhz = plan.prior_slope_ef_mhz_per_v * v;
        const double period = two_pi / (2.0 * angular_mhz(om_pred_mhz));
        const std::vector<double> ts =
            linspace(0.0, plan.time_span_periods * period, plan.n_time);

        CalibDataset& ds = out[ai];
        ds.step = 2;
        ds.amplitude_v = v;
        ds.x = ts;
        ds.y.resize(ts.size());
        if (plan.shots_per_point > 0) ds.y_err.resize(ts.size());
#pragma omp parallel for schedule(dynamic)
        for (int ip = 0; ip < int(ts.size()); ++ip) {
            PulseSchedule sched;
            sched.segments = {qreset::pi_ge(),
                              drive_segment(ts[size_t(ip)] + truth.t_edge_s,
                                            lab_drives(truth, 0.0, 0.0, v, 0.0)),
                              readout_marker()};
            sched.t_gap_s = truth.t_gap_s;
            const Eigen::Vector3d pops = run_schedule(truth, sched);
            const Eigen::Vector3d frac = sample_population_fraction(
                pops, plan.shots_per_point, truth.seed, kStreamStep2,
                std::uint64_t(ai) * 4096 + std::uint64_t(ip));
            ds.y[size_t(ip)] = frac(2);  // P_f oscillates at the Rabi rate
            if (plan.shots_per_point > 0)
                ds.y_err[size_t(ip)] = std::sqrt(
                    std::max(frac(2) * (1 - frac(2)), 0.25 / plan.shots_per_point) /
                    plan.shots_per_point);
        }
    }
    return out;
}

std::vector<CalibDataset> generate_step3(const LabTruth& truth, const CalibPlan& plan,
                                         double ef_pi_amp_v, double stark_f0g1_est_mhz_per_v2) {
    if (plan.stark_amps_v.empty()) throw InvalidParameter("plan: stark amplitudes empty");
    constexpr double t_block = 140e-9;  // e-f pi pulse, one third of the 420 ns drive
    std::vector<CalibDataset> out(plan.stark_amps_v.size());
    for (size_t ai = 0; ai < plan.stark_amps_v.size(); ++ai) {
        const double v = plan.stark_amps_v[ai];
        const double nu_f0g1 = stark_f0g1_est_mhz_per_v2 * v * v;  // keep the f0-g1 drive resonant
        const double shift_pred = plan.prior_stark_ef_mhz_per_v2 * v * v;
        const double pulse_bw_mhz = 1.0 / (2.0 * t_block) / 1e6;
        const double half_span = 1.6 * pulse_bw_mhz + 0.4 * std::abs(shift_pred) + 1.0;
        const std::vector<double> nus =
            linspace(shift_pred - half_span, shift_pred + half_span, plan.n_freq);

        CalibDataset& ds = out[ai];
        ds.step = 3;
        ds.amplitude_v = v;
        ds.x = nus;
        ds.y.resize(nus.size());
        if (plan.shots_per_point > 0) ds.y_err.resize(nus.size());
#pragma omp parallel for schedule(dynamic)
        for (int ip = 0; ip < int(nus.size()); ++ip) {
            PulseSchedule sched;
            sched.segments = {qreset::pi_ge(),
                              drive_segment(t_block, lab_drives(truth, v, nu_f0g1, 0.0, 0.0)),
                              drive_segment(t_block, lab_drives(truth, v, nu_f0g1, ef_pi_amp_v,
                                                                nus[size_t(ip)])),
                              drive_segment(t_block, lab_drives(truth, v, nu_f0g1, 0.0, 0.0)),
                              readout_marker()};
            sched.t_gap_s = truth.t_gap_s;
            const Eigen::Vector3d pops = run_schedule(truth, sched);
            const Eigen::Vector3d frac = sample_population_fraction(
                pops, plan.shots_per_point, truth.seed, kStreamStep3,
                std::uint64_t(ai) * 4096 + std::uint64_t(ip));
            ds.y[size_t(ip)] = frac(1);  // P_e: dip when the pi pulse hits the shifted line
            if (plan.shots_per_point > 0)
                ds.y_err[size_t(ip)] = std::sqrt(
                    std::max(frac(1) * (1 - frac(1)), 0.25 / plan.shots_per_point) /
                    plan.shots_per_point);
        }
    }
    return out;
}

std::vector<CalibDataset> generate_step3(const LabTruth& truth, const CalibPlan& plan,
                                         double ef_pi_amp_v) {
    return generate_step3(truth, plan, ef_pi_amp_v, truth.stark_f0g1_mhz_per_v2);
}

std::vector<CalibDataset> generate_step4(const LabTruth& truth, const CalibPlan& plan,
                                         double stark_f0g1_est_mhz_per_v2) {
    if (plan.f0g1_amps_v.empty()) throw InvalidParameter("plan: f0g1 amplitudes empty");
    std::vector<CalibDataset> out(plan.f0g1_amps_v.size());
    for (size_t ai = 0; ai < plan.f0g1_amps_v.size(); ++ai) {
        const double v = plan.f0g1_amps_v[ai];
        const double nu = stark_f0g1_est_mhz_per_v2 * v * v;
        const double g_pred_mhz = plan.prior_slope_f0g1_mhz_per_v * v;
        const double period = two_pi / (2.0 * angular_mhz(g_pred_mhz));
        const std::vector<double> ts =
            linspace(0.0, plan.time_span_periods * period, plan.n_time);

        CalibDataset& ds = out[ai];
        ds.step = 4;
        ds.amplitude_v = v;
        ds.x = ts;
        ds.y.resize(ts.size());
        if (plan.shots_per_point > 0) ds.y_err.resize(ts.size());
#pragma omp parallel for schedule(dynamic)
        for (int ip = 0; ip < int(ts.size()); ++ip) {
            PulseSchedule sched;
            sched.segments = {qreset::pi_ge(), qreset::pi_ef(),
                              drive_segment(ts[size_t(ip)] + truth.t_edge_s,
                                            lab_drives(truth, v, nu, 0.0, 0.0)),
                              readout_marker()};
            sched.t_gap_s = truth.t_gap_s;
            const Eigen::Vector3d pops = run_schedule(truth, sched);
            const Eigen::Vector3d frac = sample_population_fraction(
                pops, plan.shots_per_point, truth.seed, kStreamStep4,
                std::uint64_t(ai) * 4096 + std::uint64_t(ip));
            ds.y[size_t(ip)] = frac(2);  // damped f0-g1 Rabi oscillation of P_f
            if (plan.shots_per_point > 0)
                ds.y_err[size_t(ip)] = std::sqrt(
                    std::max(frac(2) * (1 - frac(2)), 0.25 / plan.shots_per_point) /
                    plan.shots_per_point);
        }
    }
    return out;
}

CalibData generate_calibration_data(const LabTruth& truth, const CalibPlan& plan) {
    CalibData data;
    data.step1 = generate_step1(truth, plan);
    data.step2 = generate_step2(truth, plan);
    // Settings a real run would take from earlier fits come from the plan
    // priors here: a pi-area e-f pulse and a Stark-compensated f0-g1 drive.
    const double pop_rate_needed = std::numbers::pi / 140e-9;
    const double ef_amp = (pop_rate_needed / 2.0) / two_pi / 1e6 / plan.prior_slope_ef_mhz_per_v;
    data.step3 = generate_step3(truth, plan, ef_amp, plan.prior_stark_f0g1_mhz_per_v2);
    data.step4 = generate_step4(truth, plan, plan.prior_stark_f0g1_mhz_per_v2);
    return data;
}

}  // namespace qreset
