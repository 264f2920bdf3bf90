#include "qreset/lindblad.hpp"

#include <cmath>
#include <complex>

#include "qreset/errors.hpp"
#include "qreset/ode.hpp"

namespace qreset {

using cplx = std::complex<double>;

void DrivenModel::validate() const {
    params.validate();
    drives.validate();
    if (n_fock < 2) throw InvalidDimension("DrivenModel: n_fock must be >= 2");
}

namespace {

struct ModelOps {
    QOperator h_static;   // anharmonicity + dispersive shift + f0-g1 coupling (zero detuning)
    QOperator coupling;   // (g/sqrt2) b^dag b^dag a   (f0-g1 detuning phase applied per t)
    QOperator drive;      // (Omega/sqrt2) b           (e-f phase applied per t)
    double alpha;         // rad/s
    double delta_f0g1;
    double delta_ef;
    bool static_coupling; // true when delta_f0g1 == 0: coupling folded into h_static
};

ModelOps build_ops(const DrivenModel& m) {
    const int nf = m.n_fock;
    const QOperator b = tensor(transmon_lowering(3), QOperator::Identity(nf, nf));
    const QOperator a = tensor(QOperator::Identity(3, 3), resonator_lowering(nf));
    const QOperator bd = dagger(b), ad = dagger(a);
    const QOperator nb = bd * b, na = ad * a;

    ModelOps ops;
    ops.alpha = m.params.alpha.rad_per_s();
    ops.delta_f0g1 = m.drives.delta_f0g1.rad_per_s();
    ops.delta_ef = m.drives.delta_ef.rad_per_s();
    const double g = m.drives.g_tilde.rad_per_s();
    const double om = m.drives.omega_ef.rad_per_s();
    const double chi = m.params.chi_r.rad_per_s();

    ops.h_static = -0.5 * ops.alpha * nb + 0.5 * ops.alpha * (bd * bd * b * b) +
                   2.0 * chi * (na * nb).eval();
    ops.coupling = (g / std::sqrt(2.0)) * (bd * bd * a);
    ops.drive = (om / std::sqrt(2.0)) * b;
    ops.static_coupling = (ops.delta_f0g1 == 0.0);
    if (ops.static_coupling) ops.h_static += ops.coupling + dagger(ops.coupling);
    return ops;
}

QOperator hamiltonian_from_ops(const ModelOps& ops, double t) {
    QOperator h = ops.h_static;
    if (!ops.static_coupling) {
        const cplx ph = std::exp(cplx(0.0, ops.delta_f0g1 * t));
        h += ph * ops.coupling + std::conj(ph) * dagger(ops.coupling);
    }
    const cplx dph = std::exp(cplx(0.0, (0.5 * ops.alpha + ops.delta_ef) * t));
    h += dph * ops.drive + std::conj(dph) * dagger(ops.drive);
    return h;
}

}  // namespace

QOperator hamiltonian_at(const DrivenModel& m, double t_s) {
    if (t_s < 0) throw InvalidParameter("hamiltonian_at: t must be >= 0");
    m.validate();
    return hamiltonian_from_ops(build_ops(m), t_s);
}

std::vector<JumpChannel> dissipators(const DrivenModel& m) {
    m.validate();
    const int nf = m.n_fock;
    const QOperator eye_r = QOperator::Identity(nf, nf);
    const QOperator a = tensor(QOperator::Identity(3, 3), resonator_lowering(nf));
    auto on_transmon = [&](const QOperator& op) { return tensor(op, eye_r); };

    const SystemParams& p = m.params;
    std::vector<JumpChannel> ch;
    ch.push_back({p.kappa.rad_per_s(), a, "kappa a"});
    ch.push_back({p.kappa_int.rad_per_s(), a, "kappa_int a"});
    ch.push_back({p.gamma1_ge() * (1.0 + p.n_th), on_transmon(ketbra(0, 1, 3)), "ge decay"});
    ch.push_back({p.gamma1_ge() * p.n_th, on_transmon(ketbra(1, 0, 3)), "ge excitation"});
    ch.push_back({p.gamma1_ef() * (1.0 + p.n_th), on_transmon(ketbra(1, 2, 3)), "ef decay"});
    ch.push_back({p.gamma1_ef() * p.n_th, on_transmon(ketbra(2, 1, 3)), "ef excitation"});
    ch.push_back({p.gamma_phi_ge(), on_transmon(ketbra(1, 1, 3) - ketbra(0, 0, 3)),
                  "ge dephasing"});
    ch.push_back({p.gamma_phi_ef(), on_transmon(ketbra(2, 2, 3) - ketbra(1, 1, 3)),
                  "ef dephasing"});
    return ch;
}

namespace {

// Everything time-independent is folded into one superoperator on
// column-major vec(rho); only the drive phases remain per step, as
// e^{i w t} K terms. This keeps the right-hand side to a handful of
// dense matrix-vector products.
struct LiouvilleOps {
    Eigen::MatrixXcd l_static;
    std::vector<std::pair<double, Eigen::MatrixXcd>> modulated;  // (w, K): e^{iwt} K
    int dim = 0;
};

Eigen::MatrixXcd superop_left(const QOperator& a) {
    return tensor(QOperator::Identity(a.rows(), a.cols()), a);
}

Eigen::MatrixXcd superop_right(const QOperator& b) {
    return tensor(b.transpose(), QOperator::Identity(b.rows(), b.cols()));
}

Eigen::MatrixXcd commutator_superop(const QOperator& h) {
    return cplx(0, -1) * (superop_left(h) - superop_right(h));
}

Eigen::MatrixXcd dissipator_superop(const QOperator& l, double rate) {
    const QOperator ldl = dagger(l) * l;
    return rate * (tensor(l.conjugate(), l) - 0.5 * superop_left(ldl) - 0.5 * superop_right(ldl));
}

LiouvilleOps build_liouville(const DrivenModel& m, const std::vector<JumpChannel>& channels) {
    const ModelOps ops = build_ops(m);
    LiouvilleOps lio;
    lio.dim = m.dim();
    lio.l_static = commutator_superop(ops.h_static);
    for (const auto& c : channels) {
        if (c.rate < 0) throw InvalidParameter("dissipator rate must be >= 0");
        if (c.rate == 0) continue;
        lio.l_static += dissipator_superop(c.op, c.rate);
    }
    const double w_drive = 0.5 * ops.alpha + ops.delta_ef;
    lio.modulated.emplace_back(w_drive, commutator_superop(ops.drive));
    lio.modulated.emplace_back(-w_drive, commutator_superop(dagger(ops.drive)));
    if (!ops.static_coupling) {
        lio.modulated.emplace_back(ops.delta_f0g1, commutator_superop(ops.coupling));
        lio.modulated.emplace_back(-ops.delta_f0g1, commutator_superop(dagger(ops.coupling)));
    }
    return lio;
}

Eigen::VectorXcd liouville_rhs(const LiouvilleOps& lio, double t, const Eigen::VectorXcd& y) {
    Eigen::VectorXcd dy = lio.l_static * y;
    for (const auto& [w, k] : lio.modulated) dy.noalias() += std::exp(cplx(0, w * t)) * (k * y);
    return dy;
}

Eigen::VectorXcd integrate_liouville(const LiouvilleOps& lio, Eigen::VectorXcd y, double t0,
                                     double t1, double tol) {
    auto rhs = [&lio](double t, const Eigen::VectorXcd& v) { return liouville_rhs(lio, t, v); };
    OdeOptions opt;
    opt.tol = tol;
    integrate_adaptive(rhs, y, t0, t1, opt);
    return y;
}

Eigen::Vector3d transmon_populations(const Eigen::VectorXcd& rho_vec, int nf) {
    const int d = 3 * nf;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int s = 0; s < 3; ++s)
        for (int n = 0; n < nf; ++n) p(s) += rho_vec((s * nf + n) * (d + 1)).real();
    return p;
}

double photon_number(const Eigen::VectorXcd& rho_vec, int nf) {
    const int d = 3 * nf;
    double v = 0.0;
    for (int s = 0; s < 3; ++s)
        for (int n = 0; n < nf; ++n) v += n * rho_vec((s * nf + n) * (d + 1)).real();
    return v;
}

}  // namespace

PopulationTrajectory evolve_with_channels(const DrivenModel& m,
                                          const std::vector<JumpChannel>& channels,
                                          const Eigen::MatrixXcd& rho0,
                                          std::span<const double> times_s, double tol) {
    m.validate();
    if (rho0.rows() != m.dim() || rho0.cols() != m.dim())
        throw InvalidDimension("evolve: rho0 dimension does not match the model");
    for (size_t i = 0; i < times_s.size(); ++i) {
        if (times_s[i] < 0) throw InvalidParameter("evolve: times must be >= 0");
        if (i > 0 && times_s[i] < times_s[i - 1])
            throw InvalidParameter("evolve: times must be sorted");
    }

    const ModelOps ops = build_ops(m);
    const std::vector<Dissipator> diss = precompute(channels);
    auto rhs = [&](double t, const Eigen::MatrixXcd& rho) -> Eigen::MatrixXcd {
        const QOperator h = hamiltonian_from_ops(ops, t);
        Eigen::MatrixXcd d = cplx(0, -1) * (h * rho - rho * h);
        for (const auto& c : diss)
            d += c.rate * (c.op * rho * c.opd - 0.5 * (c.opd_op * rho + rho * c.opd_op));
        return d;
    };

    PopulationTrajectory traj;
    traj.times_s.assign(times_s.begin(), times_s.end());
    const size_t n = times_s.size();
    traj.p_g.resize(n);
    traj.p_e.resize(n);
    traj.p_f.resize(n);
    traj.photon.resize(n);

    Eigen::MatrixXcd rho = rho0;
    double t = 0.0;
    OdeOptions opt;
    opt.tol = tol;
    for (size_t i = 0; i < n; ++i) {
        if (times_s[i] > t) {
            integrate_adaptive(rhs, rho, t, times_s[i], opt);
            t = times_s[i];
        }
        const Eigen::Vector3d p = transmon_populations(rho, m.n_fock);
        traj.p_g[i] = p(0);
        traj.p_e[i] = p(1);
        traj.p_f[i] = p(2);
        traj.photon[i] = photon_number(rho, m.n_fock);
    }
    return traj;
}

PopulationTrajectory evolve(const DrivenModel& m, const Eigen::MatrixXcd& rho0,
                            std::span<const double> times_s, double tol) {
    return evolve_with_channels(m, dissipators(m), rho0, times_s, tol);
}

Eigen::MatrixXcd evolve_state(const DrivenModel& m, const std::vector<JumpChannel>& channels,
                              Eigen::MatrixXcd rho0, double duration_s, double tol) {
    if (duration_s <= 0) return rho0;
    const ModelOps ops = build_ops(m);
    const std::vector<Dissipator> diss = precompute(channels);
    auto rhs = [&](double t, const Eigen::MatrixXcd& rho) -> Eigen::MatrixXcd {
        const QOperator h = hamiltonian_from_ops(ops, t);
        Eigen::MatrixXcd d = cplx(0, -1) * (h * rho - rho * h);
        for (const auto& c : diss)
            d += c.rate * (c.op * rho * c.opd - 0.5 * (c.opd_op * rho + rho * c.opd_op));
        return d;
    };
    OdeOptions opt;
    opt.tol = tol;
    integrate_adaptive(rhs, rho0, 0.0, duration_s, opt);
    return rho0;
}

SteadyStateResult steady_state_excitation(const DrivenModel& m, double horizon_s, double tol) {
    const Frequency gamma = reset_rate(m.drives, m.params.kappa);
    if (gamma.rad_per_s() > 0 && horizon_s < 10.0 / gamma.rad_per_s())
        throw InvalidParameter("steady_state_excitation: horizon shorter than 10 / Gamma");

    const int n_out = 201;
    std::vector<double> times(n_out);
    for (int i = 0; i < n_out; ++i) times[i] = horizon_s * double(i) / (n_out - 1);

    Eigen::MatrixXcd rho0 =
        density_from_ket(product_ket(1, 0, 3, m.n_fock));  // |e,0>
    const PopulationTrajectory traj = evolve(m, rho0, times, tol);

    auto window_mean = [&](int lo, int hi) {  // inclusive index range
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) sum += traj.p_e[i] + traj.p_f[i];
        return sum / double(hi - lo + 1);
    };

    SteadyStateResult res;
    res.p_exc = window_mean(n_out - 21, n_out - 1);  // final 10%
    res.drift = std::abs(window_mean(n_out - 11, n_out - 1) - window_mean(n_out - 21, n_out - 11));
    res.converged = res.drift < 1e-5;
    return res;
}

double compare_to_effective(const SystemParams& params, const DriveConfig& drives,
                            std::span<const double> times_s, int n_fock, double tol) {
    DrivenModel m{params, drives, n_fock};
    m.validate();
    const QOperator a = tensor(QOperator::Identity(3, 3), resonator_lowering(n_fock));
    const std::vector<JumpChannel> kappa_only = {{params.kappa.rad_per_s(), a, "kappa a"}};

    const Eigen::MatrixXcd rho0 = density_from_ket(product_ket(1, 0, 3, n_fock));
    const PopulationTrajectory me = evolve_with_channels(m, kappa_only, rho0, times_s, tol);
    const PopulationTrajectory eff =
        propagate_h3(build_h3(drives, params.kappa), ThreeLevelState::e0, times_s);

    double worst = 0.0;
    for (size_t i = 0; i < times_s.size(); ++i) {
        worst = std::max(worst, std::abs(me.p_e[i] - eff.p_e[i]));
        worst = std::max(worst, std::abs(me.p_f[i] - eff.p_f[i]));
    }
    return worst;
}

Eigen::Vector3d thermal_equilibrium_populations(const SystemParams& params) {
    // Detailed balance on the g-e and e-f pairs of the thermal channels:
    // up/down ratio is n_th / (1 + n_th) for both transitions.
    const double r = params.n_th / (1.0 + params.n_th);
    Eigen::Vector3d p(1.0, r, r * r);
    return p / p.sum();
}

}  // namespace qreset
