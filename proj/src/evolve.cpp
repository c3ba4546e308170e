#include "rydline/evolve.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <string>

#include "rydline/errors.hpp"
#include "rydline/krylov.hpp"

namespace rydline {

namespace {

constexpr double kJoinTolerance = 1e-12;

double lerp(double a, double b, double x) { return a + (b - a) * x; }

// exp(i phi n) on a state in system coordinates.
void rotate_phase(const ChainSystem& system, double phi, StateVector& psi) {
    if (phi == 0.0) return;
    const Eigen::VectorXd& counts = system.excitation_counts();
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, phi * counts[i]);
}

double diagonal_expectation(const Eigen::VectorXd& diag, const StateVector& psi) {
    return (diag.array() * psi.array().abs2()).sum() / psi.squaredNorm();
}

}  // namespace

RampSchedule::RampSchedule(std::vector<RampSegment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw DomainError("ramp schedule needs at least one segment");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const RampSegment& s = segments_[i];
        if (!(s.duration > 0.0) || !std::isfinite(s.duration))
            throw DomainError("ramp segment " + std::to_string(i) + " has a non-positive duration");
        if (i > 0) {
            const RampSegment& prev = segments_[i - 1];
            if (std::abs(prev.omega_end - s.omega_start) > kJoinTolerance ||
                std::abs(prev.delta_end - s.delta_start) > kJoinTolerance)
                throw DomainError("ramp segments " + std::to_string(i - 1) + " and " +
                                  std::to_string(i) + " do not join continuously");
        }
        total_ += s.duration;
    }
}

std::pair<std::size_t, double> RampSchedule::locate(double t) const {
    double start = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const double end = start + segments_[i].duration;
        if (t < end || i + 1 == segments_.size()) {
            const double x = std::clamp((t - start) / segments_[i].duration, 0.0, 1.0);
            return {i, x};
        }
        start = end;
    }
    return {segments_.size() - 1, 1.0};
}

double RampSchedule::omega(double t) const {
    const auto [i, x] = locate(t);
    return lerp(segments_[i].omega_start, segments_[i].omega_end, x);
}

double RampSchedule::delta(double t) const {
    const auto [i, x] = locate(t);
    return lerp(segments_[i].delta_start, segments_[i].delta_end, x);
}

double RampSchedule::omega_rate(double t) const {
    const RampSegment& s = segments_[locate(t).first];
    return (s.omega_end - s.omega_start) / s.duration;
}

double RampSchedule::delta_rate(double t) const {
    const RampSegment& s = segments_[locate(t).first];
    return (s.delta_end - s.delta_start) / s.duration;
}

RampSchedule three_step_schedule(double t1, double t2, double t3, double v_dd) {
    using P = PreparationPoints;
    return RampSchedule({
        {t1, P::omega_low * v_dd, P::omega_high * v_dd, P::delta_start * v_dd, P::delta_start * v_dd},
        {t2, P::omega_high * v_dd, P::omega_high * v_dd, P::delta_start * v_dd, P::delta_target * v_dd},
        {t3, P::omega_high * v_dd, P::omega_low * v_dd, P::delta_target * v_dd, P::delta_target * v_dd},
    });
}

RampSchedule final_step_schedule(double t3, double v_dd) {
    using P = PreparationPoints;
    return RampSchedule({{t3, P::omega_high * v_dd, P::omega_low * v_dd, P::delta_target * v_dd,
                          P::delta_target * v_dd}});
}

RampSchedule constant_schedule(double omega, double delta, double duration) {
    return RampSchedule({{duration, omega, omega, delta, delta}});
}

const char* to_string(Frame frame) {
    return frame == Frame::LabPhase ? "lab-phase" : "rotating-detuning";
}

Frame frame_from_string(std::string_view name) {
    if (name == "lab-phase" || name == "lab") return Frame::LabPhase;
    if (name == "rotating-detuning" || name == "rotating") return Frame::RotatingDetuning;
    throw ConfigError("unknown frame '" + std::string(name) + "'");
}

double default_time_step(double v_dd, const PhaseSignal* noise) {
    double dt = 1e-2 / v_dd;
    if (noise) dt = std::min(dt, noise->dt);
    return dt;
}

Trajectory evolve(const ChainSystem& system, const StateVector& psi0, const RampSchedule& schedule,
                  const PhaseSignal* noise, const EvolutionConfig& cfg) {
    if (psi0.size() != system.dim())
        throw DomainError("evolve: initial state has dimension " + std::to_string(psi0.size()) +
                          ", expected " + std::to_string(system.dim()));
    if (std::abs(psi0.norm() - 1.0) > kNormDriftLimit)
        throw DomainError("evolve: initial state is not normalized");
    if (!(cfg.dt > 0.0)) throw DomainError("evolve: time step must be positive");

    const double total = schedule.total_duration();
    if (noise) {
        if (noise->samples.size() < 2) throw CoverageError("evolve: noise signal has fewer than two samples");
        const double covered = noise->dt * static_cast<double>(noise->samples.size() - 1);
        if (covered < total * (1.0 - 1e-12))
            throw CoverageError("evolve: noise covers " + std::to_string(covered) +
                                " us but the schedule lasts " + std::to_string(total) + " us");
        if (cfg.dt > noise->dt * (1.0 + 1e-12))
            throw DomainError("evolve: time step exceeds the noise sample interval");
    }

    const auto n_steps = static_cast<std::size_t>(std::ceil(total / cfg.dt - 1e-9));
    const double h = total / static_cast<double>(n_steps);
    const bool lab = cfg.frame == Frame::LabPhase && noise;
    auto phase_at = [&](double t) { return noise ? interpolate_phase(*noise, std::min(t, total)) : 0.0; };

    Trajectory traj;
    traj.seed = noise ? noise->seed : 0;
    traj.steps = n_steps;
    traj.step = h;

    auto record = [&](double t, const StateVector& chi) {
        TrajectoryRecord r;
        r.t = t;
        r.norm = chi.norm();
        const Drive drive{schedule.omega(t), schedule.delta(t), 0.0};
        r.energy = system.energy(drive, chi);
        r.h_int = diagonal_expectation(system.interaction(), chi);
        r.o_z2 = diagonal_expectation(system.z2(), chi);
        if (cfg.record_fidelity)
            r.fidelity = instantaneous_ground_fidelity(system, chi, drive.omega, drive.delta);
        traj.records.push_back(r);
        if (cfg.observer) cfg.observer(t, chi);
    };

    // psi is the lab-frame state for the lab frame and the reference-frame
    // state otherwise.
    StateVector psi = psi0;
    if (lab) rotate_phase(system, phase_at(0.0), psi);
    record(0.0, psi0);

    KrylovExponential expm(system.dim(), 60, cfg.krylov_tolerance);
    Drive drive;
    auto apply = [&](const cplx* x, cplx* y) { system.apply_hamiltonian(drive, x, y); };

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t0 = static_cast<double>(k) * h;
        const double t1 = k + 1 == n_steps ? total : static_cast<double>(k + 1) * h;
        const double mid = 0.5 * (t0 + t1);
        drive.omega = schedule.omega(mid);
        drive.delta = schedule.delta(mid);
        drive.phase = 0.0;
        if (noise) {
            if (lab) {
                drive.phase = phase_at(mid);
            } else {
                const double slope = (phase_at(t1) - phase_at(t0)) / (t1 - t0);
                drive.delta -= slope;
            }
        }
        expm.apply(apply, t1 - t0, psi);

        const double drift = std::abs(psi.norm() - 1.0);
        traj.max_norm_drift = std::max(traj.max_norm_drift, drift);
        if (drift > kNormDriftLimit)
            throw IntegrationError("evolve: norm drift " + std::to_string(drift) + " at t = " +
                                   std::to_string(t1) + " us");

        const bool last = k + 1 == n_steps;
        if (last || (cfg.record_stride > 0 && (k + 1) % static_cast<std::size_t>(cfg.record_stride) == 0)) {
            StateVector chi = psi;
            if (lab) rotate_phase(system, -phase_at(t1), chi);
            record(t1, chi);
            if (last) traj.final_state = std::move(chi);
        }
    }
    return traj;
}

double ground_fidelity(const Eigensystem& eig, const StateVector& psi) {
    if (!eig.has_vectors()) throw DomainError("ground_fidelity: eigensystem has no vectors");
    const double tol = eig.degeneracy_tolerance();
    double f = 0.0;
    for (Eigen::Index i = 0; i < eig.size() && eig.energies[i] - eig.energies[0] <= tol; ++i)
        f += std::norm(eig.vectors.col(i).dot(psi));
    return f / psi.squaredNorm();
}

double instantaneous_ground_fidelity(const ChainSystem& system, const StateVector& psi,
                                     double omega, double delta) {
    if (psi.size() != system.dim()) throw DomainError("fidelity: state dimension mismatch");
    if (omega == 0.0) {
        // Classical Hamiltonian: the ground space is spanned by the minimal
        // diagonal entries, in any sector basis.
        const Eigen::VectorXd e = system.interaction() - delta * system.excitation_counts();
        const double e0 = e.minCoeff();
        const double tol = 1e-9 * std::max(1.0, e.cwiseAbs().maxCoeff());
        double f = 0.0;
        for (Eigen::Index i = 0; i < e.size(); ++i)
            if (e[i] - e0 <= tol) f += std::norm(psi[i]);
        return f / psi.squaredNorm();
    }
    const int n = system.params().n_sites;
    if (n % 2 == 1 && n >= 3 && system.sector() != Sector::Antisymmetric) {
        const GroundState gs = ground_state(system.params(), omega, delta);
        const StateVector g = system.sector() == Sector::Full ? gs.state : system.restrict_state(gs.state);
        return std::norm(g.dot(psi)) / psi.squaredNorm();
    }
    return ground_fidelity(diagonalize(system, omega, delta), psi);
}

std::vector<AdiabaticRatio> adiabaticity_diagnostic(const ChainSystem& system, double omega,
                                                    double delta, double omega_rate,
                                                    double delta_rate, int n_levels) {
    if (n_levels < 2) throw DomainError("adiabaticity_diagnostic: need at least two levels");
    const Eigensystem eig = diagonalize(system, omega, delta);
    const int levels = static_cast<int>(std::min<Eigen::Index>(n_levels, eig.size()));
    const double tol = eig.degeneracy_tolerance();

    Eigen::MatrixXcd hdot_v(system.dim(), levels);
    StateVector tmp(system.dim());
    for (int j = 0; j < levels; ++j) {
        system.apply_drive_operator(0.0, eig.vectors.col(j).data(), tmp.data());
        hdot_v.col(j) = omega_rate * tmp -
                        delta_rate * (system.excitation_counts().cast<cplx>().array() *
                                      eig.vectors.col(j).array()).matrix();
    }

    std::vector<AdiabaticRatio> out;
    for (int m = 0; m < levels; ++m) {
        for (int n = m + 1; n < levels; ++n) {
            AdiabaticRatio r;
            r.m = m;
            r.n = n;
            r.gap = eig.energies[n] - eig.energies[m];
            r.coupling = std::abs(eig.vectors.col(m).dot(hdot_v.col(n)));
            r.degenerate = r.gap <= tol;
            r.ratio = r.degenerate ? std::numeric_limits<double>::quiet_NaN() : r.coupling / r.gap;
            out.push_back(r);
        }
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "t,fidelity,energy,H_int,O_Z2,norm\n" << std::setprecision(12);
    for (const TrajectoryRecord& r : trajectory.records)
        out << r.t << ',' << r.fidelity << ',' << r.energy << ',' << r.h_int << ',' << r.o_z2 << ','
            << r.norm << '\n';
}

}  // namespace rydline
