#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string_view>
#include <vector>

#include "rydline/analysis.hpp"
#include "rydline/chain_system.hpp"
#include "rydline/noisegen.hpp"

namespace rydline {

// One linear ramp piece; times in us, Omega and delta in rad/us.
struct RampSegment {
    double duration = 0.0;
    double omega_start = 0.0;
    double omega_end = 0.0;
    double delta_start = 0.0;
    double delta_end = 0.0;
};

class RampSchedule {
public:
    // Throws DomainError for non-positive durations or parameter jumps at
    // segment joins.
    explicit RampSchedule(std::vector<RampSegment> segments);

    const std::vector<RampSegment>& segments() const { return segments_; }
    double total_duration() const { return total_; }
    double omega(double t) const;
    double delta(double t) const;
    double omega_rate(double t) const;
    double delta_rate(double t) const;

private:
    std::pair<std::size_t, double> locate(double t) const;

    std::vector<RampSegment> segments_;
    double total_ = 0.0;
};

// Endpoints of the three-step preparation, in units of V_dd.
struct PreparationPoints {
    static constexpr double omega_low = 0.1;
    static constexpr double omega_high = 1.0;
    static constexpr double delta_start = -3.0;
    static constexpr double delta_target = 1.1;
};

// Step 1 raises Omega 0.1 -> 1.0 V_dd at delta = -3 V_dd, step 2 sweeps delta
// -3 -> 1.1 V_dd at Omega = 1.0 V_dd, step 3 lowers Omega 1.0 -> 0.1 V_dd at
// delta = 1.1 V_dd. Durations in us.
RampSchedule three_step_schedule(double t1, double t2, double t3, double v_dd = 1.0);
// Step 3 alone; the state at its start is the ground state at
// (Omega, delta) = (1.0, 1.1) V_dd.
RampSchedule final_step_schedule(double t3, double v_dd = 1.0);
RampSchedule constant_schedule(double omega, double delta, double duration);

enum class Frame {
    // phi(t) enters as the drive phase.
    LabPhase,
    // phi is removed by the frame rotation exp(i phi n) and reappears as the
    // effective detuning delta - dphi/dt.
    RotatingDetuning,
};

const char* to_string(Frame frame);
Frame frame_from_string(std::string_view name);

struct EvolutionConfig {
    double dt = 1e-2;      // us; the step actually used is duration / ceil(duration / dt)
    Frame frame = Frame::LabPhase;
    int record_stride = 0; // steps between snapshots; 0 records only the endpoints
    bool record_fidelity = false;
    double krylov_tolerance = 1e-13;
    // Called with (t, state in the phi = 0 frame) at every recorded instant.
    std::function<void(double, const StateVector&)> observer;
};

// Default step: min(1e-2 / V_dd, noise dt).
double default_time_step(double v_dd, const PhaseSignal* noise);

struct TrajectoryRecord {
    double t = 0.0;
    double fidelity = -1.0;  // -1 when not recorded
    double energy = 0.0;     // <H(t)>
    double h_int = 0.0;
    double o_z2 = 0.0;
    double norm = 1.0;
};

// States are expressed in the phi = 0 reference frame: the lab-frame state is
// W(phi(t)) chi with W(phi) = exp(i phi n), and `final_state` is chi. Both
// frames therefore return directly comparable states and all diagonal
// observables, energies and fidelities are frame independent.
struct Trajectory {
    std::vector<TrajectoryRecord> records;
    StateVector final_state;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    double step = 0.0;
    double max_norm_drift = 0.0;
};

inline constexpr double kNormDriftLimit = 1e-8;

// Midpoint exponential integrator: each step applies exp(-i H(t_mid) h) with
// Omega and delta interpolated from the schedule. The noise is read as a
// piecewise-linear phase. Throws CoverageError when the noise is shorter than
// the schedule, DomainError when cfg.dt exceeds the noise sample interval and
// IntegrationError when the norm drifts by more than kNormDriftLimit.
Trajectory evolve(const ChainSystem& system, const StateVector& psi0, const RampSchedule& schedule,
                  const PhaseSignal* noise, const EvolutionConfig& cfg);

// |<psi|psi_gr>|^2 against the ground space of H(omega, delta, 0) in the
// system's coordinates; degenerate ground levels are projected jointly.
double instantaneous_ground_fidelity(const ChainSystem& system, const StateVector& psi,
                                     double omega, double delta);
double ground_fidelity(const Eigensystem& eig, const StateVector& psi);

struct AdiabaticRatio {
    int m = 0;
    int n = 0;
    double gap = 0.0;
    double coupling = 0.0;  // |<E_m| dH/dt |E_n>|
    double ratio = 0.0;     // coupling / gap; NaN when degenerate
    bool degenerate = false;
};

// dH/dt = (dOmega/dt)(dH/dOmega) + (ddelta/dt)(dH/ddelta) among the lowest
// `n_levels` eigenstates of H(omega, delta, 0).
std::vector<AdiabaticRatio> adiabaticity_diagnostic(const ChainSystem& system, double omega,
                                                    double delta, double omega_rate,
                                                    double delta_rate, int n_levels);

// Columns t, fidelity, energy, H_int, O_Z2, norm.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace rydline
