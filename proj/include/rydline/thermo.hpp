#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "rydline/analysis.hpp"
#include "rydline/model.hpp"

namespace rydline {

enum class EnsembleKind { Diagonal, Canonical };

struct EnsembleWeights {
    Eigen::VectorXd weights;
    EnsembleKind kind = EnsembleKind::Diagonal;
    double beta = 0.0;          // canonical only
    std::string eigensystem;    // provenance key of the eigensystem
};

// Runs [first, last) of (numerically) degenerate eigenvalues.
std::vector<std::pair<Eigen::Index, Eigen::Index>> degenerate_blocks(const Eigensystem& eig);

// |<E_i|psi>|^2. Throws DomainError when `eig` has no vectors, the dimensions
// differ or psi is not normalized.
EnsembleWeights diagonal_ensemble(const StateVector& psi, const Eigensystem& eig);

// <E_i|A|E_i> for every eigenstate. A diagonal observable is given by its
// entries in the eigenvectors' basis.
Eigen::VectorXd eigenstate_expectations(const Eigen::VectorXd& a_diagonal, const Eigensystem& eig);
Eigen::VectorXd eigenstate_expectations(const OperatorMatrix& a, const Eigensystem& eig);

// sum_i w_i <E_i|A|E_i>.
double long_time_expectation(const EnsembleWeights& w, const Eigen::VectorXd& eigenstate_values);
// Degenerate-safe long-time average of <psi(t)|A|psi(t)>: sum over
// degenerate blocks B of c_B^dagger A_B c_B with c_B = V_B^dagger psi.
double long_time_expectation(const StateVector& psi, const Eigen::VectorXd& a_diagonal,
                             const Eigensystem& eig);
double long_time_expectation(const StateVector& psi, const OperatorMatrix& a,
                             const Eigensystem& eig);

// exp(-beta E_i) / Z with an energy shift that keeps every exponent <= 0.
EnsembleWeights canonical_weights(double beta, const Eigensystem& eig);
double canonical_energy(double beta, const Eigensystem& eig);

inline constexpr double kBetaMax = 1e6;  // in 1/V_dd
inline constexpr double kBetaEnergyTolerance = 1e-10;

// Inverse temperature beta in [0, kBetaMax] with <H>_beta = target_energy.
// Throws GroundStateEnergyError when target is at or below what kBetaMax can
// reach (including E_0 itself) and NegativeTemperatureError above the
// spectral mean.
double solve_beta(double target_energy, const Eigensystem& eig);

double thermal_expectation(double beta, const Eigen::VectorXd& eigenstate_values,
                           const Eigensystem& eig);

struct NamedObservable {
    std::string name;
    Eigen::VectorXd diagonal;  // computational-basis diagonal in eig's coordinates
};

struct EthEntry {
    std::string observable;
    double long_time = 0.0;
    double thermal = 0.0;
    double beta = 0.0;
    double difference = 0.0;  // |long_time - thermal|
};

struct EthComparison {
    double beta = 0.0;
    double energy = 0.0;          // <psi|H|psi> - E_0
    std::vector<EthEntry> entries;
};

// The Hamiltonian is the one `eig` diagonalizes; "H" is always included as
// the first entry.
EthComparison eth_comparison(const StateVector& psi, const std::vector<NamedObservable>& observables,
                             const Eigensystem& eig);

}  // namespace rydline
