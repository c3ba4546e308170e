#include "rydline/thermo.hpp"

#include <cmath>

#include "rydline/errors.hpp"

namespace rydline {

namespace {

void require_vectors(const Eigensystem& eig, Eigen::Index dim, const char* who) {
    if (!eig.has_vectors()) throw DomainError(std::string(who) + ": eigensystem has no vectors");
    if (eig.vectors.rows() != eig.vectors.cols())
        throw DomainError(std::string(who) + ": eigensystem is incomplete");
    if (dim >= 0 && dim != eig.vectors.rows())
        throw DomainError(std::string(who) + ": dimension mismatch with the eigensystem");
}

void require_normalized(const StateVector& psi, const char* who) {
    if (std::abs(psi.norm() - 1.0) > 1e-8) throw DomainError(std::string(who) + ": state is not normalized");
}

template <class BlockOp>
double block_sum(const StateVector& psi, const Eigensystem& eig, BlockOp&& apply_a) {
    double total = 0.0;
    for (const auto& [first, last] : degenerate_blocks(eig)) {
        const auto v = eig.vectors.middleCols(first, last - first);
        const Eigen::VectorXcd c = v.adjoint() * psi;
        const Eigen::VectorXcd proj = v * c;
        total += proj.dot(apply_a(proj)).real();
    }
    return total;
}

}  // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> degenerate_blocks(const Eigensystem& eig) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
    const double tol = eig.degeneracy_tolerance();
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= eig.size(); ++i) {
        if (i == eig.size() || eig.energies[i] - eig.energies[i - 1] > tol) {
            blocks.emplace_back(start, i);
            start = i;
        }
    }
    return blocks;
}

EnsembleWeights diagonal_ensemble(const StateVector& psi, const Eigensystem& eig) {
    require_vectors(eig, psi.size(), "diagonal_ensemble");
    require_normalized(psi, "diagonal_ensemble");
    EnsembleWeights w;
    w.kind = EnsembleKind::Diagonal;
    w.weights = (eig.vectors.adjoint() * psi).cwiseAbs2();
    w.eigensystem = eig.provenance.key();
    return w;
}

Eigen::VectorXd eigenstate_expectations(const Eigen::VectorXd& a_diagonal, const Eigensystem& eig) {
    require_vectors(eig, a_diagonal.size(), "eigenstate_expectations");
    return eig.vectors.cwiseAbs2().transpose() * a_diagonal;
}

Eigen::VectorXd eigenstate_expectations(const OperatorMatrix& a, const Eigensystem& eig) {
    require_vectors(eig, a.rows(), "eigenstate_expectations");
    const Eigen::MatrixXcd av = a.entries() * eig.vectors;
    return eig.vectors.conjugate().cwiseProduct(av).colwise().sum().real().transpose();
}

double long_time_expectation(const EnsembleWeights& w, const Eigen::VectorXd& eigenstate_values) {
    if (w.weights.size() != eigenstate_values.size())
        throw DomainError("long_time_expectation: weight and observable lengths differ");
    return w.weights.dot(eigenstate_values);
}

double long_time_expectation(const StateVector& psi, const Eigen::VectorXd& a_diagonal,
                             const Eigensystem& eig) {
    require_vectors(eig, psi.size(), "long_time_expectation");
    require_normalized(psi, "long_time_expectation");
    if (a_diagonal.size() != psi.size()) throw DomainError("long_time_expectation: observable dimension mismatch");
    return block_sum(psi, eig, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
        return (a_diagonal.cast<cplx>().array() * x.array()).matrix();
    });
}

double long_time_expectation(const StateVector& psi, const OperatorMatrix& a, const Eigensystem& eig) {
    require_vectors(eig, psi.size(), "long_time_expectation");
    require_normalized(psi, "long_time_expectation");
    if (a.rows() != psi.size() || a.cols() != psi.size())
        throw DomainError("long_time_expectation: observable dimension mismatch");
    return block_sum(psi, eig, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return a.entries() * x; });
}

EnsembleWeights canonical_weights(double beta, const Eigensystem& eig) {
    if (!std::isfinite(beta)) throw DomainError("canonical_weights: beta must be finite");
    if (eig.size() == 0) throw DomainError("canonical_weights: empty eigensystem");
    const double shift = beta >= 0.0 ? eig.energies.minCoeff() : eig.energies.maxCoeff();
    EnsembleWeights w;
    w.kind = EnsembleKind::Canonical;
    w.beta = beta;
    w.eigensystem = eig.provenance.key();
    w.weights = (-beta * (eig.energies.array() - shift)).exp();
    w.weights /= w.weights.sum();
    return w;
}

double canonical_energy(double beta, const Eigensystem& eig) {
    return canonical_weights(beta, eig).weights.dot(eig.energies);
}

double solve_beta(double target, const Eigensystem& eig) {
    if (eig.size() == 0) throw DomainError("solve_beta: empty eigensystem");
    const double e0 = eig.energies.minCoeff();
    const double mean = eig.energies.mean();
    const double slack = 1e-12 * eig.scale();
    if (target <= e0) throw GroundStateEnergyError("solve_beta: target energy is at or below the ground energy");
    if (std::abs(target - mean) <= slack) return 0.0;
    if (target > mean) throw NegativeTemperatureError("solve_beta: target energy exceeds the spectral mean");

    double lo = 0.0;
    double hi = kBetaMax;
    if (canonical_energy(hi, eig) > target)
        throw GroundStateEnergyError("solve_beta: target energy needs beta beyond the supported range");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        const double e = canonical_energy(mid, eig);
        if (std::abs(e - target) <= kBetaEnergyTolerance) break;
        if (e > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-16 * hi) break;
    }
    return mid;
}

double thermal_expectation(double beta, const Eigen::VectorXd& eigenstate_values, const Eigensystem& eig) {
    if (eigenstate_values.size() != eig.size())
        throw DomainError("thermal_expectation: observable length differs from the spectrum");
    return canonical_weights(beta, eig).weights.dot(eigenstate_values);
}

EthComparison eth_comparison(const StateVector& psi, const std::vector<NamedObservable>& observables,
                             const Eigensystem& eig) {
    const EnsembleWeights w = diagonal_ensemble(psi, eig);
    const double energy = w.weights.dot(eig.energies);
    EthComparison out;
    out.beta = solve_beta(energy, eig);
    out.energy = energy - eig.energies[0];

    const EnsembleWeights canon = canonical_weights(out.beta, eig);
    EthEntry h{"H", energy - eig.energies[0], canon.weights.dot(eig.energies) - eig.energies[0], out.beta, 0.0};
    h.difference = std::abs(h.long_time - h.thermal);
    out.entries.push_back(h);

    for (const NamedObservable& obs : observables) {
        EthEntry e;
        e.observable = obs.name;
        e.beta = out.beta;
        e.long_time = long_time_expectation(psi, obs.diagonal, eig);
        e.thermal = canon.weights.dot(eigenstate_expectations(obs.diagonal, eig));
        e.difference = std::abs(e.long_time - e.thermal);
        out.entries.push_back(e);
    }
    return out;
}

}  // namespace rydline
