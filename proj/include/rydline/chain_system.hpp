#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "rydline/model.hpp"

namespace rydline {

enum class Sector { Full, Symmetric, Antisymmetric };

const char* to_string(Sector sector);
Sector sector_from_string(std::string_view name);

// Drive parameters of one Hamiltonian instance, rad/us and rad.
struct Drive {
    double omega = 0.0;
    double delta = 0.0;
    double phase = 0.0;
};

// Precomputed representation of the chain Hamiltonian family
//   H(Omega, delta, phi) = (Omega/2) (e^{i phi} L + e^{-i phi} L^T) - delta n + H_int
// inside one reflection sector, where L = sum_k |1><0|_k restricted to the
// sector. All classical observables are diagonal in every sector basis, so
// they are stored as vectors. Immutable after construction.
class ChainSystem {
public:
    explicit ChainSystem(const ChainParams& params, Sector sector = Sector::Full);

    const ChainParams& params() const { return params_; }
    Sector sector() const { return sector_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(counts_.size()); }

    const Eigen::VectorXd& excitation_counts() const { return counts_; }
    const Eigen::VectorXd& interaction() const { return interaction_; }
    const Eigen::VectorXd& z2() const { return z2_; }

    // y = H x. `x` and `y` must not alias.
    void apply_hamiltonian(const Drive& drive, const cplx* x, cplx* y) const;
    // y = (dH/dOmega) x, i.e. (1/2)(e^{i phi} L + e^{-i phi} L^T) x.
    void apply_drive_operator(double phase, const cplx* x, cplx* y) const;

    Eigen::MatrixXcd dense_hamiltonian(const Drive& drive) const;
    // Real symmetric matrix for a zero phase.
    Eigen::MatrixXd dense_real_hamiltonian(double omega, double delta) const;
    double energy(const Drive& drive, const StateVector& psi) const;

    // Maps sector coordinates to the full computational basis and back.
    StateVector embed(const StateVector& sector_state) const;
    StateVector restrict_state(const StateVector& full_state) const;
    const SparseMatrixC& embedding() const { return embedding_; }

private:
    struct Csr {
        std::vector<int> row_start;
        std::vector<int> col;
        std::vector<double> val;
    };
    static Csr to_csr(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m);

    ChainParams params_;
    Sector sector_;
    Eigen::VectorXd counts_;
    Eigen::VectorXd interaction_;
    Eigen::VectorXd z2_;
    Csr raise_;  // rows of L
    Csr lower_;  // rows of L^T
    SparseMatrixC embedding_;  // full x sector isometry; empty for Sector::Full
};

}  // namespace rydline
