#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <string_view>

namespace rydline {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// Open-boundary chain with 1/|k-l|^3 interactions. Angular quantities
// (Omega, delta, V_dd) are rad/us.
//
// Basis convention: index b of a computational state |b_1 ... b_N> has site 1
// as its most significant bit, so site k is bit (N - k) of b and |10101> is
// index 21.
struct ChainParams {
    int n_sites = 5;
    double v_dd = 1.0;
    static constexpr int interaction_exponent = 3;

    // Production chains: odd n_sites >= 3, v_dd > 0. Throws DomainError.
    static ChainParams odd_chain(int n_sites, double v_dd = 1.0);

    std::size_t dim() const { return std::size_t{1} << n_sites; }
};

// Largest chain any builder accepts; dense operators beyond this do not fit.
inline constexpr int kMaxSites = 16;

// Sparse operator on the chain's Hilbert space (or a rectangular basis
// transform when produced by the sector-basis builders).
class OperatorMatrix {
public:
    OperatorMatrix() = default;
    OperatorMatrix(SparseMatrixC entries, bool hermitian);

    const SparseMatrixC& entries() const { return entries_; }
    Eigen::Index rows() const { return entries_.rows(); }
    Eigen::Index cols() const { return entries_.cols(); }
    bool hermitian_flag() const { return hermitian_; }

    Eigen::MatrixXcd to_dense() const { return Eigen::MatrixXcd(entries_); }
    // max |M - M^dagger| entry.
    double hermiticity_residual() const;
    StateVector apply(const StateVector& psi) const { return entries_ * psi; }
    double expectation(const StateVector& psi) const;

private:
    SparseMatrixC entries_;
    bool hermitian_ = false;
};

// Occupation of site k (1-based) in computational state b.
inline bool site_occupied(std::uint64_t b, int k, int n_sites) {
    return ((b >> (n_sites - k)) & 1u) != 0;
}
std::uint64_t reflect_index(std::uint64_t b, int n_sites);

// Parses a bit string such as "10101" into a normalized basis vector.
StateVector basis_state(std::string_view bits);

// Diagonal entries of the classical observables, indexed by computational state.
Eigen::VectorXd excitation_counts(const ChainParams& params);
Eigen::VectorXd interaction_energies(const ChainParams& params);
Eigen::VectorXd z2_values(const ChainParams& params);

// (Omega/2) sum_k [e^{-i phi} |0><1|_k + h.c.] - delta sum_k n_k
//   + V_dd sum_{k<l} n_k n_l / |k - l|^3,  with n_k = |1><1|_k.
OperatorMatrix build_hamiltonian(const ChainParams& params, double omega, double delta,
                                 double phase);
OperatorMatrix interaction_observable(const ChainParams& params);
// sum_{k != l} sigma_z^k (-1)^{k+l} sigma_z^l / (N (N - 1)); equals 1 on Neel states.
OperatorMatrix z2_order_parameter(const ChainParams& params);
OperatorMatrix total_number_operator(const ChainParams& params);
// Permutation |b_1 ... b_N> -> |b_N ... b_1>. Requires odd n_sites.
OperatorMatrix reflection_operator(const ChainParams& params);

// Orthonormal columns spanning the +1 (symmetric) or -1 (antisymmetric)
// eigenspace of the reflection. Palindromes are kept as-is; each pair
// b < R(b) contributes (|b> +- |R b>)/sqrt(2). Columns are ordered by the
// smaller member of each pair. Requires odd n_sites.
OperatorMatrix symmetric_sector_basis(const ChainParams& params);
OperatorMatrix antisymmetric_sector_basis(const ChainParams& params);

std::size_t symmetric_sector_dim(int n_sites);

}  // namespace rydline
