#include "rydline/chain_system.hpp"

#include <bit>
#include <string>

#include "rydline/errors.hpp"

namespace rydline {

namespace {

using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseReal full_raising_operator(const ChainParams& p) {
    const int n = p.n_sites;
    const auto dim = static_cast<Eigen::Index>(p.dim());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(n) / 2);
    for (Eigen::Index b = 0; b < dim; ++b) {
        const auto bits = static_cast<std::uint64_t>(b);
        for (int k = 1; k <= n; ++k) {
            const std::uint64_t mask = std::uint64_t{1} << (n - k);
            if ((bits & mask) == 0)
                triplets.emplace_back(static_cast<Eigen::Index>(bits | mask), b, 1.0);
        }
    }
    SparseReal m(dim, dim);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

Eigen::VectorXd project_diagonal(const SparseReal& basis, const Eigen::VectorXd& diag) {
    // diag(B^T D B) for an isometry B with disjoint column supports.
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.cols());
    for (Eigen::Index r = 0; r < basis.outerSize(); ++r)
        for (SparseReal::InnerIterator it(basis, r); it; ++it)
            out[it.col()] += it.value() * it.value() * diag[r];
    return out;
}

}  // namespace

const char* to_string(Sector sector) {
    switch (sector) {
        case Sector::Full: return "full";
        case Sector::Symmetric: return "symmetric";
        case Sector::Antisymmetric: return "antisymmetric";
    }
    return "full";
}

Sector sector_from_string(std::string_view name) {
    if (name == "full") return Sector::Full;
    if (name == "symmetric") return Sector::Symmetric;
    if (name == "antisymmetric") return Sector::Antisymmetric;
    throw DomainError("unknown sector '" + std::string(name) + "'");
}

ChainSystem::Csr ChainSystem::to_csr(const SparseReal& m) {
    Csr out;
    out.row_start.reserve(static_cast<std::size_t>(m.rows()) + 1);
    out.row_start.push_back(0);
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
        for (SparseReal::InnerIterator it(m, r); it; ++it) {
            if (it.value() == 0.0) continue;
            out.col.push_back(static_cast<int>(it.col()));
            out.val.push_back(it.value());
        }
        out.row_start.push_back(static_cast<int>(out.col.size()));
    }
    return out;
}

ChainSystem::ChainSystem(const ChainParams& params, Sector sector)
    : params_(params), sector_(sector) {
    const Eigen::VectorXd counts = rydline::excitation_counts(params);
    const Eigen::VectorXd hint = interaction_energies(params);
    const Eigen::VectorXd z2v = z2_values(params);
    SparseReal raise = full_raising_operator(params);

    if (sector == Sector::Full) {
        counts_ = counts;
        interaction_ = hint;
        z2_ = z2v;
    } else {
        const OperatorMatrix basis = sector == Sector::Symmetric
                                         ? symmetric_sector_basis(params)
                                         : antisymmetric_sector_basis(params);
        embedding_ = basis.entries();
        const SparseReal b = basis.entries().real();
        const SparseReal bt = b.transpose();
        raise = SparseReal(bt * raise * b);
        counts_ = project_diagonal(b, counts);
        interaction_ = project_diagonal(b, hint);
        z2_ = project_diagonal(b, z2v);
    }
    raise.prune(0.0);
    raise_ = to_csr(raise);
    lower_ = to_csr(SparseReal(raise.transpose()));
}

void ChainSystem::apply_hamiltonian(const Drive& drive, const cplx* x, cplx* y) const {
    const cplx up = 0.5 * drive.omega * std::polar(1.0, drive.phase);
    const cplx down = std::conj(up);
    const Eigen::Index n = dim();
    const double* counts = counts_.data();
    const double* hint = interaction_.data();
    for (Eigen::Index r = 0; r < n; ++r) {
        cplx acc_up = 0.0;
        for (int p = raise_.row_start[r]; p < raise_.row_start[r + 1]; ++p)
            acc_up += raise_.val[p] * x[raise_.col[p]];
        cplx acc_down = 0.0;
        for (int p = lower_.row_start[r]; p < lower_.row_start[r + 1]; ++p)
            acc_down += lower_.val[p] * x[lower_.col[p]];
        y[r] = (hint[r] - drive.delta * counts[r]) * x[r] + up * acc_up + down * acc_down;
    }
}

void ChainSystem::apply_drive_operator(double phase, const cplx* x, cplx* y) const {
    apply_hamiltonian(Drive{1.0, 0.0, phase}, x, y);
    // Remove the interaction part, which apply_hamiltonian always adds.
    const Eigen::Index n = dim();
    for (Eigen::Index r = 0; r < n; ++r) y[r] -= interaction_[r] * x[r];
}

Eigen::MatrixXcd ChainSystem::dense_hamiltonian(const Drive& drive) const {
    const cplx up = 0.5 * drive.omega * std::polar(1.0, drive.phase);
    const Eigen::Index n = dim();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        h(r, r) = interaction_[r] - drive.delta * counts_[r];
        for (int p = raise_.row_start[r]; p < raise_.row_start[r + 1]; ++p)
            h(r, raise_.col[p]) += up * raise_.val[p];
        for (int p = lower_.row_start[r]; p < lower_.row_start[r + 1]; ++p)
            h(r, lower_.col[p]) += std::conj(up) * lower_.val[p];
    }
    return h;
}

Eigen::MatrixXd ChainSystem::dense_real_hamiltonian(double omega, double delta) const {
    const Eigen::Index n = dim();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        h(r, r) = interaction_[r] - delta * counts_[r];
        for (int p = raise_.row_start[r]; p < raise_.row_start[r + 1]; ++p)
            h(r, raise_.col[p]) += 0.5 * omega * raise_.val[p];
        for (int p = lower_.row_start[r]; p < lower_.row_start[r + 1]; ++p)
            h(r, lower_.col[p]) += 0.5 * omega * lower_.val[p];
    }
    return h;
}

double ChainSystem::energy(const Drive& drive, const StateVector& psi) const {
    StateVector h_psi(psi.size());
    apply_hamiltonian(drive, psi.data(), h_psi.data());
    return psi.dot(h_psi).real();
}

StateVector ChainSystem::embed(const StateVector& sector_state) const {
    if (sector_ == Sector::Full) return sector_state;
    return embedding_ * sector_state;
}

StateVector ChainSystem::restrict_state(const StateVector& full_state) const {
    if (sector_ == Sector::Full) return full_state;
    return embedding_.adjoint() * full_state;
}

}  // namespace rydline
