#include "rydline/model.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "rydline/errors.hpp"

namespace rydline {

namespace {

using Triplet = Eigen::Triplet<cplx>;

void check_builder_params(const ChainParams& p) {
    if (p.n_sites < 1 || p.n_sites > kMaxSites)
        throw DomainError("chain: n_sites must lie in [1, " + std::to_string(kMaxSites) + "]");
    if (!(p.v_dd > 0.0) || !std::isfinite(p.v_dd))
        throw DomainError("chain: v_dd must be positive and finite");
}

void require_odd(const ChainParams& p, const char* what) {
    check_builder_params(p);
    if (p.n_sites % 2 == 0) throw DomainError(std::string(what) + ": n_sites must be odd");
}

OperatorMatrix diagonal_operator(const Eigen::VectorXd& diag) {
    const auto dim = diag.size();
    SparseMatrixC m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (Eigen::Index i = 0; i < dim; ++i)
        if (diag[i] != 0.0) m.insert(i, i) = diag[i];
    m.makeCompressed();
    return OperatorMatrix(std::move(m), true);
}

OperatorMatrix sector_basis(const ChainParams& p, double sign) {
    require_odd(p, "sector basis");
    const int n = p.n_sites;
    const std::uint64_t dim = p.dim();
    std::vector<Triplet> triplets;
    Eigen::Index col = 0;
    const double s = 1.0 / std::sqrt(2.0);
    for (std::uint64_t b = 0; b < dim; ++b) {
        const std::uint64_t r = reflect_index(b, n);
        if (r == b) {
            if (sign > 0) triplets.emplace_back(static_cast<Eigen::Index>(b), col++, 1.0);
        } else if (b < r) {
            triplets.emplace_back(static_cast<Eigen::Index>(b), col, s);
            triplets.emplace_back(static_cast<Eigen::Index>(r), col, sign * s);
            ++col;
        }
    }
    SparseMatrixC m(static_cast<Eigen::Index>(dim), col);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return OperatorMatrix(std::move(m), false);
}

}  // namespace

ChainParams ChainParams::odd_chain(int n_sites, double v_dd) {
    ChainParams p{n_sites, v_dd};
    check_builder_params(p);
    if (n_sites < 3 || n_sites % 2 == 0)
        throw DomainError("chain: production chains need an odd n_sites >= 3");
    return p;
}

OperatorMatrix::OperatorMatrix(SparseMatrixC entries, bool hermitian)
    : entries_(std::move(entries)), hermitian_(hermitian) {}

double OperatorMatrix::hermiticity_residual() const {
    if (rows() != cols()) return std::numeric_limits<double>::infinity();
    const SparseMatrixC adj = entries_.adjoint();
    const SparseMatrixC diff = entries_ - adj;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

double OperatorMatrix::expectation(const StateVector& psi) const {
    return psi.dot(entries_ * psi).real();
}

std::uint64_t reflect_index(std::uint64_t b, int n_sites) {
    std::uint64_t r = 0;
    for (int i = 0; i < n_sites; ++i) {
        r = (r << 1) | (b & 1u);
        b >>= 1;
    }
    return r;
}

StateVector basis_state(std::string_view bits) {
    const auto n = static_cast<int>(bits.size());
    if (n < 1 || n > kMaxSites) throw DomainError("basis_state: invalid length");
    std::uint64_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw DomainError("basis_state: expected a 0/1 string");
        index = (index << 1) | static_cast<std::uint64_t>(c == '1');
    }
    StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(std::uint64_t{1} << n));
    psi[static_cast<Eigen::Index>(index)] = 1.0;
    return psi;
}

Eigen::VectorXd excitation_counts(const ChainParams& params) {
    check_builder_params(params);
    const auto dim = static_cast<Eigen::Index>(params.dim());
    Eigen::VectorXd out(dim);
    for (Eigen::Index b = 0; b < dim; ++b)
        out[b] = static_cast<double>(std::popcount(static_cast<std::uint64_t>(b)));
    return out;
}

Eigen::VectorXd interaction_energies(const ChainParams& params) {
    check_builder_params(params);
    const int n = params.n_sites;
    // V_dd / d^3 for every separation d.
    std::vector<double> coupling(static_cast<std::size_t>(n), 0.0);
    for (int d = 1; d < n; ++d) coupling[d] = params.v_dd / std::pow(static_cast<double>(d), 3);

    const auto dim = static_cast<Eigen::Index>(params.dim());
    Eigen::VectorXd out(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        const auto bits = static_cast<std::uint64_t>(b);
        double e = 0.0;
        for (int k = 1; k <= n; ++k) {
            if (!site_occupied(bits, k, n)) continue;
            for (int l = k + 1; l <= n; ++l)
                if (site_occupied(bits, l, n)) e += coupling[l - k];
        }
        out[b] = e;
    }
    return out;
}

Eigen::VectorXd z2_values(const ChainParams& params) {
    check_builder_params(params);
    const int n = params.n_sites;
    const auto dim = static_cast<Eigen::Index>(params.dim());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    if (n < 2) return out;
    const double norm = static_cast<double>(n) * static_cast<double>(n - 1);
    for (Eigen::Index b = 0; b < dim; ++b) {
        // sum_{k != l} (-1)^{k+l} s_k s_l = (sum_k (-1)^k s_k)^2 - N with s = +-1.
        double staggered = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double s = site_occupied(static_cast<std::uint64_t>(b), k, n) ? 1.0 : -1.0;
            staggered += (k % 2 == 0 ? 1.0 : -1.0) * s;
        }
        out[b] = (staggered * staggered - n) / norm;
    }
    return out;
}

OperatorMatrix build_hamiltonian(const ChainParams& params, double omega, double delta,
                                 double phase) {
    check_builder_params(params);
    const int n = params.n_sites;
    const auto dim = static_cast<Eigen::Index>(params.dim());
    const Eigen::VectorXd hint = interaction_energies(params);
    // <b'| H |b> for b' = b with site k raised is (Omega/2) e^{i phi}.
    const cplx raise = 0.5 * omega * std::polar(1.0, phase);
    const cplx lower = std::conj(raise);

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(n + 1));
    for (Eigen::Index b = 0; b < dim; ++b) {
        const auto bits = static_cast<std::uint64_t>(b);
        const double diag = hint[b] - delta * static_cast<double>(std::popcount(bits));
        if (diag != 0.0) triplets.emplace_back(b, b, diag);
        if (omega == 0.0) continue;
        for (int k = 1; k <= n; ++k) {
            const std::uint64_t mask = std::uint64_t{1} << (n - k);
            const auto other = static_cast<Eigen::Index>(bits ^ mask);
            triplets.emplace_back(b, other, (bits & mask) ? raise : lower);
        }
    }
    SparseMatrixC m(dim, dim);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return OperatorMatrix(std::move(m), true);
}

OperatorMatrix interaction_observable(const ChainParams& params) {
    return diagonal_operator(interaction_energies(params));
}

OperatorMatrix z2_order_parameter(const ChainParams& params) {
    return diagonal_operator(z2_values(params));
}

OperatorMatrix total_number_operator(const ChainParams& params) {
    return diagonal_operator(excitation_counts(params));
}

OperatorMatrix reflection_operator(const ChainParams& params) {
    require_odd(params, "reflection_operator");
    const auto dim = static_cast<Eigen::Index>(params.dim());
    SparseMatrixC m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (Eigen::Index b = 0; b < dim; ++b)
        m.insert(static_cast<Eigen::Index>(reflect_index(static_cast<std::uint64_t>(b),
                                                         params.n_sites)),
                 b) = 1.0;
    m.makeCompressed();
    return OperatorMatrix(std::move(m), true);
}

OperatorMatrix symmetric_sector_basis(const ChainParams& params) {
    return sector_basis(params, +1.0);
}

OperatorMatrix antisymmetric_sector_basis(const ChainParams& params) {
    return sector_basis(params, -1.0);
}

std::size_t symmetric_sector_dim(int n_sites) {
    const std::size_t full = std::size_t{1} << n_sites;
    const std::size_t palindromes = std::size_t{1} << ((n_sites + 1) / 2);
    return (full + palindromes) / 2;
}

}  // namespace rydline
