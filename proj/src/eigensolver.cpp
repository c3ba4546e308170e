#include <Eigen/Eigenvalues>
#include <cmath>

#include "rydline/analysis.hpp"
#include "rydline/errors.hpp"

namespace rydline {

namespace {

void fix_phases(Eigen::MatrixXcd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs2().maxCoeff(&arg);
        const cplx pivot = vectors(arg, c);
        if (std::abs(pivot) == 0.0) continue;
        vectors.col(c) *= std::conj(pivot) / std::abs(pivot);
        vectors(arg, c) = std::abs(vectors(arg, c));
    }
}

template <class Matrix>
Eigensystem solve(const Matrix& h, bool with_vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, with_vectors ? Eigen::ComputeEigenvectors
                                                             : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw DomainError("diagonalize: eigensolver did not converge");
    Eigensystem out;
    out.energies = es.eigenvalues();
    if (with_vectors) {
        out.vectors = es.eigenvectors().template cast<cplx>();
        fix_phases(out.vectors);
    }
    return out;
}

}  // namespace

double Eigensystem::scale() const {
    if (energies.size() == 0) return 1.0;
    return std::max(1.0, energies.cwiseAbs().maxCoeff());
}

Eigensystem diagonalize_dense(const Eigen::MatrixXd& h, bool with_vectors) {
    if (h.rows() != h.cols()) throw DomainError("diagonalize: matrix is not square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DomainError("diagonalize: matrix is not symmetric");
    return solve(h, with_vectors);
}

Eigensystem diagonalize_dense(const Eigen::MatrixXcd& h, bool with_vectors) {
    if (h.rows() != h.cols()) throw DomainError("diagonalize: matrix is not square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DomainError("diagonalize: matrix is not Hermitian");
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) return solve(Eigen::MatrixXd(h.real()), with_vectors);
    return solve(h, with_vectors);
}

}  // namespace rydline
