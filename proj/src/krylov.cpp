#include "rydline/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "rydline/errors.hpp"

namespace rydline {

KrylovExponential::KrylovExponential(Eigen::Index dim, int max_krylov_dim, double tolerance)
    : dim_(dim),
      max_dim_(static_cast<int>(std::min<Eigen::Index>(max_krylov_dim, dim))),
      tol_(tolerance),
      basis_(dim, max_dim_ + 1),
      work_(dim) {}

int KrylovExponential::apply(const Apply& h, double dt, Eigen::VectorXcd& psi) {
    using cplx = std::complex<double>;
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return 0;

    Eigen::VectorXd alpha(max_dim_);
    Eigen::VectorXd beta(max_dim_);
    basis_.col(0) = psi / beta0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    Eigen::VectorXcd coeffs;
    for (int j = 0; j < max_dim_; ++j) {
        h(basis_.col(j).data(), work_.data());
        alpha[j] = basis_.col(j).dot(work_).real();
        work_ -= alpha[j] * basis_.col(j);
        if (j > 0) work_ -= beta[j - 1] * basis_.col(j - 1);
        // One pass of full reorthogonalization keeps the basis orthonormal to
        // machine precision, which in turn preserves the norm of psi.
        const Eigen::VectorXcd overlaps = basis_.leftCols(j + 1).adjoint() * work_;
        work_ -= basis_.leftCols(j + 1) * overlaps;
        beta[j] = work_.norm();

        const int m = j + 1;
        Eigen::VectorXd diag = alpha.head(m);
        Eigen::VectorXd sub = beta.head(std::max(0, m - 1));
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::MatrixXd& q = tri.eigenvectors();
        Eigen::VectorXcd phases(m);
        for (int k = 0; k < m; ++k)
            phases[k] = std::polar(1.0, -tri.eigenvalues()[k] * dt) * q(0, k);
        coeffs = q.cast<cplx>() * phases;

        const bool breakdown = beta[j] <= 1e-14 * std::max(1.0, std::abs(alpha[j]));
        const double error = beta[j] * std::abs(coeffs[m - 1]);
        if (breakdown || error <= tol_ || m == dim_) {
            psi = beta0 * (basis_.leftCols(m) * coeffs);
            return m;
        }
        if (j + 1 < max_dim_ + 1) basis_.col(j + 1) = work_ / beta[j];
    }
    throw IntegrationError("Krylov exponential did not converge; reduce the time step");
}

}  // namespace rydline
