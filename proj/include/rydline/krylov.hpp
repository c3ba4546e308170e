#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace rydline {

// Applies exp(-i H dt) to a vector with a Lanczos (Krylov) approximation of
// the exponential of a Hermitian H that is only available as a matrix-vector
// product. The basis is grown until the a posteriori error estimate drops
// below `tolerance` relative to the vector norm, so each step is the exact
// exponential to that tolerance. Workspace is reused between calls.
class KrylovExponential {
public:
    using Apply = std::function<void(const std::complex<double>*, std::complex<double>*)>;

    explicit KrylovExponential(Eigen::Index dim, int max_krylov_dim = 60, double tolerance = 1e-13);

    // Returns the Krylov dimension used. Throws IntegrationError when the
    // tolerance cannot be met within max_krylov_dim.
    int apply(const Apply& h, double dt, Eigen::VectorXcd& psi);

private:
    Eigen::Index dim_;
    int max_dim_;
    double tol_;
    Eigen::MatrixXcd basis_;
    Eigen::VectorXcd work_;
};

}  // namespace rydline
