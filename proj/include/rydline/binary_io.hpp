#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>

namespace rydline {

// Binary layout shared by operators, states and cached eigensystems:
//   u64 rows, u64 cols, then rows*cols (f64 real, f64 imag) pairs in
//   row-major order; all values little-endian. A state is a rows x 1 block.
// An eigensystem file is two consecutive blocks: energies (n x 1, zero
// imaginary parts) followed by the eigenvector matrix (dim x n).

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_matrix(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd load_matrix(const std::filesystem::path& path);

void save_state(const std::filesystem::path& path, const Eigen::VectorXcd& psi);
Eigen::VectorXcd load_state(const std::filesystem::path& path);

}  // namespace rydline
