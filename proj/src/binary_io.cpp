#include "rydline/binary_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rydline/errors.hpp"

namespace rydline {

static_assert(std::endian::native == std::endian::little,
              "binary layout assumes a little-endian host");

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw FormatError("binary: truncated header");
    return v;
}

}  // namespace

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        row_major = m;
    out.write(reinterpret_cast<const char*>(row_major.data()),
              static_cast<std::streamsize>(row_major.size() * sizeof(std::complex<double>)));
    if (!out) throw FormatError("binary: write failed");
}

Eigen::MatrixXcd read_matrix(std::istream& in) {
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    if (rows > (std::uint64_t{1} << 20) || cols > (std::uint64_t{1} << 20))
        throw FormatError("binary: implausible dimensions");
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(
        static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(row_major.data()),
                 static_cast<std::streamsize>(row_major.size() * sizeof(std::complex<double>))))
        throw FormatError("binary: truncated payload");
    return row_major;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("binary: cannot open " + path.string());
    write_matrix(out, m);
}

Eigen::MatrixXcd load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("binary: cannot open " + path.string());
    return read_matrix(in);
}

void save_state(const std::filesystem::path& path, const Eigen::VectorXcd& psi) {
    save_matrix(path, psi);
}

Eigen::VectorXcd load_state(const std::filesystem::path& path) {
    const Eigen::MatrixXcd m = load_matrix(path);
    if (m.cols() != 1) throw FormatError("binary: a state must be a single column");
    return m.col(0);
}

}  // namespace rydline
