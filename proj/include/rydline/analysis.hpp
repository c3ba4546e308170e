#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rydline/chain_system.hpp"
#include "rydline/model.hpp"

namespace rydline {

struct EigenProvenance {
    int n_sites = 0;
    double omega = 0.0;
    double delta = 0.0;
    double v_dd = 1.0;
    Sector sector = Sector::Full;

    // Stable textual key, e.g. "N=11,omega=0.1,delta=1.1,vdd=1,sector=full".
    std::string key() const;
    static EigenProvenance parse_key(std::string_view key);
};

// Complete spectrum in ascending order. Columns of `vectors` are the
// eigenvectors, each with its largest-modulus component made real-positive.
// When `sector_coordinates` is set the vectors live in the coordinates of the
// reflection sector named in the provenance; otherwise in the full basis.
struct Eigensystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;
    EigenProvenance provenance;
    bool sector_coordinates = false;

    Eigen::Index size() const { return energies.size(); }
    bool has_vectors() const { return vectors.cols() == energies.size() && energies.size() > 0; }
    double scale() const;  // max |E|, at least 1
    // Eigenvalues closer than this are treated as degenerate.
    double degeneracy_tolerance() const { return 1e-9 * scale(); }
};

// Dense Hermitian eigensolver. Throws DomainError
// for a non-Hermitian or non-square input.
Eigensystem diagonalize_dense(const Eigen::MatrixXcd& h, bool with_vectors = true);
Eigensystem diagonalize_dense(const Eigen::MatrixXd& h, bool with_vectors = true);

// Full-space operator; with Sector::Symmetric the problem is reduced to the
// symmetric reflection sector and the eigenvectors are mapped back to the full
// basis. The chain length is inferred from the dimension.
Eigensystem diagonalize(const OperatorMatrix& h, Sector sector = Sector::Full);

// Zero-phase Hamiltonian of `system` at (omega, delta), in system coordinates.
Eigensystem diagonalize(const ChainSystem& system, double omega, double delta,
                        bool with_vectors = true);

// Full spectrum assembled from the two reflection sectors (odd N), with the
// eigenvectors in the full basis. Each eigenvector has a definite reflection
// parity. Falls back to a full-space solve for even N.
Eigensystem diagonalize_by_sector(const ChainParams& params, double omega, double delta);

struct GapResult {
    double gap = 0.0;
    bool degenerate = false;
};

GapResult ground_gap(const ChainParams& params, double omega, double delta,
                     Sector sector = Sector::Full);

// Ground state of H(omega, delta, 0). For omega != 0 the ground state is
// unique and reflection symmetric; it is computed in the symmetric sector and
// returned in the full basis. `degeneracy` > 1 only for omega == 0 classical
// ground manifolds, in which case `state` is the first member.
struct GroundState {
    double energy = 0.0;
    StateVector state;
    int degeneracy = 1;
};
GroundState ground_state(const ChainParams& params, double omega, double delta);

// N_R / N of the ground state on an (omega x delta) grid: rows follow
// omega_grid, columns delta_grid. Degenerate classical ground manifolds are
// averaged uniformly.
Eigen::MatrixXd phase_diagram(std::span<const double> omega_grid,
                              std::span<const double> delta_grid, const ChainParams& params);

// |<E_j|A|E_i>|^2 against E_j - E_0 for each requested i. `a_diagonal` is a
// diagonal observable in the eigensystem's coordinates.
struct MatrixElementColumn {
    Eigen::Index source = 0;
    Eigen::VectorXd relative_energy;
    Eigen::VectorXd squared_elements;
};
std::vector<MatrixElementColumn> operator_matrix_elements(const Eigen::VectorXd& a_diagonal,
                                                          const Eigensystem& eig,
                                                          std::span<const Eigen::Index> rows);
std::vector<MatrixElementColumn> operator_matrix_elements(const OperatorMatrix& a,
                                                          const Eigensystem& eig,
                                                          std::span<const Eigen::Index> rows);

// Symmetric-sector spectra along an omega sweep at fixed delta.
struct SectorSpectrumPoint {
    double omega = 0.0;
    double delta = 0.0;
    Eigen::VectorXd energies;
    double span = 0.0;           // E_max - E_min
    double ground_gap = 0.0;     // E_1 - E_0 within the sector
    double cluster_metric = 0.0; // max intra-cluster spread / min inter-cluster gap
    int n_clusters = 0;
};

// Clusters are maximal runs of sorted levels whose consecutive spacing does
// not exceed `cluster_gap`.
struct ClusterSummary {
    int n_clusters = 0;
    double max_spread = 0.0;
    double min_gap = 0.0;
    double metric = 0.0;
};
ClusterSummary cluster_levels(const Eigen::VectorXd& sorted_energies, double cluster_gap);

std::vector<SectorSpectrumPoint> sector_spectrum_sweep(std::span<const double> omega_grid,
                                                       double delta, const ChainParams& params,
                                                       double cluster_gap = 0.1);

// Eigensystems keyed by provenance, kept in memory and optionally mirrored
// to a directory of binary files. Safe to share between threads.
class EigenCache {
public:
    explicit EigenCache(std::optional<std::filesystem::path> directory = std::nullopt);

    std::shared_ptr<const Eigensystem> get(const EigenProvenance& key);
    std::optional<std::filesystem::path> directory() const { return directory_; }
    std::filesystem::path file_for(const EigenProvenance& key) const;

private:
    std::optional<std::filesystem::path> directory_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const Eigensystem>> entries_;
};

}  // namespace rydline
