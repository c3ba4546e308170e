#include "rydline/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rydline/binary_io.hpp"
#include "rydline/errors.hpp"

namespace rydline {

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

int sites_from_dim(Eigen::Index dim) {
    if (dim < 2 || !std::has_single_bit(static_cast<std::uint64_t>(dim)))
        throw DomainError("diagonalize: dimension is not a power of two");
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

double ground_fraction(const ChainSystem& full_or_sym, const ChainParams& params, double omega,
                       double delta) {
    const Eigen::VectorXd diag =
        full_or_sym.interaction() - delta * full_or_sym.excitation_counts();
    if (omega == 0.0) {
        const double e0 = diag.minCoeff();
        const double tol = 1e-9 * std::max(1.0, diag.cwiseAbs().maxCoeff());
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index b = 0; b < diag.size(); ++b) {
            if (diag[b] - e0 <= tol) {
                sum += full_or_sym.excitation_counts()[b];
                ++count;
            }
        }
        return sum / count / params.n_sites;
    }
    const Eigensystem eig = diagonalize(full_or_sym, omega, delta, true);
    const Eigen::VectorXcd g = eig.vectors.col(0);
    return g.cwiseAbs2().dot(full_or_sym.excitation_counts()) / params.n_sites;
}

}  // namespace

std::string EigenProvenance::key() const {
    return "N=" + std::to_string(n_sites) + ",omega=" + format_number(omega) +
           ",delta=" + format_number(delta) + ",vdd=" + format_number(v_dd) +
           ",sector=" + to_string(sector);
}

EigenProvenance EigenProvenance::parse_key(std::string_view key) {
    EigenProvenance p;
    bool seen[5] = {false, false, false, false, false};
    std::string text(key);
    std::stringstream fields(text);
    std::string field;
    try {
        while (std::getline(fields, field, ',')) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) throw FormatError("eigen key: missing '=' in " + field);
            const std::string name = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (name == "N") { p.n_sites = std::stoi(value); seen[0] = true; }
            else if (name == "omega") { p.omega = std::stod(value); seen[1] = true; }
            else if (name == "delta") { p.delta = std::stod(value); seen[2] = true; }
            else if (name == "vdd") { p.v_dd = std::stod(value); seen[3] = true; }
            else if (name == "sector") { p.sector = sector_from_string(value); seen[4] = true; }
            else throw FormatError("eigen key: unknown field " + name);
        }
    } catch (const std::invalid_argument&) {
        throw FormatError("eigen key: malformed number in '" + text + "'");
    }
    if (!(seen[0] && seen[1] && seen[2])) throw FormatError("eigen key: N, omega and delta are required");
    return p;
}

Eigensystem diagonalize(const OperatorMatrix& h, Sector sector) {
    if (h.rows() != h.cols()) throw DomainError("diagonalize: operator is not square");
    double largest = 1.0;
    for (Eigen::Index k = 0; k < h.entries().outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(h.entries(), k); it; ++it) largest = std::max(largest, std::abs(it.value()));
    if (h.hermiticity_residual() > 1e-12 * largest)
        throw DomainError("diagonalize: operator is not Hermitian");
    const int n_sites = sites_from_dim(h.rows());
    if (n_sites > 13 && sector == Sector::Full)
        throw CapacityError("diagonalize: full-space diagonalization is limited to N <= 13");

    Eigensystem out;
    if (sector == Sector::Full) {
        out = diagonalize_dense(h.to_dense(), true);
    } else {
        ChainParams params{n_sites, 1.0};
        const OperatorMatrix basis = sector == Sector::Symmetric ? symmetric_sector_basis(params)
                                                                 : antisymmetric_sector_basis(params);
        const SparseMatrixC reduced = basis.entries().adjoint() * h.entries() * basis.entries();
        out = diagonalize_dense(Eigen::MatrixXcd(reduced), true);
        out.vectors = basis.entries() * out.vectors;
    }
    out.provenance.n_sites = n_sites;
    out.provenance.sector = sector;
    out.provenance.omega = std::numeric_limits<double>::quiet_NaN();
    out.provenance.delta = std::numeric_limits<double>::quiet_NaN();
    out.sector_coordinates = false;
    return out;
}

Eigensystem diagonalize(const ChainSystem& system, double omega, double delta, bool with_vectors) {
    Eigensystem out = diagonalize_dense(system.dense_real_hamiltonian(omega, delta), with_vectors);
    out.provenance = {system.params().n_sites, omega, delta, system.params().v_dd,
                      system.sector()};
    out.sector_coordinates = system.sector() != Sector::Full;
    return out;
}

Eigensystem diagonalize_by_sector(const ChainParams& params, double omega, double delta) {
    if (params.n_sites % 2 == 0 || params.n_sites < 3) {
        Eigensystem out = diagonalize(ChainSystem(params, Sector::Full), omega, delta, true);
        return out;
    }
    const ChainSystem sym(params, Sector::Symmetric);
    const ChainSystem anti(params, Sector::Antisymmetric);
    const Eigensystem a = diagonalize(sym, omega, delta, true);
    const Eigensystem b = diagonalize(anti, omega, delta, true);

    const Eigen::Index dim = a.size() + b.size();
    std::vector<std::pair<double, Eigen::Index>> order;
    order.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < a.size(); ++i) order.emplace_back(a.energies[i], i);
    for (Eigen::Index i = 0; i < b.size(); ++i) order.emplace_back(b.energies[i], a.size() + i);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });

    const Eigen::MatrixXcd va = sym.embedding() * a.vectors;
    const Eigen::MatrixXcd vb = anti.embedding() * b.vectors;
    Eigensystem out;
    out.energies.resize(dim);
    out.vectors.resize(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)].second;
        out.energies[k] = order[static_cast<std::size_t>(k)].first;
        out.vectors.col(k) = src < a.size() ? va.col(src) : vb.col(src - a.size());
    }
    out.provenance = {params.n_sites, omega, delta, params.v_dd, Sector::Full};
    out.sector_coordinates = false;
    return out;
}

GapResult ground_gap(const ChainParams& params, double omega, double delta, Sector sector) {
    const ChainSystem system(params, sector);
    if (system.dim() < 2) throw DomainError("ground_gap: need at least two levels");
    const Eigensystem eig = diagonalize(system, omega, delta, false);
    GapResult out;
    out.gap = eig.energies[1] - eig.energies[0];
    if (out.gap <= eig.degeneracy_tolerance()) {
        out.gap = 0.0;
        out.degenerate = true;
    }
    return out;
}

GroundState ground_state(const ChainParams& params, double omega, double delta) {
    const ChainSystem full(params, Sector::Full);
    GroundState out;
    if (omega == 0.0) {
        const Eigen::VectorXd diag = full.interaction() - delta * full.excitation_counts();
        Eigen::Index arg = 0;
        out.energy = diag.minCoeff(&arg);
        const double tol = 1e-9 * std::max(1.0, diag.cwiseAbs().maxCoeff());
        out.degeneracy = static_cast<int>((diag.array() - out.energy <= tol).count());
        out.state = StateVector::Zero(full.dim());
        out.state[arg] = 1.0;
        return out;
    }
    const bool use_sector = params.n_sites >= 3 && params.n_sites % 2 == 1;
    const ChainSystem system(params, use_sector ? Sector::Symmetric : Sector::Full);
    const Eigensystem eig = diagonalize(system, omega, delta, true);
    out.energy = eig.energies[0];
    out.state = system.embed(eig.vectors.col(0));
    return out;
}

Eigen::MatrixXd phase_diagram(std::span<const double> omega_grid,
                              std::span<const double> delta_grid, const ChainParams& params) {
    const bool use_sector = params.n_sites >= 3 && params.n_sites % 2 == 1;
    const ChainSystem system(params, use_sector ? Sector::Symmetric : Sector::Full);
    const ChainSystem full(params, Sector::Full);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(omega_grid.size()),
                        static_cast<Eigen::Index>(delta_grid.size()));
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        for (std::size_t j = 0; j < delta_grid.size(); ++j) {
            const double omega = omega_grid[i];
            const double delta = delta_grid[j];
            if (!std::isfinite(omega) || !std::isfinite(delta))
                throw DomainError("phase_diagram: grid values must be finite");
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                ground_fraction(omega == 0.0 ? full : system, params, omega, delta);
        }
    }
    return out;
}

std::vector<MatrixElementColumn> operator_matrix_elements(const Eigen::VectorXd& a_diagonal,
                                                          const Eigensystem& eig,
                                                          std::span<const Eigen::Index> rows) {
    if (!eig.has_vectors()) throw DomainError("operator_matrix_elements: eigenvectors required");
    if (a_diagonal.size() != eig.vectors.rows())
        throw DomainError("operator_matrix_elements: observable dimension mismatch");
    std::vector<MatrixElementColumn> out;
    for (Eigen::Index i : rows) {
        if (i < 0 || i >= eig.size()) throw DomainError("operator_matrix_elements: index out of range");
        const Eigen::VectorXcd a_vi = a_diagonal.cast<cplx>().cwiseProduct(eig.vectors.col(i));
        const Eigen::VectorXcd col = eig.vectors.adjoint() * a_vi;
        out.push_back({i, eig.energies.array() - eig.energies[0], col.cwiseAbs2()});
    }
    return out;
}

std::vector<MatrixElementColumn> operator_matrix_elements(const OperatorMatrix& a,
                                                          const Eigensystem& eig,
                                                          std::span<const Eigen::Index> rows) {
    if (!eig.has_vectors()) throw DomainError("operator_matrix_elements: eigenvectors required");
    if (a.cols() != eig.vectors.rows())
        throw DomainError("operator_matrix_elements: operator dimension mismatch");
    std::vector<MatrixElementColumn> out;
    for (Eigen::Index i : rows) {
        if (i < 0 || i >= eig.size()) throw DomainError("operator_matrix_elements: index out of range");
        const Eigen::VectorXcd a_vi = a.entries() * eig.vectors.col(i);
        const Eigen::VectorXcd col = eig.vectors.adjoint() * a_vi;
        out.push_back({i, eig.energies.array() - eig.energies[0], col.cwiseAbs2()});
    }
    return out;
}

ClusterSummary cluster_levels(const Eigen::VectorXd& e, double cluster_gap) {
    ClusterSummary out;
    if (e.size() == 0) return out;
    out.n_clusters = 1;
    out.min_gap = std::numeric_limits<double>::infinity();
    double cluster_start = e[0];
    for (Eigen::Index i = 1; i <= e.size(); ++i) {
        const bool split = i == e.size() || e[i] - e[i - 1] > cluster_gap;
        if (!split) continue;
        out.max_spread = std::max(out.max_spread, e[i - 1] - cluster_start);
        if (i < e.size()) {
            out.min_gap = std::min(out.min_gap, e[i] - e[i - 1]);
            cluster_start = e[i];
            ++out.n_clusters;
        }
    }
    out.metric = out.n_clusters > 1 ? out.max_spread / out.min_gap
                                    : std::numeric_limits<double>::infinity();
    if (out.n_clusters == 1) out.min_gap = 0.0;
    return out;
}

std::vector<SectorSpectrumPoint> sector_spectrum_sweep(std::span<const double> omega_grid,
                                                       double delta, const ChainParams& params,
                                                       double cluster_gap) {
    const ChainSystem system(params, Sector::Symmetric);
    std::vector<SectorSpectrumPoint> out;
    out.reserve(omega_grid.size());
    for (double omega : omega_grid) {
        const Eigensystem eig = diagonalize(system, omega, delta, false);
        SectorSpectrumPoint point;
        point.omega = omega;
        point.delta = delta;
        point.energies = eig.energies;
        point.span = eig.energies[eig.size() - 1] - eig.energies[0];
        point.ground_gap = eig.size() > 1 ? eig.energies[1] - eig.energies[0] : 0.0;
        const ClusterSummary clusters = cluster_levels(eig.energies, cluster_gap);
        point.cluster_metric = clusters.metric;
        point.n_clusters = clusters.n_clusters;
        out.push_back(std::move(point));
    }
    return out;
}

EigenCache::EigenCache(std::optional<std::filesystem::path> directory)
    : directory_(std::move(directory)) {
    if (directory_) std::filesystem::create_directories(*directory_);
}

std::filesystem::path EigenCache::file_for(const EigenProvenance& key) const {
    std::string name = key.key();
    std::replace(name.begin(), name.end(), ',', '_');
    std::replace(name.begin(), name.end(), '=', '-');
    return directory_.value_or(".") / (name + ".eig");
}

std::shared_ptr<const Eigensystem> EigenCache::get(const EigenProvenance& key) {
    std::lock_guard lock(mutex_);
    const std::string k = key.key();
    if (auto it = entries_.find(k); it != entries_.end()) return it->second;

    auto eig = std::make_shared<Eigensystem>();
    const auto path = file_for(key);
    if (directory_ && std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        const Eigen::MatrixXcd energies = read_matrix(in);
        eig->energies = energies.col(0).real();
        eig->vectors = read_matrix(in);
        eig->provenance = key;
        eig->sector_coordinates = key.sector != Sector::Full;
    } else {
        const ChainParams params{key.n_sites, key.v_dd};
        if (key.sector == Sector::Full) {
            *eig = diagonalize_by_sector(params, key.omega, key.delta);
        } else {
            const ChainSystem system(params, key.sector);
            *eig = diagonalize(system, key.omega, key.delta, true);
        }
        eig->provenance = key;
        if (directory_) {
            std::ofstream out(path, std::ios::binary);
            write_matrix(out, eig->energies.cast<cplx>());
            write_matrix(out, eig->vectors);
        }
    }
    entries_.emplace(k, eig);
    return eig;
}

}  // namespace rydline
