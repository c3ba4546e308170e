#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rydline/errors.hpp"
#include "rydline/evolve.hpp"
#include "rydline/thermo.hpp"

using namespace rydline;

namespace {

StateVector random_state(Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    StateVector v(dim);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v.normalized();
}

Eigensystem chain_eig(int n, double omega, double delta) {
    return diagonalize(ChainSystem(ChainParams{n, 1.0}), omega, delta);
}

}  // namespace

TEST(DiagonalEnsemble, Basics) {
    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    const EnsembleWeights w3 = diagonal_ensemble(eig.vectors.col(3), eig);
    EXPECT_NEAR(w3.weights[3], 1.0, 1e-12);
    EXPECT_NEAR(w3.weights.sum(), 1.0, 1e-12);
    EXPECT_EQ(w3.kind, EnsembleKind::Diagonal);
    const StateVector mix = (eig.vectors.col(0) + eig.vectors.col(1)) / std::sqrt(2.0);
    const EnsembleWeights w = diagonal_ensemble(mix, eig);
    EXPECT_NEAR(w.weights[0], 0.5, 1e-12);
    EXPECT_NEAR(w.weights[1], 0.5, 1e-12);
    const EnsembleWeights r = diagonal_ensemble(random_state(32, 1), eig);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
    EXPECT_GE(r.weights.minCoeff(), 0.0);
}

TEST(DiagonalEnsemble, Errors) {
    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    EXPECT_THROW(diagonal_ensemble(2.0 * random_state(32, 2), eig), DomainError);
    EXPECT_THROW(diagonal_ensemble(random_state(8, 2), eig), DomainError);
    Eigensystem no_vectors = eig;
    no_vectors.vectors.resize(0, 0);
    EXPECT_THROW(diagonal_ensemble(random_state(32, 2), no_vectors), DomainError);
    Eigensystem partial = eig;
    partial.vectors = eig.vectors.leftCols(4);
    partial.energies = eig.energies.head(4);
    EXPECT_THROW(diagonal_ensemble(random_state(32, 2), partial), DomainError);
}

TEST(LongTime, IdentityAndEigenstates) {
    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    const EnsembleWeights w = diagonal_ensemble(random_state(32, 4), eig);
    EXPECT_NEAR(long_time_expectation(w, Eigen::VectorXd::Ones(32)), 1.0, 1e-12);
    const Eigen::VectorXd hint = interaction_energies(ChainParams{5, 1.0});
    const Eigen::VectorXd diag = eigenstate_expectations(hint, eig);
    EXPECT_NEAR(long_time_expectation(eig.vectors.col(5), hint, eig), diag[5], 1e-12);
    EXPECT_NEAR(long_time_expectation(diagonal_ensemble(eig.vectors.col(5), eig), diag), diag[5], 1e-12);
    EXPECT_LT((eigenstate_expectations(interaction_observable(ChainParams{5, 1.0}), eig) - diag).cwiseAbs().maxCoeff(),
              1e-12);
}

TEST(LongTime, MatchesBruteForceTimeAverage) {
    // Four-site instance with a non-degenerate spectrum; the time average of
    // <H_int(t)> over T = 1e4 is computed by direct propagation.
    const ChainParams p{4, 1.0};
    const ChainSystem sys(p);
    const double omega = 0.83, delta = 0.41;
    const Eigensystem eig = diagonalize(sys, omega, delta);
    double min_spacing = 1e9;
    for (Eigen::Index i = 1; i < eig.size(); ++i) min_spacing = std::min(min_spacing, eig.energies[i] - eig.energies[i - 1]);
    ASSERT_GT(min_spacing, 1e-3);

    const StateVector psi0 = random_state(16, 9);
    EvolutionConfig cfg;
    cfg.dt = 0.5;
    cfg.record_stride = 1;
    const Trajectory t = evolve(sys, psi0, constant_schedule(omega, delta, 1e4), nullptr, cfg);
    double avg = 0.0;
    for (std::size_t k = 1; k < t.records.size(); ++k) avg += t.records[k].h_int;
    avg /= static_cast<double>(t.records.size() - 1);
    EXPECT_NEAR(long_time_expectation(psi0, interaction_energies(p), eig), avg, 1e-3);
}

TEST(LongTime, DegenerateBlocksAreBasisIndependent) {
    // Omega = 0, delta = 1/8 on three sites: a four-fold degenerate ground level.
    const ChainParams p{3, 1.0};
    Eigensystem eig = chain_eig(3, 0.0, 0.125);
    const auto blocks = degenerate_blocks(eig);
    ASSERT_EQ(blocks.front().second - blocks.front().first, 4);
    const StateVector psi = random_state(8, 5);
    // A non-diagonal observable that mixes the degenerate block.
    const OperatorMatrix a = build_hamiltonian(p, 1.0, 0.0, 0.3);
    const double before = long_time_expectation(psi, a, eig);
    // Rotate the degenerate block by a random unitary.
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) m.data()[i] = {g(rng), g(rng)};
    const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(m).householderQ();
    eig.vectors.leftCols(4) = eig.vectors.leftCols(4) * q;
    EXPECT_NEAR(long_time_expectation(psi, a, eig), before, 1e-12);
}

TEST(Canonical, Limits) {
    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    const EnsembleWeights w0 = canonical_weights(0.0, eig);
    EXPECT_LT((w0.weights.array() - 1.0 / 32).abs().maxCoeff(), 1e-15);
    EXPECT_EQ(w0.kind, EnsembleKind::Canonical);
    EXPECT_NEAR(canonical_weights(1e3, eig).weights[0], 1.0, 1e-12);
    double prev = canonical_energy(-1.0, eig);
    for (double beta : {-0.5, 0.0, 0.3, 1.0, 3.0, 10.0}) {
        const double e = canonical_energy(beta, eig);
        EXPECT_LT(e, prev);
        prev = e;
    }
    EXPECT_THROW(canonical_weights(std::nan(""), eig), DomainError);
    const EnsembleWeights big = canonical_weights(1e6, eig);
    EXPECT_TRUE(big.weights.allFinite());
}

TEST(SolveBeta, RoundTripAndErrors) {
    const Eigensystem eig = chain_eig(7, 0.1, 1.1);
    const double e0 = eig.energies[0];
    const double mean = eig.energies.mean();
    EXPECT_EQ(solve_beta(mean, eig), 0.0);
    for (double frac : {0.001, 0.01, 0.1, 0.5, 0.9}) {
        const double target = e0 + frac * (mean - e0);
        EXPECT_NEAR(canonical_energy(solve_beta(target, eig), eig), target, 1e-8);
    }
    // Close to the ground level only the first excited level matters:
    // E - E0 ~ g * gap * exp(-beta * gap) with g its degeneracy.
    const double gap = eig.energies[1] - e0;
    const double b = solve_beta(e0 + 1e-9, eig);
    EXPECT_NEAR(b, std::log(gap / 1e-9) / gap, 0.02 * b);
    EXPECT_THROW(solve_beta(e0, eig), GroundStateEnergyError);
    EXPECT_THROW(solve_beta(e0 - 1.0, eig), GroundStateEnergyError);
    EXPECT_THROW(solve_beta(mean + 0.5, eig), NegativeTemperatureError);
}

TEST(Thermal, Expectations) {
    const Eigensystem single = diagonalize(ChainSystem(ChainParams{1, 1.0}), 0.4, 0.0);
    Eigen::VectorXd n(2);
    n << 0.0, 1.0;
    EXPECT_NEAR(thermal_expectation(0.0, eigenstate_expectations(n, single), single), 0.5, 1e-14);

    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    const double target = eig.energies[0] + 0.8;
    const double beta = solve_beta(target, eig);
    EXPECT_NEAR(thermal_expectation(beta, eig.energies, eig), target, 1e-8);
    EXPECT_THROW(thermal_expectation(beta, Eigen::VectorXd::Zero(3), eig), DomainError);
}

TEST(Eth, EnergyEntryMatchesByConstruction) {
    const ChainParams p{5, 1.0};
    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    const StateVector psi = (0.9 * eig.vectors.col(0) + 0.3 * eig.vectors.col(2) + 0.3 * eig.vectors.col(6)).normalized();
    const EthComparison c = eth_comparison(psi, {{"H_int", interaction_energies(p)}, {"O_Z2", z2_values(p)}}, eig);
    ASSERT_EQ(c.entries.size(), 3u);
    EXPECT_EQ(c.entries[0].observable, "H");
    EXPECT_LT(c.entries[0].difference, 1e-8);
    EXPECT_GT(c.beta, 0.0);
    EXPECT_NEAR(c.energy, 0.09 * (eig.energies[2] + eig.energies[6] - 2 * eig.energies[0]) / 0.99, 1e-10);
    for (const EthEntry& e : c.entries) EXPECT_NEAR(e.difference, std::abs(e.long_time - e.thermal), 1e-15);
}

TEST(Eth, SingleEigenstate) {
    const ChainParams p{5, 1.0};
    const Eigensystem eig = chain_eig(5, 0.6, 1.1);
    const Eigen::VectorXd hint = interaction_energies(p);
    const EthComparison c = eth_comparison(eig.vectors.col(4), {{"H_int", hint}}, eig);
    EXPECT_NEAR(c.entries[1].long_time, eigenstate_expectations(hint, eig)[4], 1e-12);
    EXPECT_NEAR(c.beta, solve_beta(eig.energies[4], eig), 1e-9);
}
