#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "rydline/spectrum.hpp"

namespace rydline {

// Double-sided random spectrum drawn from a one-sided phase PSD. Bin k holds
// frequency k * dnu for k <= n/2 and (k - n) * dnu above; bin n - k is the
// complex conjugate of bin k. Bin 0 (DC) is zero and bin n/2 (Nyquist, the
// highest frequency of the source grid) is real.
struct SampledSpectrum {
    std::vector<std::complex<double>> bins;
    double dnu = 0.0;  // MHz
    std::uint64_t seed = 0;

    std::size_t n_bins() const { return bins.size(); }
};

// Uniformly sampled phase phi(t_j), t_j = j * dt, in radians; dt in us.
struct PhaseSignal {
    std::vector<double> samples;
    double dt = 0.0;
    std::uint64_t seed = 0;

    double duration() const { return dt * static_cast<double>(samples.size()); }
};

// Index layout of a spectrum grid inside the synthesized signal.
struct BinLayout {
    std::size_t first_bin = 0;  // DFT index of freqs()[0]
    std::size_t n_bins = 0;     // total bins, even; Nyquist index n_bins / 2
    double dnu = 0.0;
    double dt = 0.0;            // 1 / (n_bins * dnu)
};

BinLayout bin_layout(const PhaseSpectrum& s_phi);

// Each positive-frequency bin is N(0,1) sqrt(S/2) + i N(0,1) sqrt(S/2); the
// real Nyquist bin is N(0,1) sqrt(S). Deterministic for a given seed.
SampledSpectrum sample_spectrum(const PhaseSpectrum& s_phi, std::uint64_t seed);

// phi_j = sqrt(2 dnu) / (2 pi) * sum_k S_k exp(2 pi i k j / n).
// Throws SymmetryError when the bins are not conjugate symmetric.
PhaseSignal synthesize_signal(const SampledSpectrum& sampled);

PhaseSignal generate_signal(const PhaseSpectrum& s_phi, std::uint64_t seed);

// Riemann-sum covariance of the synthesized process at each lag (us):
//   C(tau) = 2 dnu / (2 pi)^2 * sum_k S(|nu_k|) cos(2 pi nu_k tau)
// over the double-sided bin grid. C(0) is the ensemble variance of phi.
// With `normalized`, every value is divided by C(0).
// Throws DomainError for lags outside [0, duration].
std::vector<double> analytic_autocorrelation(const PhaseSpectrum& s_phi,
                                             std::span<const double> lags,
                                             bool normalized = true);

// Pearson correlation between phi[0, n - m) and phi[m, n) with m = round(tau / dt).
// Throws DegenerateSignalError when either window has zero variance.
double empirical_autocorrelation(const PhaseSignal& phi, double tau);

PhaseSignal scale_signal(const PhaseSignal& phi, double factor);

// d phi / dt in rad/us. Central differences inside, second-order one-sided at
// the ends. Throws DomainError below three samples.
PhaseSignal signal_derivative(const PhaseSignal& phi);

// Piecewise-linear reading of the samples. `phase_slope` is the slope of the
// segment containing t, which is the exact derivative of `interpolate_phase`
// away from the sample instants.
double interpolate_phase(const PhaseSignal& phi, double t);
double phase_slope(const PhaseSignal& phi, double t);

}  // namespace rydline
