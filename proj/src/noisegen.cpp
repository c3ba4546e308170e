#include "rydline/noisegen.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "rydline/errors.hpp"

namespace rydline {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Inverse DFT without normalization: out[j] = sum_k in[k] exp(+2 pi i jk / n).
std::vector<std::complex<double>> inverse_dft(const std::vector<std::complex<double>>& in) {
    const int n = static_cast<int>(in.size());
    std::vector<std::complex<double>> src(in);
    std::vector<std::complex<double>> out(in.size());
    auto* src_ptr = reinterpret_cast<fftw_complex*>(src.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n, src_ptr, out_ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

// S(|nu_k|) for every bin of the double-sided grid.
std::vector<double> double_sided_density(const PhaseSpectrum& s_phi, const BinLayout& layout) {
    std::vector<double> dens(layout.n_bins, 0.0);
    const auto& v = s_phi.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t k = layout.first_bin + i;
        dens[k] = v[i];
        if (k != layout.n_bins / 2) dens[layout.n_bins - k] = v[i];
    }
    return dens;
}

}  // namespace

BinLayout bin_layout(const PhaseSpectrum& s_phi) {
    BinLayout layout;
    layout.dnu = s_phi.grid_spacing();
    const double first = std::round(s_phi.freqs().front() / layout.dnu);
    layout.first_bin = static_cast<std::size_t>(std::max(1.0, first));
    const std::size_t nyquist_bin = layout.first_bin + s_phi.size() - 1;
    layout.n_bins = 2 * nyquist_bin;
    layout.dt = 1.0 / (static_cast<double>(layout.n_bins) * layout.dnu);
    return layout;
}

SampledSpectrum sample_spectrum(const PhaseSpectrum& s_phi, std::uint64_t seed) {
    const BinLayout layout = bin_layout(s_phi);
    SampledSpectrum out;
    out.bins.assign(layout.n_bins, {0.0, 0.0});
    out.dnu = layout.dnu;
    out.seed = seed;

    std::mt19937_64 engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t nyquist = layout.n_bins / 2;
    const auto& v = s_phi.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t k = layout.first_bin + i;
        if (k == nyquist) {
            out.bins[k] = {gauss(engine) * std::sqrt(v[i]), 0.0};
            continue;
        }
        const double amp = std::sqrt(v[i] / 2.0);
        const double re = gauss(engine) * amp;
        const double im = gauss(engine) * amp;
        out.bins[k] = {re, im};
        out.bins[layout.n_bins - k] = {re, -im};
    }
    return out;
}

PhaseSignal synthesize_signal(const SampledSpectrum& sampled) {
    const std::size_t n = sampled.n_bins();
    if (n < 2 || n % 2 != 0) throw SymmetryError("synthesize_signal: bin count must be even");
    if (sampled.bins[0].imag() != 0.0 || sampled.bins[n / 2].imag() != 0.0)
        throw SymmetryError("synthesize_signal: DC and Nyquist bins must be real");
    for (std::size_t k = 1; k < n / 2; ++k) {
        if (sampled.bins[n - k] != std::conj(sampled.bins[k]))
            throw SymmetryError("synthesize_signal: bins are not conjugate symmetric");
    }

    const auto raw = inverse_dft(sampled.bins);
    const double prefactor = std::sqrt(2.0 * sampled.dnu) / (2.0 * std::numbers::pi);

    PhaseSignal out;
    out.dt = 1.0 / (static_cast<double>(n) * sampled.dnu);
    out.seed = sampled.seed;
    out.samples.resize(n);
    double sum_sq = 0.0;
    double max_imag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.samples[j] = prefactor * raw[j].real();
        sum_sq += out.samples[j] * out.samples[j];
        max_imag = std::max(max_imag, std::abs(prefactor * raw[j].imag()));
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(n));
    if (max_imag > 1e-10 * rms)
        throw SymmetryError("synthesize_signal: imaginary residue exceeds tolerance");
    return out;
}

PhaseSignal generate_signal(const PhaseSpectrum& s_phi, std::uint64_t seed) {
    return synthesize_signal(sample_spectrum(s_phi, seed));
}

std::vector<double> analytic_autocorrelation(const PhaseSpectrum& s_phi,
                                             std::span<const double> lags,
                                             bool normalized) {
    const BinLayout layout = bin_layout(s_phi);
    const double duration = 1.0 / layout.dnu;
    const auto dens = double_sided_density(s_phi, layout);
    const double prefactor = 2.0 * layout.dnu / (4.0 * std::numbers::pi * std::numbers::pi);

    auto evaluate = [&](double tau) {
        double sum = 0.0;
        const auto n = static_cast<long>(layout.n_bins);
        for (long k = 0; k < n; ++k) {
            if (dens[k] == 0.0) continue;
            const long signed_k = k <= n / 2 ? k : k - n;
            const double nu = static_cast<double>(signed_k) * layout.dnu;
            sum += dens[k] * std::cos(2.0 * std::numbers::pi * nu * tau);
        }
        return prefactor * sum;
    };

    const double at_zero = evaluate(0.0);
    std::vector<double> out;
    out.reserve(lags.size());
    for (double tau : lags) {
        if (!(tau >= 0.0) || tau > duration)
            throw DomainError("analytic_autocorrelation: lag outside the signal duration");
        double value = evaluate(tau);
        if (normalized) value = at_zero > 0.0 ? value / at_zero : 0.0;
        out.push_back(value);
    }
    return out;
}

double empirical_autocorrelation(const PhaseSignal& phi, double tau) {
    const std::size_t n = phi.samples.size();
    if (!(tau >= 0.0) || tau >= phi.duration())
        throw DomainError("empirical_autocorrelation: lag outside the signal duration");
    const auto m = static_cast<std::size_t>(std::llround(tau / phi.dt));
    if (m >= n) throw DomainError("empirical_autocorrelation: lag outside the signal duration");
    const std::size_t len = n - m;
    if (len < 2) throw DegenerateSignalError("empirical_autocorrelation: overlap too short");

    const double* x = phi.samples.data();
    const double* y = phi.samples.data() + m;
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(len);
    mean_y /= static_cast<double>(len);
    double cov = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0)
        throw DegenerateSignalError("empirical_autocorrelation: zero-variance signal");
    if (m == 0) return 1.0;
    return cov / std::sqrt(var_x * var_y);
}

PhaseSignal scale_signal(const PhaseSignal& phi, double factor) {
    PhaseSignal out = phi;
    for (double& s : out.samples) s *= factor;
    return out;
}

PhaseSignal signal_derivative(const PhaseSignal& phi) {
    const std::size_t n = phi.samples.size();
    if (n < 3) throw DomainError("signal_derivative: at least three samples are required");
    const auto& s = phi.samples;
    const double h = phi.dt;
    PhaseSignal out;
    out.dt = phi.dt;
    out.seed = phi.seed;
    out.samples.resize(n);
    out.samples[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h);
    for (std::size_t j = 1; j + 1 < n; ++j) out.samples[j] = (s[j + 1] - s[j - 1]) / (2.0 * h);
    out.samples[n - 1] = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) / (2.0 * h);
    return out;
}

namespace {

// Segment index and fractional position for time t, clamped to the last
// segment so that t == duration of the final sample stays valid.
std::pair<std::size_t, double> locate(const PhaseSignal& phi, double t) {
    const std::size_t n = phi.samples.size();
    if (n < 2) throw DomainError("phase signal: at least two samples are required");
    if (t < 0.0 || t > static_cast<double>(n - 1) * phi.dt * (1.0 + 1e-12))
        throw CoverageError("phase signal: time outside the sampled range");
    const double x = t / phi.dt;
    auto j = static_cast<std::size_t>(std::floor(x));
    if (j >= n - 1) j = n - 2;
    return {j, x - static_cast<double>(j)};
}

}  // namespace

double interpolate_phase(const PhaseSignal& phi, double t) {
    const auto [j, frac] = locate(phi, t);
    return phi.samples[j] + frac * (phi.samples[j + 1] - phi.samples[j]);
}

double phase_slope(const PhaseSignal& phi, double t) {
    const auto [j, frac] = locate(phi, t);
    (void)frac;
    return (phi.samples[j + 1] - phi.samples[j]) / phi.dt;
}

}  // namespace rydline
