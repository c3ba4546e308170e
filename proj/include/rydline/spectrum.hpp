#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <variant>
#include <vector>

namespace rydline {

// Noise power spectral densities on a uniform, strictly positive frequency
// grid. Frequencies are ordinary MHz. The density unit depends on the kind:
// frequency noise S_nu is MHz^2/MHz, phase noise S_phi is rad^2/MHz.

struct FrequencyNoiseTag {};
struct PhaseNoiseTag {};

enum class SpectrumKind { Frequency, Phase };

template <class Tag>
class UniformSpectrum {
public:
    // Throws FormatError (< 2 bins), GridError (non-positive, non-increasing
    // or non-uniform frequencies), DomainError (negative or non-finite values).
    UniformSpectrum(std::vector<double> freqs, std::vector<double> values);

    const std::vector<double>& freqs() const { return freqs_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return freqs_.size(); }
    double grid_spacing() const { return spacing_; }
    // Highest frequency on the grid; sample_spectrum places it at the
    // Nyquist bin of the synthesized signal.
    double nyquist() const { return freqs_.back(); }

private:
    std::vector<double> freqs_;
    std::vector<double> values_;
    double spacing_ = 0.0;
};

using FrequencySpectrum = UniformSpectrum<FrequencyNoiseTag>;
using PhaseSpectrum = UniformSpectrum<PhaseNoiseTag>;
using AnySpectrum = std::variant<FrequencySpectrum, PhaseSpectrum>;

extern template class UniformSpectrum<FrequencyNoiseTag>;
extern template class UniformSpectrum<PhaseNoiseTag>;

// Relative tolerance on the ratio max/min of consecutive spacings.
inline constexpr double kGridUniformityTolerance = 1e-9;

// Two-column text: whitespace or comma separated, '#' comment lines and blank
// lines ignored.
AnySpectrum load_spectrum(std::string_view text, SpectrumKind kind);
AnySpectrum read_spectrum_file(const std::filesystem::path& path, SpectrumKind kind);
PhaseSpectrum load_phase_spectrum(std::string_view text);

template <class Tag>
void write_spectrum(std::ostream& out, const UniformSpectrum<Tag>& spectrum);

// S_phi(nu) = S_nu(nu) / nu^2.
PhaseSpectrum frequency_to_phase(const FrequencySpectrum& s_nu);
FrequencySpectrum phase_to_frequency(const PhaseSpectrum& s_phi);

// Multiplies the frequency grid by kappa and renormalizes the density by a
// single constant so that total_power is unchanged. kappa == 1 is returned
// unchanged bin for bin.
PhaseSpectrum rescale_frequency_grid(const PhaseSpectrum& s_phi, double kappa);

// Left-endpoint Riemann sum, sum_i values[i] * grid_spacing.
template <class Tag>
double total_power(const UniformSpectrum<Tag>& spectrum);

// Surrogate diode-laser spectrum: a white frequency-noise floor (which becomes
// floor/nu^2 in phase noise) plus one servo bump whose phase-noise maximum
// sits at `bump_center`.
struct SurrogateSpectrumParams {
    double floor = 2e-4;        // S_nu floor, MHz^2/MHz
    double bump_center = 0.48;  // MHz (3 V_dd / 2 pi for V_dd = 1 rad/us)
    double bump_width = 0.04;   // MHz, Gaussian standard deviation
    double bump_height = 2e-3;  // S_phi at the bump center, rad^2/MHz
    double grid_spacing = 1e-3; // MHz
    double f_min = 0.01;        // MHz
    double f_max = 2.0;         // MHz
};

PhaseSpectrum synthesize_default_spectrum(const SurrogateSpectrumParams& params = {});

}  // namespace rydline
