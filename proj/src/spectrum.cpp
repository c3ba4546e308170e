#include "rydline/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "rydline/errors.hpp"

namespace rydline {

template <class Tag>
UniformSpectrum<Tag>::UniformSpectrum(std::vector<double> freqs, std::vector<double> values)
    : freqs_(std::move(freqs)), values_(std::move(values)) {
    if (freqs_.size() != values_.size())
        throw FormatError("spectrum: frequency and value columns differ in length");
    if (freqs_.size() < 2)
        throw FormatError("spectrum: at least two bins are required");

    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0.0;
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        if (!std::isfinite(freqs_[i]) || freqs_[i] <= 0.0)
            throw GridError("spectrum: frequencies must be finite and positive");
        if (i > 0) {
            const double step = freqs_[i] - freqs_[i - 1];
            if (step <= 0.0) throw GridError("spectrum: frequencies must be strictly increasing");
            min_step = std::min(min_step, step);
            max_step = std::max(max_step, step);
        }
    }
    if (max_step / min_step - 1.0 > kGridUniformityTolerance) {
        std::ostringstream msg;
        msg << "spectrum: non-uniform grid (spacing ratio " << std::setprecision(12)
            << max_step / min_step << ")";
        throw GridError(msg.str());
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("spectrum: density values must be finite");
        if (v < 0.0) throw DomainError("spectrum: density values must be non-negative");
    }
    spacing_ = (freqs_.back() - freqs_.front()) / static_cast<double>(freqs_.size() - 1);
}

template class UniformSpectrum<FrequencyNoiseTag>;
template class UniformSpectrum<PhaseNoiseTag>;

namespace {

std::pair<std::vector<double>, std::vector<double>> parse_columns(std::string_view text) {
    std::vector<double> freqs;
    std::vector<double> values;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double f = 0.0;
        double v = 0.0;
        if (!(fields >> f >> v))
            throw FormatError("spectrum: line " + std::to_string(line_no) +
                              " does not hold two numeric columns");
        freqs.push_back(f);
        values.push_back(v);
    }
    if (freqs.size() < 2) throw FormatError("spectrum: at least two rows are required");
    return {std::move(freqs), std::move(values)};
}

}  // namespace

AnySpectrum load_spectrum(std::string_view text, SpectrumKind kind) {
    auto [freqs, values] = parse_columns(text);
    if (kind == SpectrumKind::Frequency)
        return FrequencySpectrum(std::move(freqs), std::move(values));
    return PhaseSpectrum(std::move(freqs), std::move(values));
}

PhaseSpectrum load_phase_spectrum(std::string_view text) {
    return std::get<PhaseSpectrum>(load_spectrum(text, SpectrumKind::Phase));
}

AnySpectrum read_spectrum_file(const std::filesystem::path& path, SpectrumKind kind) {
    std::ifstream in(path);
    if (!in) throw FormatError("spectrum: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_spectrum(buf.str(), kind);
}

template <class Tag>
void write_spectrum(std::ostream& out, const UniformSpectrum<Tag>& spectrum) {
    out << std::setprecision(17);
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        out << spectrum.freqs()[i] << ' ' << spectrum.values()[i] << '\n';
}

template void write_spectrum(std::ostream&, const FrequencySpectrum&);
template void write_spectrum(std::ostream&, const PhaseSpectrum&);

PhaseSpectrum frequency_to_phase(const FrequencySpectrum& s_nu) {
    std::vector<double> values(s_nu.size());
    for (std::size_t i = 0; i < s_nu.size(); ++i) {
        const double f = s_nu.freqs()[i];
        if (f == 0.0) throw DomainError("frequency_to_phase: zero-frequency bin");
        values[i] = s_nu.values()[i] / (f * f);
    }
    return PhaseSpectrum(s_nu.freqs(), std::move(values));
}

FrequencySpectrum phase_to_frequency(const PhaseSpectrum& s_phi) {
    std::vector<double> values(s_phi.size());
    for (std::size_t i = 0; i < s_phi.size(); ++i) {
        const double f = s_phi.freqs()[i];
        values[i] = s_phi.values()[i] * (f * f);
    }
    return FrequencySpectrum(s_phi.freqs(), std::move(values));
}

template <class Tag>
double total_power(const UniformSpectrum<Tag>& spectrum) {
    double sum = 0.0;
    for (double v : spectrum.values()) sum += v;
    return sum * spectrum.grid_spacing();
}

template double total_power(const FrequencySpectrum&);
template double total_power(const PhaseSpectrum&);

PhaseSpectrum rescale_frequency_grid(const PhaseSpectrum& s_phi, double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw DomainError("rescale_frequency_grid: kappa must be positive and finite");
    if (kappa == 1.0) return s_phi;

    std::vector<double> freqs(s_phi.size());
    std::transform(s_phi.freqs().begin(), s_phi.freqs().end(), freqs.begin(),
                   [kappa](double f) { return kappa * f; });
    PhaseSpectrum stretched(std::move(freqs), s_phi.values());

    const double target = total_power(s_phi);
    const double current = total_power(stretched);
    if (current == 0.0) return stretched;
    const double scale = target / current;
    std::vector<double> values(s_phi.size());
    std::transform(s_phi.values().begin(), s_phi.values().end(), values.begin(),
                   [scale](double v) { return v * scale; });
    return PhaseSpectrum(stretched.freqs(), std::move(values));
}

PhaseSpectrum synthesize_default_spectrum(const SurrogateSpectrumParams& p) {
    if (!(p.floor > 0.0) || !(p.bump_center > 0.0) || !(p.bump_width > 0.0) ||
        !(p.bump_height >= 0.0) || !(p.grid_spacing > 0.0) || !(p.f_min > 0.0))
        throw DomainError("synthesize_default_spectrum: parameters must be positive");
    if (p.f_min > 0.01 || p.f_max < 2.0)
        throw DomainError("synthesize_default_spectrum: grid must cover [0.01, 2] MHz");
    if (p.bump_center < p.f_min || p.bump_center > p.f_max)
        throw DomainError("synthesize_default_spectrum: bump center outside the grid");

    // Grid points are integer multiples of the spacing so that they line up
    // with the bins of the synthesized signal.
    const auto k_first = static_cast<long>(std::ceil(p.f_min / p.grid_spacing - 1e-9));
    const auto k_last = static_cast<long>(std::floor(p.f_max / p.grid_spacing + 1e-9));
    std::vector<double> freqs;
    std::vector<double> s_nu;
    for (long k = std::max(1L, k_first); k <= k_last; ++k) {
        const double f = static_cast<double>(k) * p.grid_spacing;
        const double z = (f - p.bump_center) / p.bump_width;
        freqs.push_back(f);
        // The bump carries a nu^2 factor in frequency noise so that it is a
        // plain Gaussian in phase noise.
        s_nu.push_back(p.floor + p.bump_height * f * f * std::exp(-0.5 * z * z));
    }
    return frequency_to_phase(FrequencySpectrum(std::move(freqs), std::move(s_nu)));
}

}  // namespace rydline
