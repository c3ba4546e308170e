#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rydline/analysis.hpp"
#include "rydline/binary_io.hpp"
#include "rydline/errors.hpp"
#include "rydline/lab.hpp"
#include "rydline/noisegen.hpp"
#include "rydline/seeds.hpp"
#include "rydline/spectrum.hpp"
#include "rydline/thermo.hpp"

using namespace rydline;

namespace {

// "a:b:n" is n evenly spaced values from a to b; anything else is a comma list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (std::count(text.begin(), text.end(), ':') == 2) {
        double a = 0, b = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> a >> c1 >> b >> c2 >> n) || n < 1) throw ConfigError("bad grid '" + text + "'");
        for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        return out;
    }
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad grid value '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty grid");
    return out;
}

SpectrumKind kind_from_string(const std::string& s) {
    if (s == "phase") return SpectrumKind::Phase;
    if (s == "frequency") return SpectrumKind::Frequency;
    throw ConfigError("unknown spectrum kind '" + s + "'");
}

PhaseSpectrum as_phase(const AnySpectrum& s) {
    if (auto* p = std::get_if<PhaseSpectrum>(&s)) return *p;
    return frequency_to_phase(std::get<FrequencySpectrum>(s));
}

Eigen::VectorXd named_diagonal(const ChainParams& params, const std::string& name) {
    if (name == "hint" || name == "H_int") return interaction_energies(params);
    if (name == "z2" || name == "O_Z2") return z2_values(params);
    if (name == "n") return excitation_counts(params);
    throw ConfigError("unknown observable '" + name + "'");
}

struct Output {
    std::ofstream file;
    std::ostream* stream = &std::cout;
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw Error("cannot write " + path);
        stream = &file;
    }
    std::ostream& operator*() { return *stream; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy Rydberg chain simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rydline " RYDLINE_VERSION);

    // spectrum convert|rescale|power
    auto* spec = app.add_subcommand("spectrum", "Spectrum file utilities");
    spec->require_subcommand(1);
    std::string spec_in, spec_kind = "phase", spec_out;
    double kappa = 1.0;
    auto add_spec_opts = [&](CLI::App* sub) {
        sub->add_option("--in", spec_in, "Two-column spectrum file")->required();
        sub->add_option("--kind", spec_kind, "phase or frequency")->check(CLI::IsMember({"phase", "frequency"}));
        sub->add_option("--out", spec_out, "Output file (default stdout)");
    };
    auto* spec_convert = spec->add_subcommand("convert", "Convert between phase and frequency PSDs");
    add_spec_opts(spec_convert);
    auto* spec_rescale = spec->add_subcommand("rescale", "Stretch the frequency grid at fixed total power");
    add_spec_opts(spec_rescale);
    spec_rescale->add_option("--kappa", kappa, "Grid scale factor")->required();
    auto* spec_power = spec->add_subcommand("power", "Print the total power (Riemann sum)");
    add_spec_opts(spec_power);
    auto* spec_synth = spec->add_subcommand("surrogate", "Write the built-in surrogate phase PSD");
    SurrogateSpectrumParams surrogate;
    spec_synth->add_option("--out", spec_out, "Output file (default stdout)");
    spec_synth->add_option("--floor", surrogate.floor, "White frequency-noise floor, MHz^2/MHz");
    spec_synth->add_option("--bump-center", surrogate.bump_center, "MHz");
    spec_synth->add_option("--bump-width", surrogate.bump_width, "MHz");
    spec_synth->add_option("--bump-height", surrogate.bump_height, "rad^2/MHz");

    // gen-noise
    auto* gen = app.add_subcommand("gen-noise", "Synthesize phase-noise realizations");
    std::string gen_spectrum, gen_kind = "phase", gen_out;
    std::uint64_t gen_seed = 1;
    int gen_m = 1;
    gen->add_option("--spectrum", gen_spectrum, "Spectrum file")->required();
    gen->add_option("--kind", gen_kind, "phase or frequency")->check(CLI::IsMember({"phase", "frequency"}));
    gen->add_option("--seed", gen_seed, "Master seed")->required();
    gen->add_option("--realizations", gen_m, "Number of realizations")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Output directory")->required();

    // ED verbs
    int n_sites = 11;
    double v_dd = 1.0, omega = 1.0, delta = 1.1;
    std::string omega_grid = "0.1:1.0:10", delta_grid = "1.1", out_path, sector_name = "full";
    double cluster_gap = 0.1;

    auto* scan = app.add_subcommand("spectrum-scan", "Symmetric-sector spectra along an omega sweep");
    scan->add_option("-N,--n-sites", n_sites, "Chain length");
    scan->add_option("--vdd", v_dd, "V_dd, rad/us");
    scan->add_option("--omega", omega_grid, "Omega/V_dd grid, a:b:n or a,b,c");
    scan->add_option("--delta", delta, "delta/V_dd");
    scan->add_option("--cluster-gap", cluster_gap, "Level spacing that splits clusters, in V_dd");
    scan->add_option("--out", out_path, "CSV output (default stdout)");
    std::string summary_path;
    scan->add_option("--summary", summary_path, "Per-omega summary CSV");

    auto* gaps = app.add_subcommand("gap-sweep", "Ground gap along an omega sweep");
    gaps->add_option("-N,--n-sites", n_sites, "Chain length");
    gaps->add_option("--vdd", v_dd, "V_dd, rad/us");
    gaps->add_option("--omega", omega_grid, "Omega/V_dd grid");
    gaps->add_option("--delta", delta, "delta/V_dd");
    gaps->add_option("--sector", sector_name, "full, symmetric or antisymmetric");
    gaps->add_option("--out", out_path, "CSV output (default stdout)");

    auto* elements = app.add_subcommand("matrix-elements", "|<E_j|A|E_i>|^2 against E_j - E_0");
    std::string observable = "n", sources = "0";
    elements->add_option("-N,--n-sites", n_sites, "Chain length");
    elements->add_option("--vdd", v_dd, "V_dd, rad/us");
    elements->add_option("--omega", omega, "Omega/V_dd");
    elements->add_option("--delta", delta, "delta/V_dd");
    elements->add_option("--observable", observable, "n, hint or z2");
    elements->add_option("--rows", sources, "Comma-separated source eigenstate indices");
    elements->add_option("--out", out_path, "CSV output (default stdout)");

    auto* phases = app.add_subcommand("phase-diagram", "Ground-state N_R/N on an (omega, delta) grid");
    phases->add_option("-N,--n-sites", n_sites, "Chain length");
    phases->add_option("--vdd", v_dd, "V_dd, rad/us");
    phases->add_option("--omega", omega_grid, "Omega/V_dd grid");
    phases->add_option("--delta", delta_grid, "delta/V_dd grid");
    phases->add_option("--out", out_path, "CSV output (default stdout)");

    auto* thermo = app.add_subcommand("thermo", "Long-time versus canonical expectations of a state");
    std::string state_path, observables = "hint,z2", eig_key, cache_dir;
    thermo->add_option("--state", state_path, "Binary state file (full basis)")->required();
    thermo->add_option("--observables", observables, "Comma list of hint, z2, n");
    thermo->add_option("--eig", eig_key, "Eigensystem key, e.g. N=11,omega=0.1,delta=1.1,vdd=1,sector=full")
        ->required();
    thermo->add_option("--cache-dir", cache_dir, "Directory of cached eigensystems");

    // Campaigns
    std::string config_path, campaign_out;
    bool fast = false, quiet = false;
    int threads = 0;
    std::vector<CLI::App*> campaigns;
    for (const char* verb : {"ramp", "scale-sweep", "quench", "thermo-sweep"}) {
        auto* sub = app.add_subcommand(verb, std::string("Run a ") + verb + " campaign");
        sub->add_option("--config", config_path, "JSON campaign config")->required()->check(CLI::ExistingFile);
        sub->add_flag("--fast", fast, "Use fast_realizations");
        sub->add_option("--out", campaign_out, "Output directory (overrides the config)");
        sub->add_option("--threads", threads, "Worker threads (0: hardware)");
        sub->add_flag("-q,--quiet", quiet, "No progress output");
        campaigns.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (spec->parsed()) {
            if (spec_synth->parsed()) {
                Output out(spec_out);
                write_spectrum(*out, synthesize_default_spectrum(surrogate));
                return 0;
            }
            const SpectrumKind kind = kind_from_string(spec_kind);
            const AnySpectrum s = read_spectrum_file(spec_in, kind);
            if (spec_power->parsed()) {
                const double p = std::visit([](const auto& x) { return total_power(x); }, s);
                std::cout << std::setprecision(12) << p << '\n';
                return 0;
            }
            Output out(spec_out);
            if (spec_convert->parsed()) {
                if (kind == SpectrumKind::Phase)
                    write_spectrum(*out, phase_to_frequency(std::get<PhaseSpectrum>(s)));
                else
                    write_spectrum(*out, frequency_to_phase(std::get<FrequencySpectrum>(s)));
            } else {
                const PhaseSpectrum r = rescale_frequency_grid(as_phase(s), kappa);
                if (kind == SpectrumKind::Phase)
                    write_spectrum(*out, r);
                else
                    write_spectrum(*out, phase_to_frequency(r));
            }
            return 0;
        }

        if (gen->parsed()) {
            const PhaseSpectrum s = as_phase(read_spectrum_file(gen_spectrum, kind_from_string(gen_kind)));
            const BinLayout layout = bin_layout(s);
            std::filesystem::create_directories(gen_out);
            nlohmann::json manifest;
            manifest["seed"] = gen_seed;
            manifest["dnu_mhz"] = layout.dnu;
            manifest["n_samples"] = layout.n_bins;
            manifest["dt_us"] = layout.dt;
            manifest["total_power_rad2"] = total_power(s);
            manifest["realizations"] = nlohmann::json::array();
            for (int r = 0; r < gen_m; ++r) {
                const std::uint64_t seed = derive_seed(gen_seed, 0, static_cast<std::uint64_t>(r));
                const PhaseSignal phi = generate_signal(s, seed);
                const std::string name = "phi_" + std::to_string(r) + ".csv";
                std::ofstream f(std::filesystem::path(gen_out) / name);
                f << "t_us,phi_rad\n" << std::setprecision(15);
                for (std::size_t j = 0; j < phi.samples.size(); ++j)
                    f << phi.dt * static_cast<double>(j) << ',' << phi.samples[j] << '\n';
                manifest["realizations"].push_back({{"file", name}, {"seed", seed}});
            }
            std::ofstream(std::filesystem::path(gen_out) / "manifest.json") << manifest.dump(2) << '\n';
            return 0;
        }

        if (scan->parsed()) {
            const ChainParams params = ChainParams::odd_chain(n_sites, v_dd);
            std::vector<double> grid = parse_grid(omega_grid);
            for (double& w : grid) w *= v_dd;
            const auto points = sector_spectrum_sweep(grid, delta * v_dd, params, cluster_gap * v_dd);
            Output out(out_path);
            *out << "omega,delta,level,energy\n" << std::setprecision(12);
            for (const auto& p : points)
                for (Eigen::Index i = 0; i < p.energies.size(); ++i)
                    *out << p.omega << ',' << p.delta << ',' << i << ',' << p.energies[i] << '\n';
            if (!summary_path.empty()) {
                std::ofstream sum(summary_path);
                sum << "omega,delta,span,ground_gap,cluster_metric,n_clusters\n" << std::setprecision(12);
                for (const auto& p : points)
                    sum << p.omega << ',' << p.delta << ',' << p.span << ',' << p.ground_gap << ','
                        << p.cluster_metric << ',' << p.n_clusters << '\n';
            }
            return 0;
        }

        if (gaps->parsed()) {
            const ChainParams params = ChainParams::odd_chain(n_sites, v_dd);
            const Sector sector = sector_from_string(sector_name);
            Output out(out_path);
            *out << "omega,delta,gap,degenerate\n" << std::setprecision(12);
            for (double w : parse_grid(omega_grid)) {
                const GapResult g = ground_gap(params, w * v_dd, delta * v_dd, sector);
                *out << w * v_dd << ',' << delta * v_dd << ',' << g.gap << ',' << (g.degenerate ? 1 : 0) << '\n';
            }
            return 0;
        }

        if (elements->parsed()) {
            const ChainParams params = ChainParams::odd_chain(n_sites, v_dd);
            const Eigensystem eig = diagonalize_by_sector(params, omega * v_dd, delta * v_dd);
            std::vector<Eigen::Index> rows;
            for (double r : parse_grid(sources)) rows.push_back(static_cast<Eigen::Index>(r));
            const auto cols = operator_matrix_elements(named_diagonal(params, observable), eig, rows);
            Output out(out_path);
            *out << "omega,delta,source,target,relative_energy,squared_element\n" << std::setprecision(12);
            for (const auto& c : cols)
                for (Eigen::Index j = 0; j < c.relative_energy.size(); ++j)
                    *out << omega * v_dd << ',' << delta * v_dd << ',' << c.source << ',' << j << ','
                         << c.relative_energy[j] << ',' << c.squared_elements[j] << '\n';
            return 0;
        }

        if (phases->parsed()) {
            const ChainParams params = ChainParams::odd_chain(n_sites, v_dd);
            std::vector<double> ws = parse_grid(omega_grid), ds = parse_grid(delta_grid);
            for (double& w : ws) w *= v_dd;
            for (double& d : ds) d *= v_dd;
            const Eigen::MatrixXd frac = phase_diagram(ws, ds, params);
            Output out(out_path);
            *out << "omega,delta,fraction\n" << std::setprecision(12);
            for (std::size_t i = 0; i < ws.size(); ++i)
                for (std::size_t j = 0; j < ds.size(); ++j)
                    *out << ws[i] << ',' << ds[j] << ',' << frac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
                         << '\n';
            return 0;
        }

        if (thermo->parsed()) {
            const EigenProvenance key = EigenProvenance::parse_key(eig_key);
            if (key.sector != Sector::Full) throw ConfigError("thermo needs a full-sector eigensystem");
            EigenCache cache(cache_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(cache_dir));
            const auto eig = cache.get(key);
            const StateVector psi = load_state(state_path);
            const ChainParams params{key.n_sites, key.v_dd};
            std::vector<NamedObservable> obs;
            std::stringstream list(observables);
            std::string name;
            while (std::getline(list, name, ',')) obs.push_back({name, named_diagonal(params, name)});
            const EthComparison cmp = eth_comparison(psi, obs, *eig);
            nlohmann::json out;
            out["eigensystem"] = key.key();
            out["beta"] = cmp.beta;
            out["energy"] = cmp.energy;
            for (const EthEntry& e : cmp.entries)
                out["observables"][e.observable] = {
                    {"lt", e.long_time}, {"thermal", e.thermal}, {"gap", e.difference}, {"beta", e.beta}};
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        for (CLI::App* sub : campaigns) {
            if (!sub->parsed()) continue;
            CampaignConfig cfg = load_campaign_config(config_path);
            const std::string verb = sub->get_name();
            const std::string expected = to_string(cfg.experiment);
            if (verb != expected)
                throw ConfigError("config describes a '" + expected + "' experiment but the verb is '" + verb + "'");
            if (!campaign_out.empty()) cfg.output_dir = campaign_out;
            RunOptions opts;
            opts.fast = fast;
            if (threads > 0) opts.threads = threads;
            if (!quiet)
                opts.progress = [](std::size_t done, std::size_t total) {
                    std::cerr << "\r" << done << "/" << total << " trajectories" << std::flush;
                    if (done == total) std::cerr << '\n';
                };
            const CampaignResult result = run_campaign(cfg, opts);
            write_campaign_outputs(result, cfg.output_dir);
            std::cerr << "wrote " << cfg.output_dir.string() << " (" << std::fixed << std::setprecision(1)
                      << result.wall_seconds << " s)\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "rydline: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "rydline: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
