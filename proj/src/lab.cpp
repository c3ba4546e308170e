#include "rydline/lab.hpp"

#include <Eigen/Core>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "rydline/analysis.hpp"
#include "rydline/errors.hpp"
#include "rydline/noisegen.hpp"
#include "rydline/seeds.hpp"
#include "rydline/thermo.hpp"

#ifndef RYDLINE_VERSION
#define RYDLINE_VERSION "unknown"
#endif

namespace rydline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointContext {
    SweepPoint point;
    std::shared_ptr<const ChainSystem> system;
    std::optional<RampSchedule> schedule;
    StateVector psi0;
    StateVector target;
    double target_energy = 0.0;
    std::optional<PhaseSpectrum> spectrum;  // empty: noiseless
    EvolutionConfig evolution;
    std::shared_ptr<const Eigensystem> eig;  // quench: sector eigensystem; thermo: full
    std::vector<NamedObservable> observables;
};

struct TaskOutput {
    std::uint64_t seed = 0;
    std::vector<double> values;
    std::vector<double> histogram;
    bool done = false;
};

int resolve_threads(const CampaignConfig& cfg, const RunOptions& opts) {
    int n = opts.threads.value_or(cfg.threads);
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return n;
}

PhaseSpectrum base_spectrum(const CampaignConfig& cfg) {
    if (!cfg.spectrum.file) return synthesize_default_spectrum(cfg.spectrum.surrogate);
    AnySpectrum s = read_spectrum_file(*cfg.spectrum.file, cfg.spectrum.file_kind);
    if (auto* phase = std::get_if<PhaseSpectrum>(&s)) return *phase;
    return frequency_to_phase(std::get<FrequencySpectrum>(s));
}

std::vector<std::string> columns_for(const CampaignConfig& cfg) {
    switch (cfg.experiment) {
        case Experiment::Ramp:
        case Experiment::ScaleSweep:
            return {"fidelity", "energy_per_site", "H_int", "O_Z2"};
        case Experiment::Quench:
            return {"fidelity", "energy_per_site"};
        case Experiment::ThermoSweep: {
            std::vector<std::string> cols{"fidelity", "energy_per_site", "energy", "beta"};
            for (const std::string& o : cfg.observables) {
                cols.push_back(o + "_lt");
                cols.push_back(o + "_thermal");
                cols.push_back(o + "_diff");
            }
            return cols;
        }
    }
    return {};
}

Eigen::VectorXd observable_diagonal(const ChainSystem& full, const std::string& name) {
    if (name == "H_int") return full.interaction();
    if (name == "O_Z2") return full.z2();
    return full.excitation_counts();
}

double fidelity(const StateVector& target, const StateVector& psi) { return std::norm(target.dot(psi)); }

class Campaign {
public:
    Campaign(const CampaignConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {
        cfg_.validate();
        m_ = opts.fast ? cfg.fast_realizations : cfg.realizations;
        columns_ = columns_for(cfg_);
    }

    CampaignResult run() {
        const auto start = std::chrono::steady_clock::now();
        const std::vector<SweepPoint> points = sweep_points(cfg_);
        for (const SweepPoint& p : points) contexts_.push_back(prepare(p));

        // One task per (point, realization); noiseless points need only one.
        std::vector<std::pair<std::size_t, int>> tasks;
        for (std::size_t p = 0; p < contexts_.size(); ++p) {
            const int count = contexts_[p].spectrum ? m_ : 1;
            for (int r = 0; r < count; ++r) tasks.emplace_back(p, r);
        }
        outputs_.assign(contexts_.size(), std::vector<TaskOutput>(static_cast<std::size_t>(m_)));
        run_tasks(tasks);

        CampaignResult result;
        result.config = cfg_;
        result.realizations = m_;
        result.columns = columns_;
        for (std::size_t p = 0; p < contexts_.size(); ++p) result.points.push_back(summarize(p, result));
        find_optima(result);
        result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }

private:
    std::shared_ptr<const ChainSystem> system_for(int n) {
        auto it = systems_.find(n);
        if (it != systems_.end()) return it->second;
        auto sys = std::make_shared<const ChainSystem>(ChainParams::odd_chain(n, cfg_.v_dd), Sector::Symmetric);
        systems_.emplace(n, sys);
        return sys;
    }

    const PhaseSpectrum& spectrum_for(double kappa) {
        if (!base_) base_ = base_spectrum(cfg_);
        auto it = spectra_.find(kappa);
        if (it == spectra_.end()) it = spectra_.emplace(kappa, rescale_frequency_grid(*base_, kappa)).first;
        return it->second;
    }

    PointContext prepare(const SweepPoint& p) {
        PointContext ctx;
        ctx.point = p;
        ctx.system = system_for(p.n_sites);
        const ChainParams& params = ctx.system->params();
        const double v = cfg_.v_dd;
        using P = PreparationPoints;

        double omega0 = 0.0, delta0 = 0.0, omega1 = 0.0, delta1 = 0.0;
        switch (cfg_.schedule.kind) {
            case ScheduleKind::FinalStep:
                ctx.schedule = final_step_schedule(p.t3_us, v);
                omega0 = P::omega_high * v, delta0 = P::delta_target * v;
                omega1 = P::omega_low * v, delta1 = P::delta_target * v;
                break;
            case ScheduleKind::ThreeStep:
                ctx.schedule = three_step_schedule(cfg_.schedule.t1_us, cfg_.schedule.t2_us, p.t3_us, v);
                omega0 = P::omega_low * v, delta0 = P::delta_start * v;
                omega1 = P::omega_low * v, delta1 = P::delta_target * v;
                break;
            case ScheduleKind::Constant:
                omega0 = omega1 = p.omega_over_vdd * v;
                delta0 = delta1 = cfg_.schedule.delta_over_vdd * v;
                ctx.schedule = constant_schedule(omega0, delta0, cfg_.schedule.duration_us);
                break;
        }

        ctx.psi0 = ctx.system->restrict_state(ground_state(params, omega0, delta0).state);
        ctx.psi0.normalize();
        if (cfg_.experiment == Experiment::Quench) {
            auto eig = std::make_shared<Eigensystem>(diagonalize(*ctx.system, omega1, delta1, true));
            ctx.target = eig->vectors.col(0);
            ctx.target_energy = eig->energies[0];
            ctx.eig = eig;
        } else {
            const GroundState g = ground_state(params, omega1, delta1);
            ctx.target = ctx.system->restrict_state(g.state);
            ctx.target_energy = g.energy;
        }
        if (cfg_.experiment == Experiment::ThermoSweep) {
            const std::string key = std::to_string(p.n_sites);
            auto it = thermo_eigs_.find(p.n_sites);
            if (it == thermo_eigs_.end())
                it = thermo_eigs_
                         .emplace(p.n_sites, std::make_shared<Eigensystem>(
                                                 diagonalize_by_sector(params, omega1, delta1)))
                         .first;
            ctx.eig = it->second;
            const ChainSystem full(params, Sector::Full);
            for (const std::string& o : cfg_.observables)
                ctx.observables.push_back({o, observable_diagonal(full, o)});
        }

        if (cfg_.noise_enabled && p.noise_scale != 0.0) ctx.spectrum = spectrum_for(p.kappa);
        ctx.evolution.frame = cfg_.frame;
        if (cfg_.time_step_us) {
            ctx.evolution.dt = *cfg_.time_step_us;
        } else {
            double dt = 1e-2 / v;
            if (ctx.spectrum) dt = std::min(dt, bin_layout(*ctx.spectrum).dt);
            ctx.evolution.dt = dt;
        }
        return ctx;
    }

    void run_tasks(const std::vector<std::pair<std::size_t, int>>& tasks) {
        const int n_threads = std::min<int>(resolve_threads(cfg_, opts_), static_cast<int>(tasks.size()));
        std::atomic<std::size_t> next{0};
        std::size_t done = 0;
        std::mutex mutex;
        std::exception_ptr failure;

        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                {
                    std::lock_guard lock(mutex);
                    if (failure) return;
                }
                try {
                    const auto [p, r] = tasks[i];
                    TaskOutput out = run_realization(contexts_[p], r);
                    std::lock_guard lock(mutex);
                    outputs_[p][static_cast<std::size_t>(r)] = std::move(out);
                    ++done;
                    if (opts_.progress) opts_.progress(done, tasks.size());
                } catch (...) {
                    std::lock_guard lock(mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (std::thread& t : pool) t.join();
        }
        if (failure) std::rethrow_exception(failure);
    }

    TaskOutput run_realization(const PointContext& ctx, int r) const {
        TaskOutput out;
        out.seed = derive_seed(cfg_.master_seed, ctx.point.index, static_cast<std::uint64_t>(r));
        std::optional<PhaseSignal> noise;
        if (ctx.spectrum) {
            noise = generate_signal(*ctx.spectrum, out.seed);
            if (ctx.point.noise_scale != 1.0) noise = scale_signal(*noise, ctx.point.noise_scale);
        }
        const Trajectory traj =
            evolve(*ctx.system, ctx.psi0, *ctx.schedule, noise ? &*noise : nullptr, ctx.evolution);
        const StateVector& psi = traj.final_state;
        const TrajectoryRecord& last = traj.records.back();
        const double n = ctx.point.n_sites;

        out.values.push_back(fidelity(ctx.target, psi));
        out.values.push_back((last.energy - ctx.target_energy) / n);
        switch (cfg_.experiment) {
            case Experiment::Ramp:
            case Experiment::ScaleSweep:
                out.values.push_back(last.h_int);
                out.values.push_back(last.o_z2);
                break;
            case Experiment::Quench: {
                const Eigensystem& eig = *ctx.eig;
                const Eigen::VectorXd w = (eig.vectors.adjoint() * psi).cwiseAbs2();
                for (Eigen::Index i = 0; i < eig.size(); ++i) {
                    const auto bin = static_cast<std::size_t>(
                        std::floor((eig.energies[i] - eig.energies[0]) / cfg_.histogram_bin_vdd / cfg_.v_dd + 0.5));
                    if (out.histogram.size() <= bin) out.histogram.resize(bin + 1, 0.0);
                    out.histogram[bin] += w[i];
                }
                break;
            }
            case Experiment::ThermoSweep: {
                const Eigensystem& eig = *ctx.eig;
                StateVector full = ctx.system->embed(psi);
                full.normalize();
                const EnsembleWeights w = diagonal_ensemble(full, eig);
                const double energy = w.weights.dot(eig.energies);
                out.values.push_back(energy - eig.energies[0]);
                double beta = kNaN;
                if (cfg_.beta_mode == BetaMode::PerRealization) beta = solve_beta(energy, eig);
                out.values.push_back(beta);
                for (const NamedObservable& o : ctx.observables) {
                    const double lt = long_time_expectation(full, o.diagonal, eig);
                    double th = kNaN;
                    if (cfg_.beta_mode == BetaMode::PerRealization)
                        th = thermal_expectation(beta, eigenstate_expectations(o.diagonal, eig), eig);
                    out.values.push_back(lt);
                    out.values.push_back(th);
                    out.values.push_back(std::isnan(th) ? kNaN : std::abs(lt - th));
                }
                break;
            }
        }
        out.done = true;
        return out;
    }

    PointResult summarize(std::size_t p, CampaignResult& result) {
        const PointContext& ctx = contexts_[p];
        std::vector<TaskOutput>& outs = outputs_[p];
        // Noiseless points ran once; every realization shares that outcome.
        if (!ctx.spectrum)
            for (std::size_t r = 1; r < outs.size(); ++r) {
                outs[r] = outs[0];
                outs[r].seed = derive_seed(cfg_.master_seed, ctx.point.index, r);
            }

        PointResult pr;
        pr.point = ctx.point;
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            std::vector<double> v;
            for (const TaskOutput& o : outs) v.push_back(o.values[c]);
            pr.stats.push_back({columns_[c], aggregate(v)});
        }
        for (std::size_t r = 0; r < outs.size(); ++r)
            result.rows.push_back({p, static_cast<int>(r), outs[r].seed, outs[r].values});

        if (cfg_.experiment == Experiment::ThermoSweep) add_thermal_summaries(ctx, pr);
        if (cfg_.experiment == Experiment::Quench) {
            std::size_t bins = 0;
            for (const TaskOutput& o : outs) bins = std::max(bins, o.histogram.size());
            for (std::size_t b = 0; b < bins; ++b) {
                std::vector<double> v;
                for (const TaskOutput& o : outs) v.push_back(b < o.histogram.size() ? o.histogram[b] : 0.0);
                pr.histogram.push_back(aggregate(v));
            }
        }
        if (cfg_.noiseless_control) pr.noiseless_fidelity = noiseless_fidelity(ctx);
        return pr;
    }

    void add_thermal_summaries(const PointContext& ctx, PointResult& pr) const {
        auto stat = [&](const std::string& name) -> Statistic& {
            for (NamedStatistic& s : pr.stats)
                if (s.name == name) return s.value;
            throw DomainError("missing statistic " + name);
        };
        const Eigensystem& eig = *ctx.eig;
        if (cfg_.beta_mode == BetaMode::MeanEnergy) {
            const double energy = stat("energy").mean + eig.energies[0];
            const double beta = solve_beta(energy, eig);
            stat("beta") = {beta, 0.0, 1, false};
            for (const NamedObservable& o : ctx.observables) {
                const double th = thermal_expectation(beta, eigenstate_expectations(o.diagonal, eig), eig);
                stat(o.name + "_thermal") = {th, 0.0, 1, false};
                stat(o.name + "_diff") = {std::abs(stat(o.name + "_lt").mean - th), 0.0, 1, false};
            }
        }
        for (const NamedObservable& o : ctx.observables) {
            const Statistic lt = stat(o.name + "_lt");
            const Statistic th = stat(o.name + "_thermal");
            pr.stats.push_back({o.name + "_mean_gap", {std::abs(lt.mean - th.mean), 0.0, lt.count, false}});
        }
    }

    double noiseless_fidelity(const PointContext& ctx) const {
        if (!ctx.spectrum) return outputs_[ctx.point.index][0].values[0];
        EvolutionConfig evo = ctx.evolution;
        const Trajectory traj = evolve(*ctx.system, ctx.psi0, *ctx.schedule, nullptr, evo);
        return fidelity(ctx.target, traj.final_state);
    }

    void find_optima(CampaignResult& result) const {
        if (cfg_.axis != SweepAxis::T3) return;
        std::map<std::tuple<int, double, double>, Optimum> best;
        for (const PointResult& pr : result.points) {
            const double f = pr.stats.front().value.mean;
            const auto key = std::make_tuple(pr.point.n_sites, pr.point.kappa, pr.point.noise_scale);
            auto it = best.find(key);
            if (it == best.end() || f > it->second.fidelity)
                best[key] = {pr.point.n_sites, pr.point.kappa, pr.point.t3_us, f};
        }
        for (const auto& [key, opt] : best) result.optima.push_back(opt);
    }

    CampaignConfig cfg_;
    RunOptions opts_;
    int m_ = 1;
    std::vector<std::string> columns_;
    std::vector<PointContext> contexts_;
    std::vector<std::vector<TaskOutput>> outputs_;
    std::map<int, std::shared_ptr<const ChainSystem>> systems_;
    std::map<int, std::shared_ptr<const Eigensystem>> thermo_eigs_;
    std::optional<PhaseSpectrum> base_;
    std::map<double, PhaseSpectrum> spectra_;
};

CampaignResult run_checked(const CampaignConfig& cfg, const RunOptions& opts, Experiment expected) {
    if (cfg.experiment != expected)
        throw ConfigError(std::string("campaign config describes a '") + to_string(cfg.experiment) +
                          "' experiment, expected '" + to_string(expected) + "'");
    return Campaign(cfg, opts).run();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

}  // namespace

Statistic aggregate(std::span<const double> values) {
    if (values.empty()) throw DomainError("aggregate: no values");
    Statistic s;
    s.count = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.count;
    if (s.count < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / (s.count - 1)) / std::sqrt(static_cast<double>(s.count));
    s.se_defined = true;
    return s;
}

std::vector<SweepPoint> sweep_points(const CampaignConfig& cfg) {
    std::vector<double> axis = cfg.axis_values;
    if (cfg.axis == SweepAxis::None) axis = {kNaN};
    std::vector<double> kappas = cfg.kappas;
    if (cfg.axis == SweepAxis::Kappa) kappas = {kNaN};

    std::vector<SweepPoint> points;
    for (int n : cfg.n_sites) {
        for (double k : kappas) {
            for (double a : axis) {
                SweepPoint p;
                p.index = points.size();
                p.n_sites = n;
                p.t3_us = cfg.schedule.t3_us;
                p.noise_scale = cfg.noise_scale;
                p.kappa = std::isnan(k) ? 1.0 : k;
                p.omega_over_vdd = cfg.schedule.omega_over_vdd;
                switch (cfg.axis) {
                    case SweepAxis::None: break;
                    case SweepAxis::T3: p.t3_us = a; break;
                    case SweepAxis::NoiseScale: p.noise_scale = a; break;
                    case SweepAxis::Kappa: p.kappa = a; break;
                    case SweepAxis::Omega: p.omega_over_vdd = a; break;
                }
                points.push_back(p);
            }
        }
    }
    return points;
}

CampaignResult ramp_fidelity_campaign(const CampaignConfig& cfg, const RunOptions& opts) {
    return run_checked(cfg, opts, Experiment::Ramp);
}

CampaignResult noise_scaling_campaign(const CampaignConfig& cfg, const RunOptions& opts) {
    return run_checked(cfg, opts, Experiment::ScaleSweep);
}

CampaignResult quench_campaign(const CampaignConfig& cfg, const RunOptions& opts) {
    return run_checked(cfg, opts, Experiment::Quench);
}

CampaignResult thermalization_campaign(const CampaignConfig& cfg, const RunOptions& opts) {
    return run_checked(cfg, opts, Experiment::ThermoSweep);
}

CampaignResult run_campaign(const CampaignConfig& cfg, const RunOptions& opts) {
    return Campaign(cfg, opts).run();
}

void write_campaign_outputs(const CampaignResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const CampaignConfig& cfg = result.config;

    std::ofstream res(dir / "results.csv");
    if (!res) throw Error("cannot write " + (dir / "results.csv").string());
    res << "point,n_sites,t3_us,m,kappa,omega_over_vdd,M,master_seed";
    const std::vector<NamedStatistic>& first = result.points.front().stats;
    for (const NamedStatistic& s : first) res << ',' << s.name << "_mean," << s.name << "_se";
    res << ",se_defined";
    if (cfg.noiseless_control) res << ",fidelity_noiseless";
    res << '\n';
    for (const PointResult& pr : result.points) {
        const SweepPoint& p = pr.point;
        res << p.index << ',' << p.n_sites << ',' << format_double(p.t3_us) << ','
            << format_double(p.noise_scale) << ',' << format_double(p.kappa) << ','
            << format_double(p.omega_over_vdd) << ',' << result.realizations << ',' << cfg.master_seed;
        for (const NamedStatistic& s : pr.stats)
            res << ',' << format_double(s.value.mean) << ','
                << (s.value.se_defined ? format_double(s.value.standard_error) : "nan");
        res << ',' << (pr.stats.front().value.se_defined ? 1 : 0);
        if (cfg.noiseless_control) res << ',' << format_double(pr.noiseless_fidelity.value_or(kNaN));
        res << '\n';
    }

    if (cfg.write_realizations) {
        std::ofstream rows(dir / "realizations.csv");
        rows << "point,realization,seed";
        for (const std::string& c : result.columns) rows << ',' << c;
        rows << '\n';
        for (const RealizationRow& row : result.rows) {
            rows << row.point << ',' << row.realization << ',' << row.seed;
            for (double v : row.values) rows << ',' << format_double(v);
            rows << '\n';
        }
    }

    if (cfg.experiment == Experiment::Quench) {
        std::ofstream hist(dir / "histogram.csv");
        hist << "point,n_sites,omega_over_vdd,kappa,energy_over_vdd,weight_mean,weight_se,M\n";
        for (const PointResult& pr : result.points)
            for (std::size_t b = 0; b < pr.histogram.size(); ++b)
                hist << pr.point.index << ',' << pr.point.n_sites << ','
                     << format_double(pr.point.omega_over_vdd) << ',' << format_double(pr.point.kappa) << ','
                     << format_double(static_cast<double>(b) * cfg.histogram_bin_vdd) << ','
                     << format_double(pr.histogram[b].mean) << ','
                     << (pr.histogram[b].se_defined ? format_double(pr.histogram[b].standard_error) : "nan")
                     << ',' << pr.histogram[b].count << '\n';
    }

    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(campaign_config_to_json(cfg));
    manifest["realizations_used"] = result.realizations;
    manifest["points"] = result.points.size();
    manifest["seed_derivation"] = "derive_seed(master_seed, point, realization), splitmix64 chain";
    manifest["master_seed"] = cfg.master_seed;
    manifest["wall_seconds"] = result.wall_seconds;
    manifest["versions"] = {{"rydline", RYDLINE_VERSION},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)},
                            {"compiler", __VERSION__}};
    nlohmann::json optima = nlohmann::json::array();
    for (const Optimum& o : result.optima)
        optima.push_back({{"n_sites", o.n_sites}, {"kappa", o.kappa}, {"t3_us", o.t3_us}, {"fidelity", o.fidelity}});
    manifest["optimal_t3"] = optima;
    std::ofstream man(dir / "manifest.json");
    man << manifest.dump(2) << '\n';
}

}  // namespace rydline
