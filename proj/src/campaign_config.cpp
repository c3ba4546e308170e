#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "rydline/errors.hpp"
#include "rydline/lab.hpp"

namespace rydline {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : obj.items())
        if (!keys.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": missing or of the wrong type");
    }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
    if (obj.contains(key)) out = get<T>(obj, key, where);
}

// A scalar is accepted wherever a list is expected.
template <class T>
void read_list(const json& obj, const char* key, const std::string& where, std::vector<T>& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (v.is_array())
        out = get<std::vector<T>>(obj, key, where);
    else
        out = {get<T>(obj, key, where)};
}

template <class Enum, std::size_t K>
Enum parse_enum(const std::string& text, const std::string& where,
                const std::pair<const char*, Enum> (&options)[K]) {
    for (const auto& [name, value] : options)
        if (text == name) return value;
    throw ConfigError(where + ": unknown value '" + text + "'");
}

constexpr std::pair<const char*, Experiment> kExperiments[] = {
    {"ramp", Experiment::Ramp},
    {"scale-sweep", Experiment::ScaleSweep},
    {"quench", Experiment::Quench},
    {"thermo-sweep", Experiment::ThermoSweep},
};
constexpr std::pair<const char*, SweepAxis> kAxes[] = {
    {"none", SweepAxis::None},
    {"t3_us", SweepAxis::T3},
    {"m", SweepAxis::NoiseScale},
    {"kappa", SweepAxis::Kappa},
    {"omega_over_vdd", SweepAxis::Omega},
};
constexpr std::pair<const char*, ScheduleKind> kSchedules[] = {
    {"final-step", ScheduleKind::FinalStep},
    {"three-step", ScheduleKind::ThreeStep},
    {"constant", ScheduleKind::Constant},
};
constexpr std::pair<const char*, BetaMode> kBetaModes[] = {
    {"per-realization", BetaMode::PerRealization},
    {"mean-energy", BetaMode::MeanEnergy},
};

template <class Enum, std::size_t K>
const char* enum_name(Enum value, const std::pair<const char*, Enum> (&options)[K]) {
    for (const auto& [name, v] : options)
        if (v == value) return name;
    return "?";
}

}  // namespace

const char* to_string(Experiment e) { return enum_name(e, kExperiments); }
const char* to_string(SweepAxis a) { return enum_name(a, kAxes); }
const char* to_string(ScheduleKind k) { return enum_name(k, kSchedules); }
const char* to_string(BetaMode m) { return enum_name(m, kBetaModes); }

void CampaignConfig::validate() const {
    if (n_sites.empty()) throw ConfigError("chain.n_sites must not be empty");
    for (int n : n_sites) {
        if (n < 3 || n % 2 == 0) throw ConfigError("chain.n_sites must hold odd values >= 3");
        if (n > kMaxCampaignSites)
            throw CapacityError("chain.n_sites = " + std::to_string(n) +
                                " exceeds the state-vector limit of " +
                                std::to_string(kMaxCampaignSites));
    }
    if (!(v_dd > 0.0)) throw ConfigError("chain.v_dd_rad_per_us must be positive");
    if (realizations < 1 || fast_realizations < 1) throw ConfigError("realizations must be >= 1");
    if (axis != SweepAxis::None && axis_values.empty()) throw ConfigError("sweep.values must not be empty");
    if (kappas.empty()) throw ConfigError("noise.kappa must not be empty");
    for (double k : kappas)
        if (!(k > 0.0)) throw ConfigError("noise.kappa values must be positive");
    for (double v : axis_values) {
        if (!std::isfinite(v)) throw ConfigError("sweep.values must be finite");
        if ((axis == SweepAxis::T3 || axis == SweepAxis::Kappa) && !(v > 0.0))
            throw ConfigError("sweep.values must be positive for this axis");
        if (axis == SweepAxis::NoiseScale && v < 0.0) throw ConfigError("sweep.values: m must be >= 0");
    }
    if (!(schedule.t1_us > 0.0) || !(schedule.t2_us > 0.0) || !(schedule.t3_us > 0.0) ||
        !(schedule.duration_us > 0.0))
        throw ConfigError("schedule durations must be positive");
    if (time_step_us && !(*time_step_us > 0.0)) throw ConfigError("evolution.time_step_us must be positive");
    if (!(histogram_bin_vdd > 0.0)) throw ConfigError("histogram_bin_vdd must be positive");
    if (axis == SweepAxis::Omega && schedule.kind != ScheduleKind::Constant)
        throw ConfigError("an omega sweep needs a constant schedule");
    if (axis == SweepAxis::T3 && schedule.kind == ScheduleKind::Constant)
        throw ConfigError("a T3 sweep needs a ramp schedule");
    if (experiment == Experiment::Quench && schedule.kind != ScheduleKind::Constant)
        throw ConfigError("quench campaigns need a constant schedule");
    if (experiment != Experiment::Quench && schedule.kind == ScheduleKind::Constant)
        throw ConfigError("only quench campaigns use a constant schedule");
    for (const std::string& o : observables)
        if (o != "H_int" && o != "O_Z2" && o != "n")
            throw ConfigError("unknown observable '" + o + "' (expected H_int, O_Z2 or n)");
}

CampaignConfig parse_campaign_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("campaign config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"experiment", "chain", "schedule", "sweep", "realizations", "fast_realizations",
                "master_seed", "spectrum", "noise", "evolution", "noiseless_control", "observables",
                "beta_mode", "histogram_bin_vdd", "output", "threads"});

    CampaignConfig cfg;
    if (!root.contains("experiment")) throw ConfigError("config.experiment is required");
    cfg.experiment = parse_enum(get<std::string>(root, "experiment", "config"), "config.experiment", kExperiments);
    if (cfg.experiment == Experiment::Quench) {
        cfg.schedule.kind = ScheduleKind::Constant;
        cfg.axis = SweepAxis::Omega;
        cfg.axis_values = {1.0, 0.2};
    }

    if (root.contains("chain")) {
        const json& c = root["chain"];
        check_keys(c, "chain", {"n_sites", "v_dd_rad_per_us"});
        read_list(c, "n_sites", "chain", cfg.n_sites);
        read(c, "v_dd_rad_per_us", "chain", cfg.v_dd);
    }
    if (root.contains("schedule")) {
        const json& s = root["schedule"];
        check_keys(s, "schedule",
                   {"kind", "t1_us", "t2_us", "t3_us", "duration_us", "omega_over_vdd", "delta_over_vdd"});
        if (s.contains("kind"))
            cfg.schedule.kind = parse_enum(get<std::string>(s, "kind", "schedule"), "schedule.kind", kSchedules);
        read(s, "t1_us", "schedule", cfg.schedule.t1_us);
        read(s, "t2_us", "schedule", cfg.schedule.t2_us);
        read(s, "t3_us", "schedule", cfg.schedule.t3_us);
        read(s, "duration_us", "schedule", cfg.schedule.duration_us);
        read(s, "omega_over_vdd", "schedule", cfg.schedule.omega_over_vdd);
        read(s, "delta_over_vdd", "schedule", cfg.schedule.delta_over_vdd);
    }
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        check_keys(s, "sweep", {"axis", "values"});
        if (s.contains("axis")) cfg.axis = parse_enum(get<std::string>(s, "axis", "sweep"), "sweep.axis", kAxes);
        read_list(s, "values", "sweep", cfg.axis_values);
    }
    read(root, "realizations", "config", cfg.realizations);
    read(root, "fast_realizations", "config", cfg.fast_realizations);
    read(root, "master_seed", "config", cfg.master_seed);

    if (root.contains("spectrum")) {
        const json& s = root["spectrum"];
        check_keys(s, "spectrum",
                   {"source", "path", "kind", "floor_mhz2_per_mhz", "bump_center_mhz", "bump_width_mhz",
                    "bump_height_rad2_per_mhz", "grid_spacing_mhz", "f_min_mhz", "f_max_mhz"});
        const std::string source = s.contains("source") ? get<std::string>(s, "source", "spectrum") : "surrogate";
        if (source == "file") {
            if (!s.contains("path")) throw ConfigError("spectrum.path is required for a file source");
            cfg.spectrum.file = get<std::string>(s, "path", "spectrum");
            const std::string kind = s.contains("kind") ? get<std::string>(s, "kind", "spectrum") : "phase";
            if (kind == "phase")
                cfg.spectrum.file_kind = SpectrumKind::Phase;
            else if (kind == "frequency")
                cfg.spectrum.file_kind = SpectrumKind::Frequency;
            else
                throw ConfigError("spectrum.kind must be 'phase' or 'frequency'");
        } else if (source != "surrogate") {
            throw ConfigError("spectrum.source must be 'surrogate' or 'file'");
        }
        SurrogateSpectrumParams& p = cfg.spectrum.surrogate;
        read(s, "floor_mhz2_per_mhz", "spectrum", p.floor);
        read(s, "bump_center_mhz", "spectrum", p.bump_center);
        read(s, "bump_width_mhz", "spectrum", p.bump_width);
        read(s, "bump_height_rad2_per_mhz", "spectrum", p.bump_height);
        read(s, "grid_spacing_mhz", "spectrum", p.grid_spacing);
        read(s, "f_min_mhz", "spectrum", p.f_min);
        read(s, "f_max_mhz", "spectrum", p.f_max);
    }
    if (root.contains("noise")) {
        const json& n = root["noise"];
        check_keys(n, "noise", {"enabled", "m", "kappa"});
        read(n, "enabled", "noise", cfg.noise_enabled);
        read(n, "m", "noise", cfg.noise_scale);
        read_list(n, "kappa", "noise", cfg.kappas);
    }
    if (root.contains("evolution")) {
        const json& e = root["evolution"];
        check_keys(e, "evolution", {"frame", "time_step_us"});
        if (e.contains("frame")) cfg.frame = frame_from_string(get<std::string>(e, "frame", "evolution"));
        if (e.contains("time_step_us") && !e["time_step_us"].is_null())
            cfg.time_step_us = get<double>(e, "time_step_us", "evolution");
    }
    read(root, "noiseless_control", "config", cfg.noiseless_control);
    read_list(root, "observables", "config", cfg.observables);
    if (root.contains("beta_mode"))
        cfg.beta_mode = parse_enum(get<std::string>(root, "beta_mode", "config"), "config.beta_mode", kBetaModes);
    read(root, "histogram_bin_vdd", "config", cfg.histogram_bin_vdd);
    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(o, "output", {"directory", "write_realizations"});
        if (o.contains("directory")) cfg.output_dir = get<std::string>(o, "directory", "output");
        read(o, "write_realizations", "output", cfg.write_realizations);
    }
    read(root, "threads", "config", cfg.threads);

    cfg.validate();
    return cfg;
}

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open campaign config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_campaign_config(text.str());
}

std::string campaign_config_to_json(const CampaignConfig& cfg) {
    json root;
    root["experiment"] = to_string(cfg.experiment);
    root["chain"] = {{"n_sites", cfg.n_sites}, {"v_dd_rad_per_us", cfg.v_dd}};
    root["schedule"] = {{"kind", to_string(cfg.schedule.kind)},
                        {"t1_us", cfg.schedule.t1_us},
                        {"t2_us", cfg.schedule.t2_us},
                        {"t3_us", cfg.schedule.t3_us},
                        {"duration_us", cfg.schedule.duration_us},
                        {"omega_over_vdd", cfg.schedule.omega_over_vdd},
                        {"delta_over_vdd", cfg.schedule.delta_over_vdd}};
    root["sweep"] = {{"axis", to_string(cfg.axis)}, {"values", cfg.axis_values}};
    root["realizations"] = cfg.realizations;
    root["fast_realizations"] = cfg.fast_realizations;
    root["master_seed"] = cfg.master_seed;
    const SurrogateSpectrumParams& p = cfg.spectrum.surrogate;
    json spectrum = {{"source", cfg.spectrum.file ? "file" : "surrogate"},
                     {"floor_mhz2_per_mhz", p.floor},
                     {"bump_center_mhz", p.bump_center},
                     {"bump_width_mhz", p.bump_width},
                     {"bump_height_rad2_per_mhz", p.bump_height},
                     {"grid_spacing_mhz", p.grid_spacing},
                     {"f_min_mhz", p.f_min},
                     {"f_max_mhz", p.f_max}};
    if (cfg.spectrum.file) {
        spectrum["path"] = cfg.spectrum.file->string();
        spectrum["kind"] = cfg.spectrum.file_kind == SpectrumKind::Phase ? "phase" : "frequency";
    }
    root["spectrum"] = spectrum;
    root["noise"] = {{"enabled", cfg.noise_enabled}, {"m", cfg.noise_scale}, {"kappa", cfg.kappas}};
    root["evolution"] = {{"frame", to_string(cfg.frame)},
                         {"time_step_us", cfg.time_step_us ? json(*cfg.time_step_us) : json(nullptr)}};
    root["noiseless_control"] = cfg.noiseless_control;
    root["observables"] = cfg.observables;
    root["beta_mode"] = to_string(cfg.beta_mode);
    root["histogram_bin_vdd"] = cfg.histogram_bin_vdd;
    root["output"] = {{"directory", cfg.output_dir.string()}, {"write_realizations", cfg.write_realizations}};
    root["threads"] = cfg.threads;
    return root.dump(2);
}

}  // namespace rydline
