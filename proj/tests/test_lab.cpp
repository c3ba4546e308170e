#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "rydline/errors.hpp"
#include "rydline/lab.hpp"
#include "rydline/seeds.hpp"

using namespace rydline;

namespace {

double stat(const PointResult& p, const std::string& name) {
    for (const NamedStatistic& s : p.stats)
        if (s.name == name) return s.value.mean;
    throw std::runtime_error("no statistic " + name);
}

CampaignConfig small_ramp() {
    return parse_campaign_config(R"({
        "experiment": "ramp",
        "chain": {"n_sites": [5]},
        "schedule": {"kind": "final-step"},
        "sweep": {"axis": "t3_us", "values": [10, 20]},
        "realizations": 3,
        "master_seed": 17,
        "evolution": {"time_step_us": 0.05}
    })");
}

}  // namespace

TEST(Aggregate, Examples) {
    const std::vector<double> one{0.7};
    const Statistic s1 = aggregate(one);
    EXPECT_EQ(s1.mean, 0.7);
    EXPECT_FALSE(s1.se_defined);
    EXPECT_EQ(s1.count, 1);
    const std::vector<double> same{2.0, 2.0, 2.0};
    EXPECT_EQ(aggregate(same).standard_error, 0.0);
    const std::vector<double> abc{1.0, 2.0, 3.0};
    const Statistic s = aggregate(abc);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_NEAR(s.standard_error, 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_TRUE(s.se_defined);
    EXPECT_THROW(aggregate(std::vector<double>{}), DomainError);
}

TEST(Seeds, DistinctAcrossPointsAndRealizations) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t p = 0; p < 200; ++p)
        for (std::uint64_t r = 0; r < 200; ++r) seen.insert(derive_seed(5, p, r));
    EXPECT_EQ(seen.size(), 200u * 200u);
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
    EXPECT_EQ(derive_seed(9, 3, 4), derive_seed(9, 3, 4));
}

TEST(Config, ParsesAndEchoes) {
    const CampaignConfig c = parse_campaign_config(R"({
        // comments are allowed
        "experiment": "scale-sweep",
        "chain": {"n_sites": [7, 9], "v_dd_rad_per_us": 1.0},
        "schedule": {"kind": "final-step", "t3_us": 90},
        "sweep": {"axis": "m", "values": [1, 10]},
        "noise": {"kappa": [0.5, 0.9]},
        "realizations": 40,
        "spectrum": {"floor_mhz2_per_mhz": 1e-4}
    })");
    EXPECT_EQ(c.experiment, Experiment::ScaleSweep);
    EXPECT_EQ(c.n_sites, (std::vector<int>{7, 9}));
    EXPECT_EQ(c.axis, SweepAxis::NoiseScale);
    EXPECT_EQ(c.kappas, (std::vector<double>{0.5, 0.9}));
    EXPECT_EQ(c.realizations, 40);
    EXPECT_EQ(c.spectrum.surrogate.floor, 1e-4);
    const CampaignConfig back = parse_campaign_config(campaign_config_to_json(c));
    EXPECT_EQ(campaign_config_to_json(back), campaign_config_to_json(c));
    EXPECT_EQ(sweep_points(c).size(), 2u * 2u * 2u);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_campaign_config("{"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"chain": {"n_sites": [5]}})"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "bogus": 1})"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "chain": {"n_sites": [6]}})"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "chain": {"n_sites": [15]}})"), CapacityError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "noise": {"kappa": [0]}})"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "schedule": {"t3_us": -1}})"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "sweep": {"axis": "omega_over_vdd", "values": [1]}})"),
                 ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "observables": ["spin"]})"), ConfigError);
    EXPECT_THROW(parse_campaign_config(R"({"experiment": "ramp", "realizations": 0})"), ConfigError);
}

TEST(Config, QuenchDefaults) {
    const CampaignConfig c = parse_campaign_config(R"({"experiment": "quench"})");
    EXPECT_EQ(c.schedule.kind, ScheduleKind::Constant);
    EXPECT_EQ(c.axis, SweepAxis::Omega);
    EXPECT_EQ(c.schedule.duration_us, 400.0);
}

TEST(SweepPoints, Layout) {
    CampaignConfig c = small_ramp();
    c.n_sites = {5, 7};
    c.kappas = {0.5, 1.0};
    const auto pts = sweep_points(c);
    ASSERT_EQ(pts.size(), 8u);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i].index, i);
    EXPECT_EQ(pts[0].n_sites, 5);
    EXPECT_EQ(pts[0].kappa, 0.5);
    EXPECT_EQ(pts[1].t3_us, 20.0);
    EXPECT_EQ(pts[7].n_sites, 7);
}

TEST(Campaign, DeterministicAcrossThreadCounts) {
    const CampaignConfig c = small_ramp();
    RunOptions one, three;
    one.threads = 1;
    three.threads = 3;
    const CampaignResult a = ramp_fidelity_campaign(c, one);
    const CampaignResult b = ramp_fidelity_campaign(c, three);
    ASSERT_EQ(a.rows.size(), 6u);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].seed, b.rows[i].seed);
        EXPECT_EQ(a.rows[i].values, b.rows[i].values);
    }
    std::set<std::uint64_t> seeds;
    for (const auto& r : a.rows) seeds.insert(r.seed);
    EXPECT_EQ(seeds.size(), a.rows.size());
    EXPECT_EQ(a.columns, (std::vector<std::string>{"fidelity", "energy_per_site", "H_int", "O_Z2"}));
}

TEST(Campaign, ZeroNoiseScaleMatchesNoiseless) {
    CampaignConfig c = parse_campaign_config(R"({
        "experiment": "scale-sweep",
        "chain": {"n_sites": [5]},
        "schedule": {"t3_us": 20},
        "sweep": {"axis": "m", "values": [0]},
        "realizations": 2
    })");
    const CampaignResult zero = noise_scaling_campaign(c);
    c.noise_enabled = false;
    c.axis = SweepAxis::None;
    c.axis_values.clear();
    const CampaignResult quiet = noise_scaling_campaign(c);
    EXPECT_NEAR(stat(zero.points[0], "fidelity"), stat(quiet.points[0], "fidelity"), 1e-10);
}

TEST(Campaign, NoiseHeatsOnAverage) {
    CampaignConfig c = small_ramp();
    c.axis_values = {20};
    c.realizations = 6;
    c.noiseless_control = true;
    c.noise_scale = 3.0;
    const CampaignResult r = ramp_fidelity_campaign(c);
    const PointResult& p = r.points[0];
    ASSERT_TRUE(p.noiseless_fidelity.has_value());
    CampaignConfig q = c;
    q.noise_enabled = false;
    const CampaignResult quiet = ramp_fidelity_campaign(q);
    EXPECT_GE(stat(p, "energy_per_site"), stat(quiet.points[0], "energy_per_site") - 1e-8);
    EXPECT_NEAR(*p.noiseless_fidelity, stat(quiet.points[0], "fidelity"), 1e-12);
    EXPECT_GT(stat(p, "O_Z2"), 0.0);
}

TEST(Campaign, WrongExperimentIsRejected) {
    EXPECT_THROW(quench_campaign(small_ramp()), ConfigError);
}

TEST(Campaign, QuenchHistogramIsADistribution) {
    const CampaignConfig c = parse_campaign_config(R"({
        "experiment": "quench",
        "chain": {"n_sites": [5]},
        "schedule": {"duration_us": 20},
        "sweep": {"axis": "omega_over_vdd", "values": [1.0, 0.2]},
        "realizations": 2
    })");
    const CampaignResult r = quench_campaign(c);
    ASSERT_EQ(r.points.size(), 2u);
    for (const PointResult& p : r.points) {
        double total = 0.0;
        for (const Statistic& s : p.histogram) total += s.mean;
        EXPECT_NEAR(total, 1.0, 1e-9);
        EXPECT_NEAR(p.histogram[0].mean, stat(p, "fidelity"), 1e-9);
    }
}

TEST(Campaign, ThermoSweepColumns) {
    const CampaignConfig c = parse_campaign_config(R"({
        "experiment": "thermo-sweep",
        "chain": {"n_sites": [5]},
        "sweep": {"axis": "t3_us", "values": [10, 40]},
        "realizations": 2
    })");
    const CampaignResult r = thermalization_campaign(c);
    for (const PointResult& p : r.points) {
        EXPECT_GT(stat(p, "beta"), 0.0);
        EXPECT_NEAR(stat(p, "H_int_mean_gap"), std::abs(stat(p, "H_int_lt") - stat(p, "H_int_thermal")), 1e-12);
        EXPECT_LE(stat(p, "O_Z2_lt"), 1.0);
    }
    EXPECT_LT(stat(r.points[0], "fidelity"), stat(r.points[1], "fidelity"));

    CampaignConfig mean_mode = c;
    mean_mode.beta_mode = BetaMode::MeanEnergy;
    const CampaignResult m = thermalization_campaign(mean_mode);
    EXPECT_NEAR(stat(m.points[0], "H_int_lt"), stat(r.points[0], "H_int_lt"), 1e-12);
    EXPECT_GT(stat(m.points[0], "beta"), 0.0);
}

TEST(Campaign, WritesOutputs) {
    CampaignConfig c = small_ramp();
    c.noiseless_control = true;
    const CampaignResult r = run_campaign(c);
    const auto dir = std::filesystem::temp_directory_path() / "rydline_lab_outputs";
    std::filesystem::remove_all(dir);
    write_campaign_outputs(r, dir);
    std::ifstream res(dir / "results.csv");
    std::string header;
    std::getline(res, header);
    EXPECT_NE(header.find("fidelity_mean"), std::string::npos);
    EXPECT_NE(header.find("fidelity_noiseless"), std::string::npos);
    EXPECT_NE(header.find("master_seed"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "realizations.csv"));
    std::ifstream man(dir / "manifest.json");
    const nlohmann::json j = nlohmann::json::parse(man);
    EXPECT_EQ(j["master_seed"], 17);
    EXPECT_EQ(j["config"]["experiment"], "ramp");
    EXPECT_TRUE(j.contains("wall_seconds"));
    EXPECT_EQ(j["optimal_t3"].size(), 1u);
    std::filesystem::remove_all(dir);
}
