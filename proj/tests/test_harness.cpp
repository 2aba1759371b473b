#include <doctest.h>

#include <limits>
#include <numbers>
#include <sstream>

#include "otfs/harness.hpp"
#include "otfs/modem.hpp"
#include "otfs/sensing.hpp"

using namespace otfs;

TEST_CASE("nmse basics") {
    Vec a(2), b(2);
    a << cplx(1, 0), cplx(0, 1);
    b = a;
    CHECK(nmse(a, b) == 0.0);
    b(0) = cplx(0, 0);
    CHECK(nmse(b, a) == doctest::Approx(0.5));
    CHECK(nmse(2.0 * a, a) == doctest::Approx(1.0));
    CHECK_THROWS(nmse(a, Vec::Zero(2)));
    CHECK_THROWS(nmse(a, Vec::Ones(3)));
}

TEST_CASE("zeta grows with the pilot delay position") {
    const OtfsGrid g(64, 16, 16, 15e3, 8);
    const ChannelRealization ch = generate_channel(g, 4, 20, 100.0, 4e9, 4, 3);
    std::vector<double> reps;
    for (const auto& p : ch.paths) reps.push_back(representative_doppler_tap(p, g));
    CHECK(approximation_error_zeta(ch, 0, g, reps) == 0.0);
    double prev = 0.0;
    for (int l : {8, 16, 32}) {
        const double z = approximation_error_zeta(ch, l, g, reps);
        CHECK(z > prev);
        prev = z;
    }
    // exact representatives of single-subpath channels give zero error at any l
    const ChannelRealization single = generate_channel(g, 4, 1, 100.0, 4e9, 4, 3);
    std::vector<double> exact;
    for (const auto& p : single.paths) exact.push_back(single.doppler_tap(p.subpaths[0]));
    CHECK(approximation_error_zeta(single, 32, g, exact) < 1e-12);
    CHECK_THROWS(approximation_error_zeta(ch, 8, g, {0.0}));
}

TEST_CASE("pilot overhead ratio") {
    const OtfsGrid g(64, 16, 16, 15e3, 8);
    const PilotLayout layout{-4, 0, 7, 31, 4, 5};
    CHECK(pilot_overhead_ratio(layout, g) == doctest::Approx(7.0 * 31 / (64.0 * 16)));
}

TEST_CASE("gray 4qam mapping round trip") {
    const double s = 1.0 / std::numbers::sqrt2;
    CHECK(std::abs(qam4_map(0, 0) - cplx(s, s)) < 1e-15);
    CHECK(std::abs(qam4_map(1, 1) - cplx(-s, -s)) < 1e-15);
    for (int b0 : {0, 1})
        for (int b1 : {0, 1}) {
            const cplx sym = qam4_map(b0, b1);
            CHECK(std::abs(sym) == doctest::Approx(1.0));
            int r0, r1;
            qam4_demap(sym + cplx(0.2, -0.2), r0, r1); // noise within the decision region
            CHECK(r0 == b0);
            CHECK(r1 == b1);
        }
}

TEST_CASE("config json round trip rejects unknown keys") {
    ExperimentConfig cfg;
    cfg.m = 32;
    cfg.n = 8;
    cfg.m_cp = 8;
    cfg.delta_f = 30e3;
    cfg.n_t = 4;
    cfg.k_p = -2;
    cfg.l_p = 3;
    cfg.m_p = 13;
    cfg.n_p = 5;
    cfg.m_g = 3;
    cfg.n_g = 2;
    cfg.pilot_type = PilotType::Random;
    cfg.paths = 2;
    cfg.subpaths = 5;
    cfg.velocity_mps = 80.0;
    cfg.carrier_hz = 28e9;
    cfg.max_delay_tap = 2;
    cfg.snr_db = {0.0, 5.0};
    cfg.velocities = {50.0, 100.0};
    cfg.trials = 7;
    cfg.seed = 99;
    cfg.estimator = EstimatorKind::Ismce;
    cfg.sweep = SweepVar::Velocity;
    cfg.carry_path_info = true;
    cfg.with_ber = true;
    cfg.timing = true;
    cfg.epsilon = 0.1;
    cfg.omp_residual_ratio = 0.05;
    cfg.omp_max_iters = 12;

    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.m == cfg.m);
    CHECK(back.n == cfg.n);
    CHECK(back.m_cp == cfg.m_cp);
    CHECK(back.delta_f == cfg.delta_f);
    CHECK(back.n_t == cfg.n_t);
    CHECK(back.k_p == cfg.k_p);
    CHECK(back.l_p == cfg.l_p);
    CHECK(back.m_p == cfg.m_p);
    CHECK(back.n_p == cfg.n_p);
    CHECK(back.m_g == cfg.m_g);
    CHECK(back.n_g == cfg.n_g);
    CHECK(back.pilot_type == cfg.pilot_type);
    CHECK(back.paths == cfg.paths);
    CHECK(back.subpaths == cfg.subpaths);
    CHECK(back.velocity_mps == cfg.velocity_mps);
    CHECK(back.carrier_hz == cfg.carrier_hz);
    CHECK(back.max_delay_tap == cfg.max_delay_tap);
    CHECK(back.snr_db == cfg.snr_db);
    CHECK(back.velocities == cfg.velocities);
    CHECK(back.trials == cfg.trials);
    CHECK(back.seed == cfg.seed);
    CHECK(back.estimator == cfg.estimator);
    CHECK(back.sweep == cfg.sweep);
    CHECK(back.carry_path_info == cfg.carry_path_info);
    CHECK(back.with_ber == cfg.with_ber);
    CHECK(back.timing == cfg.timing);
    CHECK(back.epsilon == cfg.epsilon);
    CHECK(back.omp_residual_ratio == cfg.omp_residual_ratio);
    CHECK(back.omp_max_iters == cfg.omp_max_iters);

    CHECK_THROWS(config_from_json("{\"frobnicate\": 1}"));
    CHECK_THROWS(config_from_json("[1,2]"));
}

TEST_CASE("layout resolution fills the derived defaults") {
    ExperimentConfig cfg; // desk-scale defaults
    const PilotLayout layout = cfg.resolved_layout();
    CHECK(layout.m_g == cfg.max_delay_tap + 1);
    // nu_max N T_sym = 1333.3 Hz * 16 * (80 / 960 kHz) = 1.78 -> window 2*(2+1),
    // clamped to 4 so the footprint n_p + 4*ceil(n_g/2) fits N = 16
    CHECK(layout.n_g == 4);
    CHECK(layout.k_p == cfg.grid().k_min() + 4);
    cfg.validate();
    cfg.n = 32; // enough Doppler bins: the derived formula applies unclamped
    CHECK(cfg.resolved_layout().n_g == 10);
    cfg.n = 16;
    cfg.n_g = 4;
    CHECK(cfg.resolved_layout().n_g == 4);
    CHECK(cfg.resolved_layout().k_p == cfg.grid().k_min() + 4);
    cfg.trials = 0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("csv output format") {
    std::vector<ResultRow> rows(2);
    rows[0] = ResultRow{"10", 0.5, 0.1, std::nullopt, 0.25, 4, std::nullopt};
    rows[1] = ResultRow{"msmce", 0.125, 0.0, 0.0625, 1.5, 2, 0.5};
    std::stringstream ss;
    write_csv(ss, rows);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "sweep_value,mean_nmse,nmse_std,mean_ber,mean_zeta,trials,wall_time_s");
    std::getline(ss, line);
    CHECK(line == "10,0.5,0.1,,0.25,4,");
    std::getline(ss, line);
    CHECK(line == "msmce,0.125,0,0.0625,1.5,2,0.500");
}

TEST_CASE("mmse detection is exact for perfect knowledge in the exact model") {
    const OtfsGrid g(32, 7, 8, 15e3, 2);
    ExperimentConfig cfg;
    cfg.m = g.m; cfg.n = g.n; cfg.m_cp = g.m_cp; cfg.delta_f = g.delta_f; cfg.n_t = g.n_t;
    cfg.m_p = 7; cfg.n_p = 7; cfg.m_g = 3; cfg.n_g = 7; cfg.l_p = 4;
    cfg.paths = 2; cfg.subpaths = 1; cfg.max_delay_tap = 2;
    cfg.seed = 5;
    cfg.with_ber = true;
    cfg.snr_db = {std::numeric_limits<double>::infinity()};
    const TrialResult r = run_trial(cfg, cfg.snr_db.front(), 100.0, EstimatorKind::Msmce, 0, 0);
    REQUIRE(r.ber_perfect_csi.has_value());
    CHECK(*r.ber_perfect_csi == 0.0);
    REQUIRE(r.ber.has_value());
    CHECK(*r.ber <= 0.02); // blind estimate: at most a stray bit from phase error
}

TEST_CASE("trials and sweeps are reproducible") {
    ExperimentConfig cfg;
    cfg.m = 32; cfg.n = 16; cfg.m_cp = 8; cfg.n_t = 2;
    cfg.m_p = 13; cfg.n_p = 5; cfg.m_g = 3; cfg.n_g = 2; cfg.l_p = 0;
    cfg.paths = 2; cfg.subpaths = 3; cfg.max_delay_tap = 2;
    cfg.trials = 3;
    cfg.seed = 11;
    cfg.snr_db = {5.0, 10.0};

    const TrialResult a = run_trial(cfg, 10.0, 100.0, EstimatorKind::Msmce, 1, 0);
    const TrialResult b = run_trial(cfg, 10.0, 100.0, EstimatorKind::Msmce, 1, 0);
    CHECK(a.nmse == b.nmse);
    const TrialResult c = run_trial(cfg, 10.0, 100.0, EstimatorKind::Msmce, 2, 0);
    CHECK(a.nmse != c.nmse); // trial index moves the stream

    std::stringstream s1, s2;
    write_csv(s1, run_sweep(cfg));
    write_csv(s2, run_sweep(cfg));
    CHECK(s1.str() == s2.str());
    cfg.seed = 12;
    std::stringstream s3;
    write_csv(s3, run_sweep(cfg));
    CHECK(s1.str() != s3.str());
}

TEST_CASE("built-in verification passes") {
    for (const auto& [name, ok] : run_verification(1)) {
        INFO(name);
        CHECK(ok);
    }
}
