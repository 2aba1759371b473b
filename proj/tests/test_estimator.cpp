#include <doctest.h>

#include <limits>
#include <random>
#include <sstream>

#include "otfs/channel.hpp"
#include "otfs/estimator.hpp"
#include "otfs/modem.hpp"
#include "otfs/pilot.hpp"
#include "otfs/rng.hpp"

using namespace otfs;

namespace {

Mat random_dict(int rows, int cols, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x6f6d70);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat a(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) a(r, c) = cplx(gauss(rng), gauss(rng));
    return a;
}

} // namespace

TEST_CASE("omp recovers sparse vectors exactly without noise") {
    const Mat a = random_dict(40, 80, 3);
    Vec h = Vec::Zero(80);
    h(5) = cplx(1.0, -0.5);
    h(41) = cplx(-0.3, 0.2);
    h(66) = cplx(0.0, 2.0);
    const Vec y = a * h;
    OmpStop stop;
    stop.residual_ratio = 1e-10;
    const ChannelEstimate est = omp_solve(a, y, stop);
    CHECK(est.support.size() == 3);
    CHECK((est.h_hat - h).norm() < 1e-10);
    CHECK(est.residual_norm < 1e-10 * y.norm());
    CHECK_FALSE(est.rank_deficient);
}

TEST_CASE("omp edge cases") {
    const Mat a = random_dict(10, 4, 5);
    OmpStop stop;
    // zero observation: empty support, zero estimate
    const ChannelEstimate z = omp_solve(a, Vec::Zero(10), stop);
    CHECK(z.support.empty());
    CHECK(z.h_hat.norm() == 0.0);

    // single active column
    Vec y = a.col(2) * cplx(2.0, 1.0);
    stop.residual_ratio = 1e-10;
    const ChannelEstimate one = omp_solve(a, y, stop);
    REQUIRE(one.support.size() == 1);
    CHECK(one.support[0] == 2);
    CHECK(std::abs(one.h_hat(2) - cplx(2.0, 1.0)) < 1e-12);

    // iteration cap is respected
    stop.max_iters = 2;
    stop.residual_ratio = 0.0;
    const ChannelEstimate capped = omp_solve(a, a * Vec::Ones(4), stop);
    CHECK(capped.support.size() <= 2);

    CHECK_THROWS(omp_solve(a, Vec::Zero(9), stop)); // length mismatch
    Mat with_zero = a;
    with_zero.col(1).setZero();
    CHECK_THROWS(omp_solve(with_zero, y, stop));
}

TEST_CASE("omp flags dependent columns instead of diverging") {
    Mat a = random_dict(10, 6, 7);
    a.col(3) = a.col(0); // exact duplicate
    Vec y = a.col(0) * cplx(1.0, 0.0);
    OmpStop stop;
    stop.residual_ratio = 0.0;
    stop.max_iters = 6;
    const ChannelEstimate est = omp_solve(a, y, stop);
    // it may stop at the noise floor first; if it tried the duplicate it must flag
    if (est.rank_deficient) CHECK(est.support.size() >= 1);
    for (std::size_t i = 0; i < est.support.size(); ++i)
        for (std::size_t j = i + 1; j < est.support.size(); ++j)
            CHECK(est.support[i] != est.support[j]);
}

TEST_CASE("omp estimate scales linearly with the observation") {
    const Mat a = random_dict(30, 50, 9);
    Vec h = Vec::Zero(50);
    h(7) = cplx(1.0, 1.0);
    h(22) = cplx(0.5, -0.1);
    OmpStop stop;
    stop.residual_ratio = 1e-10;
    const ChannelEstimate e1 = omp_solve(a, a * h, stop);
    const ChannelEstimate e2 = omp_solve(a, a * (h * cplx(0.0, 3.0)), stop);
    CHECK(e1.support == e2.support);
    CHECK((e2.h_hat - e1.h_hat * cplx(0.0, 3.0)).norm() < 1e-9);
}

TEST_CASE("two-bin interpolation recovers the fractional Doppler") {
    const OtfsGrid g(16, 8, 4, 15e3, 2);
    const PilotLayout layout{-4, 0, 5, 7, 4, 3};
    ChannelEstimate est;
    est.h_hat = Vec::Zero(layout.cols(g));
    // single path at delay 1: mass 0.8 on k'=0 and 0.2 on k'=1 -> k~ = 0.2
    est.h_hat(col_index(0, 1, 0, layout, g)) = cplx(0.8, 0.0);
    est.h_hat(col_index(1, 1, 0, layout, g)) = cplx(0.0, 0.2);
    const ExtractionResult res = extract_paths(est, layout, g, 0.05);
    REQUIRE(res.info.del.size() >= 1);
    CHECK(res.info.del[0] == 1);
    CHECK(res.info.dop[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(res.comparisons > 0);

    ChannelEstimate empty;
    empty.h_hat = Vec::Zero(layout.cols(g));
    CHECK(extract_paths(empty, layout, g, 0.05).info.empty());
}

TEST_CASE("extraction orders paths by energy and respects epsilon") {
    const OtfsGrid g(16, 8, 4, 15e3, 2);
    const PilotLayout layout{-4, 0, 5, 7, 4, 3};
    ChannelEstimate est;
    est.h_hat = Vec::Zero(layout.cols(g));
    est.h_hat(col_index(-1, 2, 0, layout, g)) = cplx(10.0, 0.0);
    est.h_hat(col_index(1, 0, -1, layout, g)) = cplx(0.0, 3.0);
    const ExtractionResult res = extract_paths(est, layout, g, 0.05);
    REQUIRE(res.info.del.size() == 2);
    CHECK(res.info.del[0] == 2);
    CHECK(res.info.dop[0] == doctest::Approx(-1.0));
    CHECK(res.info.del[1] == 0);
    CHECK(res.info.dop[1] == doctest::Approx(1.0));

    // a large epsilon stops after the dominant path
    const ExtractionResult coarse = extract_paths(est, layout, g, 0.5);
    CHECK(coarse.info.del.size() == 1);
    // comparison count stays linear in the window sizes per extracted path
    CHECK(res.comparisons <= 2 * 2 * (layout.m_g + 2 * layout.n_g));
}

TEST_CASE("two-stage estimation is exact in the noiseless full-window regime") {
    const OtfsGrid g(32, 7, 8, 15e3, 2);
    const PilotLayout layout{g.k_min(), 4, 7, 7, 7, 3};
    const ChannelRealization ch = generate_channel(g, 2, 1, 120.0, 4e9, 2, 17);
    const PilotFrame frame = assemble_frame(design_pilots(layout, g.n_t), layout, {}, g);
    const std::vector<DDGrid> x_dds = beam_to_space(frame, g);
    TimeSignal tx{Mat(g.n_t, g.samples_per_frame())};
    for (int nt = 0; nt < g.n_t; ++nt)
        tx.s.row(nt) = ofdm_modulate(isfft(x_dds[std::size_t(nt)], g), g).transpose();
    const DDGrid y_dd = sfft(ofdm_demodulate(apply_channel(tx, ch), g), g);

    EstimatorInputs in{build_pilot_matrix(frame, layout, g),
                       extract_received(y_dd, layout, g), layout, g};
    OmpStop stop;
    stop.residual_ratio = 1e-9;

    const MsmceResult two_stage = msmce(in, {}, stop, 0.05);
    const BeamChannelVector h = ground_truth_hddb(ch, layout);
    // blind two-stage recovery: limited only by the interpolated Doppler phase
    CHECK((two_stage.estimate.h_hat - h.h).norm() < 0.05 * h.h.norm());
    CHECK_FALSE(two_stage.used_fallback);
    // extracted geometry matches the generator
    for (const auto& p : ch.paths) {
        bool found = false;
        for (std::size_t i = 0; i < two_stage.path_info.del.size(); ++i)
            if (two_stage.path_info.del[i] == p.delay_tap) {
                found = true;
                CHECK(std::abs(two_stage.path_info.dop[i] -
                               ch.doppler_tap(p.subpaths[0])) < 0.1);
            }
        CHECK(found);
    }

    // a supplied prior skips the first stage and is deterministic; with the
    // exact path geometry the refinement is exact
    PathInfo exact_info;
    for (const auto& p : ch.paths) {
        exact_info.del.push_back(p.delay_tap);
        exact_info.dop.push_back(ch.doppler_tap(p.subpaths[0]));
    }
    const MsmceResult a = msmce(in, exact_info, stop, 0.05);
    const MsmceResult b = msmce(in, exact_info, stop, 0.05);
    CHECK((a.estimate.h_hat - b.estimate.h_hat).norm() == 0.0);
    CHECK((a.estimate.h_hat - h.h).norm() < 1e-6 * h.h.norm());

    // the single-stage baseline lacks the per-path delay phase, so with
    // fractional taps its fit is close but not exact
    const ChannelEstimate base = ismce(in, stop);
    CHECK(base.residual_norm < 0.3 * in.y.norm());
    CHECK((base.h_hat - h.h).norm() > (a.estimate.h_hat - h.h).norm());
}

TEST_CASE("path-aware and path-agnostic solutions coincide on integer Doppler taps") {
    const OtfsGrid g(32, 7, 8, 15e3, 2);
    const PilotLayout layout{g.k_min(), 4, 7, 7, 7, 3};
    const double hz_per_tap = 1.0 / (g.n * g.t_sym());
    ChannelRealization ch{{DominantPath{0, {Subpath{cplx(0.7, 0.1), 2.0 * hz_per_tap, 0.3}}},
                           DominantPath{2, {Subpath{cplx(-0.2, 0.5), -1.0 * hz_per_tap, -0.4}}}},
                          g};
    const PilotFrame frame = assemble_frame(design_pilots(layout, g.n_t), layout, {}, g);
    const Mat x = build_pilot_matrix(frame, layout, g);
    PathInfo info{{0, 2}, {2.0, -1.0}};
    const Mat theta_aware = build_phi(info, layout, g).cwiseProduct(x);
    const Mat theta_agnostic = build_phi_tilde(layout, g).cwiseProduct(x);
    // on the support columns (k' equal to the integer tap) the two sensing
    // matrices are identical, so the restricted least squares must agree
    for (int b = -1; b < 1; ++b) {
        CHECK((theta_aware.col(col_index(2, 0, b, layout, g)) -
               theta_agnostic.col(col_index(2, 0, b, layout, g)))
                  .norm() < 1e-14);
        CHECK((theta_aware.col(col_index(-1, 2, b, layout, g)) -
               theta_agnostic.col(col_index(-1, 2, b, layout, g)))
                  .norm() < 1e-14);
    }
}

TEST_CASE("path info replay round trip") {
    PathInfo info{{0, 3, 1}, {0.25, -1.75, 2.0}};
    std::stringstream ss;
    save_path_info(ss, info);
    const PathInfo back = load_path_info(ss);
    CHECK(back.del == info.del);
    REQUIRE(back.dop.size() == info.dop.size());
    for (std::size_t i = 0; i < info.dop.size(); ++i)
        CHECK(back.dop[i] == doctest::Approx(info.dop[i]).epsilon(1e-15));
}
