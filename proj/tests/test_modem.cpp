#include <doctest.h>

#include <limits>
#include <numbers>
#include <random>

#include "otfs/lattice.hpp"
#include "otfs/modem.hpp"
#include "otfs/rng.hpp"

using namespace otfs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TFGrid random_tf(const OtfsGrid& g, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x7466);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TFGrid x = TFGrid::zeros(g);
    for (int r = 0; r < g.n; ++r)
        for (int c = 0; c < g.m; ++c) x.v(r, c) = cplx(gauss(rng), gauss(rng));
    return x;
}

std::vector<DDGrid> random_dds(const OtfsGrid& g, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x6464);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<DDGrid> xs(std::size_t(g.n_t), DDGrid::zeros(g));
    for (auto& x : xs)
        for (int r = 0; r < g.n; ++r)
            for (int c = 0; c < g.m; ++c) x.v(r, c) = cplx(gauss(rng), gauss(rng));
    return xs;
}

DDGrid through_chain(const std::vector<DDGrid>& xs, const ChannelRealization& ch) {
    const OtfsGrid& g = ch.grid;
    TimeSignal tx{Mat(g.n_t, g.samples_per_frame())};
    for (int nt = 0; nt < g.n_t; ++nt)
        tx.s.row(nt) = ofdm_modulate(isfft(xs[std::size_t(nt)], g), g).transpose();
    return sfft(ofdm_demodulate(apply_channel(tx, ch), g), g);
}

} // namespace

TEST_CASE("ofdm modulator prepends the symbol tail as cyclic prefix") {
    const OtfsGrid g(16, 3, 5, 15e3, 2);
    const TFGrid tf = random_tf(g, 1);
    const Vec sig = ofdm_modulate(tf, g);
    REQUIRE(sig.size() == g.samples_per_frame());
    for (int n = 0; n < g.n; ++n) {
        const int base = n * (g.m + g.m_cp);
        for (int i = 0; i < g.m_cp; ++i)
            CHECK(std::abs(sig(base + i) - sig(base + g.m + i)) < 1e-14);
    }
    const TFGrid back = ofdm_demodulate(sig, g);
    CHECK((back.v - tf.v).norm() < 1e-12 * tf.v.norm());
}

TEST_CASE("apply_channel is a Doppler-weighted tapped delay line") {
    const OtfsGrid g(16, 2, 4, 15e3, 2);
    ChannelRealization ch{{DominantPath{3, {Subpath{cplx(0.8, 0.1), 450.0, 0.4}}}}, g};
    TimeSignal tx{Mat(g.n_t, g.samples_per_frame())};
    auto rng = make_rng(3, 0x7478);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int nt = 0; nt < g.n_t; ++nt)
        for (int i = 0; i < g.samples_per_frame(); ++i)
            tx.s(nt, i) = cplx(gauss(rng), gauss(rng));
    const Vec rx = apply_channel(tx, ch);
    const Subpath& s = ch.paths[0].subpaths[0];
    for (int rho = 0; rho < g.samples_per_frame(); ++rho) {
        cplx expect(0.0, 0.0);
        if (rho >= 3) {
            cplx combined(0.0, 0.0);
            for (int nt = 0; nt < g.n_t; ++nt)
                combined += std::polar(1.0, std::numbers::pi * nt * std::sin(s.aod_rad)) *
                            tx.s(nt, rho - 3);
            expect = s.gain * std::polar(1.0, kTwoPi * s.doppler_hz * (rho - 3) * g.t_s()) *
                     combined;
        }
        CHECK(std::abs(rx(rho) - expect) < 1e-12);
    }
}

TEST_CASE("add_noise hits the requested SNR and is reproducible") {
    const OtfsGrid g(64, 16, 16, 15e3, 2);
    Vec sig = Vec::Ones(g.samples_per_frame());
    const Vec a = add_noise(sig, 10.0, 77);
    const Vec b = add_noise(sig, 10.0, 77);
    CHECK((a - b).norm() == 0.0);
    const double noise_power = (a - sig).squaredNorm() / double(sig.size());
    CHECK(noise_power == doctest::Approx(0.1).epsilon(0.15)); // 10 dB below unit power
    const double inf = std::numeric_limits<double>::infinity();
    CHECK((add_noise(sig, inf, 77) - sig).norm() == 0.0);
}

TEST_CASE("representative doppler tap averages subpath taps") {
    const OtfsGrid g(16, 8, 4, 15e3, 2);
    const double hz_per_tap = 1.0 / (g.n * g.t_sym());
    DominantPath p{0, {Subpath{cplx(1.0, 0.0), 1.3 * hz_per_tap, 0.0}}};
    CHECK(representative_doppler_tap(p, g) == doctest::Approx(1.3).epsilon(1e-12));
    p.subpaths.push_back(Subpath{cplx(1.0, 0.0), 1.5 * hz_per_tap, 0.0});
    CHECK(representative_doppler_tap(p, g) == doctest::Approx(1.4).epsilon(1e-9));
}

TEST_CASE("transceiver chain matches the exact delay-Doppler operator") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const OtfsGrid g(16, 4, 4, 15e3, 2);
        const ChannelRealization ch =
            generate_channel(g, 1 + int(seed) % 3, 1 + int(seed) % 3, 130.0, 4e9, 3, seed);
        const std::vector<DDGrid> xs = random_dds(g, seed);
        const DDGrid via_chain = through_chain(xs, ch);
        const DDGrid direct = dd_oracle(xs, ch, g);
        CHECK((via_chain.v - direct.v).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("simplified operator coincides with the exact one for single subpaths") {
    const OtfsGrid g(16, 4, 4, 15e3, 2);
    const ChannelRealization ch = generate_channel(g, 3, 1, 130.0, 4e9, 3, 12);
    const std::vector<DDGrid> xs = random_dds(g, 12);
    const DDGrid exact = dd_oracle(xs, ch, g);
    const DDGrid simple = dd_simplified(xs, ch, g);
    CHECK((exact.v - simple.v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simplified operator stays close under small subpath spread") {
    const OtfsGrid g(16, 4, 4, 15e3, 2);
    const ChannelRealization ch = generate_channel(g, 2, 8, 130.0, 4e9, 3, 13);
    const std::vector<DDGrid> xs = random_dds(g, 13);
    const DDGrid exact = dd_oracle(xs, ch, g);
    const DDGrid simple = dd_simplified(xs, ch, g);
    CHECK((exact.v - simple.v).norm() < 0.1 * exact.v.norm());
}
