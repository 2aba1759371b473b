#include "otfs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "otfs/rng.hpp"

namespace otfs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngularSpreadRad = 2.0 * std::numbers::pi / 180.0; // 2 degrees

double clamp_aod(double phi) {
    const double half = std::numbers::pi / 2.0;
    // reflect back into [-pi/2, pi/2); spreads are tiny so one pass suffices
    if (phi >= half) phi = half - (phi - half) - 1e-9;
    if (phi < -half) phi = -half + (-half - phi);
    return phi;
}
} // namespace

int ChannelRealization::max_delay_tap() const {
    int mx = 0;
    for (const auto& p : paths) mx = std::max(mx, p.delay_tap);
    return mx;
}

ChannelRealization generate_channel(const OtfsGrid& grid, int p_paths, int s_subpaths,
                                    double velocity_mps, double carrier_hz,
                                    int max_delay_tap, std::uint64_t rng_seed) {
    if (p_paths < 1 || s_subpaths < 1)
        throw std::invalid_argument("generate_channel: need P >= 1 and S >= 1");
    if (max_delay_tap >= grid.m_cp)
        throw std::invalid_argument("generate_channel: max delay tap must be < M_CP");
    if (p_paths > max_delay_tap + 1)
        throw std::invalid_argument("generate_channel: more paths than available delay taps");

    auto rng = make_rng(rng_seed, 0x6368616e6e656cULL); // "channel"
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, kAngularSpreadRad);

    // distinct delay taps, uniform without replacement
    std::vector<int> taps(max_delay_tap + 1);
    for (int i = 0; i <= max_delay_tap; ++i) taps[i] = i;
    for (int i = max_delay_tap; i > 0; --i) {
        int j = int(unit(rng) * (i + 1));
        if (j > i) j = i;
        std::swap(taps[i], taps[j]);
    }
    taps.resize(p_paths);

    const double nu_max = velocity_mps * carrier_hz / kSpeedOfLight;
    const double amp = 1.0 / std::sqrt(double(s_subpaths) * double(p_paths));

    ChannelRealization ch{{}, grid};
    ch.paths.reserve(p_paths);
    for (int i = 0; i < p_paths; ++i) {
        DominantPath path;
        path.delay_tap = taps[i];
        const double theta = kTwoPi * unit(rng);                       // travel angle
        const double aod = std::numbers::pi * (unit(rng) - 0.5);       // central AoD
        path.subpaths.reserve(s_subpaths);
        for (int s = 0; s < s_subpaths; ++s) {
            Subpath sp;
            sp.gain = std::polar(amp, kTwoPi * unit(rng));
            sp.doppler_hz = nu_max * std::cos(theta + gauss(rng));
            sp.aod_rad = clamp_aod(aod + gauss(rng));
            path.subpaths.push_back(sp);
        }
        ch.paths.push_back(std::move(path));
    }
    return ch;
}

cplx sample_gain(const ChannelRealization& ch, int rho, int l) {
    cplx acc(0.0, 0.0);
    const double ts = ch.grid.t_s();
    for (const auto& p : ch.paths) {
        if (p.delay_tap != l) continue;
        for (const auto& s : p.subpaths)
            acc += s.gain * std::polar(1.0, kTwoPi * (rho - l) * ts * s.doppler_hz);
    }
    return acc;
}

std::vector<Mat> dds_channel(const ChannelRealization& ch) {
    const OtfsGrid& g = ch.grid;
    const int N = g.n, M = g.m, half = N / 2;
    std::vector<Mat> out(g.n_t, Mat::Zero(N, M));
    const double ts = g.t_s();
    for (const auto& p : ch.paths) {
        const int l = p.delay_tap;
        for (const auto& s : p.subpaths) {
            // DFT over j of e^{j 2 pi (M_CP + j(M+M_CP) - l) T_s nu}:
            // closed form sqrt(N) * Xi_N(k - N T_sym nu) * e^{j 2 pi (M_CP - l) T_s nu}
            const double tap = ch.doppler_tap(s);
            const cplx base = s.gain * std::polar(1.0, kTwoPi * (g.m_cp - l) * ts * s.doppler_hz);
            for (int nt = 0; nt < g.n_t; ++nt) {
                const cplx steer = std::polar(1.0, std::numbers::pi * nt * std::sin(s.aod_rad));
                for (int k = -half; k < N - half; ++k)
                    out[nt](k + half, l) +=
                        base * steer * std::sqrt(double(N)) * xi_kernel(k - tap, N);
            }
        }
    }
    return out;
}

BeamChannelVector ground_truth_hddb(const ChannelRealization& ch, const PilotLayout& layout) {
    const OtfsGrid& g = ch.grid;
    layout.validate(g);
    if (layout.m_g <= ch.max_delay_tap())
        throw std::invalid_argument("ground_truth_hddb: M_g must exceed the maximum delay tap");

    std::vector<Mat> dds = dds_channel(ch);

    BeamChannelVector out{Vec::Zero(layout.cols(g)), layout};
    const int half = g.n / 2;
    for (int b = -g.n_t / 2; b < g.n_t / 2; ++b) {
        for (int lp = 0; lp < layout.m_g; ++lp) {
            for (int kp = layout.kprime_min(); kp + layout.n_g / 2 < layout.n_g; ++kp) {
                cplx acc(0.0, 0.0);
                for (int nt = 0; nt < g.n_t; ++nt)
                    acc += dds[nt](kp + half, lp) *
                           std::polar(1.0, -kTwoPi * double(b) * nt / g.n_t);
                out.h(col_index(kp, lp, b, layout, g)) = acc / std::sqrt(double(g.n_t));
            }
        }
    }
    return out;
}

void save_channel(std::ostream& os, const ChannelRealization& ch) {
    os.precision(17);
    for (std::size_t i = 0; i < ch.paths.size(); ++i)
        for (const auto& s : ch.paths[i].subpaths)
            os << i << ' ' << ch.paths[i].delay_tap << ' ' << s.gain.real() << ' '
               << s.gain.imag() << ' ' << s.doppler_hz << ' ' << s.aod_rad << '\n';
}

ChannelRealization load_channel(std::istream& is, const OtfsGrid& grid) {
    std::map<int, DominantPath> by_id;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int id, tap;
        double re, im, dop, aod;
        if (!(ss >> id >> tap >> re >> im >> dop >> aod))
            throw std::runtime_error("load_channel: malformed record: " + line);
        auto& p = by_id[id];
        p.delay_tap = tap;
        p.subpaths.push_back(Subpath{cplx(re, im), dop, aod});
    }
    ChannelRealization ch{{}, grid};
    for (auto& [id, p] : by_id) ch.paths.push_back(std::move(p));
    if (ch.paths.empty()) throw std::runtime_error("load_channel: no records");
    return ch;
}

} // namespace otfs
