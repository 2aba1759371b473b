#include "otfs/modem.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "otfs/rng.hpp"

namespace otfs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat idft_matrix(int L) {
    Mat w(L, L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            w(a, b) = std::polar(1.0 / std::sqrt(double(L)), kTwoPi * a * b / L);
    return w;
}

// Shared core of the two DD operators; per_subpath_phase selects the exact
// per-subpath delay-position phase or the per-path representative one.
DDGrid dd_apply(const std::vector<DDGrid>& x_dds, const ChannelRealization& ch,
                const OtfsGrid& grid, bool per_subpath_phase) {
    if (int(x_dds.size()) != grid.n_t)
        throw std::invalid_argument("dd operator: need one DD grid per antenna");
    const int N = grid.n, M = grid.m, half = N / 2;
    const double ts = grid.t_s();
    DDGrid y = DDGrid::zeros(grid);

    for (const auto& path : ch.paths) {
        const int li = path.delay_tap;
        const double rep = representative_doppler_tap(path, grid);
        for (const auto& s : path.subpaths) {
            const double tap = ch.doppler_tap(s); // nu_s N T_sym
            const cplx base = s.gain * std::polar(1.0, kTwoPi * (grid.m_cp - li) * ts * s.doppler_hz);
            // Doppler leakage profile over one period of k'
            Vec leak(N);
            for (int kp = -half; kp < N - half; ++kp)
                leak(kp + half) = xi_kernel(kp - tap, N);
            for (int nt = 0; nt < grid.n_t; ++nt) {
                const cplx steer = base * std::polar(1.0, std::numbers::pi * nt * std::sin(s.aod_rad));
                const Mat& x = x_dds[nt].v;
                for (int l = 0; l < M; ++l) {
                    const double phase_tap = per_subpath_phase ? tap : rep;
                    const cplx coeff = steer *
                        std::polar(1.0, kTwoPi * l * phase_tap / (double(M + grid.m_cp) * N));
                    const int lsrc = mod_pos(l - li, M);
                    for (int k = -half; k < N - half; ++k) {
                        cplx acc(0.0, 0.0);
                        for (int kp = -half; kp < N - half; ++kp)
                            acc += leak(kp + half) * x(mod_centered(k - kp, N) + half, lsrc);
                        y.v(k + half, l) += coeff * acc;
                    }
                }
            }
        }
    }
    return y;
}

} // namespace

Vec ofdm_modulate(const TFGrid& x_tf, const OtfsGrid& grid) {
    if (x_tf.v.rows() != grid.n || x_tf.v.cols() != grid.m)
        throw std::invalid_argument("ofdm_modulate: grid dimension mismatch");
    const int M = grid.m, cp = grid.m_cp;
    Mat w = idft_matrix(M);
    Vec out(grid.samples_per_frame());
    for (int n = 0; n < grid.n; ++n) {
        Vec sym = w * x_tf.v.row(n).transpose();
        out.segment(n * (M + cp), cp) = sym.tail(cp);
        out.segment(n * (M + cp) + cp, M) = sym;
    }
    return out;
}

TFGrid ofdm_demodulate(const Vec& sig, const OtfsGrid& grid) {
    if (sig.size() != grid.samples_per_frame())
        throw std::invalid_argument("ofdm_demodulate: signal length mismatch");
    const int M = grid.m, cp = grid.m_cp;
    Mat w = idft_matrix(M).adjoint();
    TFGrid out = TFGrid::zeros(grid);
    for (int n = 0; n < grid.n; ++n)
        out.v.row(n) = (w * sig.segment(n * (M + cp) + cp, M)).transpose();
    return out;
}

Vec apply_channel(const TimeSignal& tx, const ChannelRealization& ch) {
    const OtfsGrid& g = ch.grid;
    if (tx.s.cols() != g.samples_per_frame())
        throw std::invalid_argument("apply_channel: signal length mismatch");
    if (ch.max_delay_tap() >= g.m_cp)
        throw std::invalid_argument("apply_channel: delay taps must be < M_CP");
    const int len = int(tx.s.cols());
    const int ants = int(tx.s.rows());
    const double ts = g.t_s();

    Vec rx = Vec::Zero(len);
    for (const auto& path : ch.paths) {
        const int l = path.delay_tap;
        for (const auto& s : path.subpaths) {
            // transmit combining via the steering vector
            Vec combined = Vec::Zero(len);
            for (int nt = 0; nt < ants; ++nt)
                combined += std::polar(1.0, std::numbers::pi * nt * std::sin(s.aod_rad)) *
                            tx.s.row(nt).transpose();
            for (int rho = l; rho < len; ++rho)
                rx(rho) += s.gain *
                           std::polar(1.0, kTwoPi * s.doppler_hz * (rho - l) * ts) *
                           combined(rho - l);
        }
    }
    return rx;
}

Vec add_noise(const Vec& sig, double snr_db, std::uint64_t rng_seed) {
    if (std::isinf(snr_db) && snr_db > 0) return sig;
    const double power = sig.squaredNorm() / double(sig.size());
    if (power <= 0.0)
        throw std::invalid_argument("add_noise: zero-power signal");
    const double var = power / std::pow(10.0, snr_db / 10.0);
    auto rng = make_rng(rng_seed, 0x6e6f697365ULL); // "noise"
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    Vec out = sig;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out(i) += cplx(gauss(rng), gauss(rng));
    return out;
}

double representative_doppler_tap(const DominantPath& path, const OtfsGrid& grid) {
    const double nts = grid.n * grid.t_sym();
    cplx acc(0.0, 0.0);
    double mean = 0.0, wsum = 0.0;
    for (const auto& s : path.subpaths) {
        const double tap = s.doppler_hz * nts;
        const double w = std::abs(s.gain);
        acc += w * std::polar(1.0, kTwoPi * tap / grid.n);
        mean += w * tap;
        wsum += w;
    }
    if (std::abs(acc) < 1e-12 * (wsum > 0 ? wsum : 1.0))
        return wsum > 0 ? mean / wsum : 0.0; // degenerate: arithmetic mean
    double rep = std::arg(acc) * grid.n / kTwoPi; // in (-N/2, N/2]
    // unwrap toward the arithmetic mean so taps beyond +-N/2 stay faithful
    if (wsum > 0) {
        const double target = mean / wsum;
        while (rep - target > grid.n / 2.0) rep -= grid.n;
        while (target - rep > grid.n / 2.0) rep += grid.n;
    }
    return rep;
}

DDGrid dd_oracle(const std::vector<DDGrid>& x_dds, const ChannelRealization& ch,
                 const OtfsGrid& grid) {
    return dd_apply(x_dds, ch, grid, true);
}

DDGrid dd_simplified(const std::vector<DDGrid>& x_dds, const ChannelRealization& ch,
                     const OtfsGrid& grid) {
    return dd_apply(x_dds, ch, grid, false);
}

} // namespace otfs
