#pragma once

#include <complex>
#include <Eigen/Dense>

// Core OTFS lattice definitions: grid parameters, the delay-Doppler and
// time-frequency grids, the ISFFT/SFFT pair, the Xi leakage kernel and the
// canonical vectorization index maps shared by every other module.

namespace otfs {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// x mod m, result in [0, m)
inline int mod_pos(int x, int m) {
    int r = x % m;
    return r < 0 ? r + m : r;
}

// <x>_n : mod n recentered to [-floor(n/2), ceil(n/2)-1]
inline int mod_centered(int x, int n) {
    return mod_pos(x + n / 2, n) - n / 2;
}

struct OtfsGrid {
    int m;          // subcarriers / delay bins
    int n;          // OFDM symbols per OTFS block / Doppler bins
    int m_cp;       // cyclic prefix length in samples
    double delta_f; // subcarrier spacing, Hz
    int n_t;        // BS antennas (even)

    OtfsGrid(int m_, int n_, int m_cp_, double delta_f_, int n_t_);

    double t_s() const { return 1.0 / (m * delta_f); }          // sample interval
    double t_sym() const { return (m + m_cp) * t_s(); }         // symbol incl. CP
    double t_useful() const { return m * t_s(); }               // symbol excl. CP
    int samples_per_frame() const { return n * (m + m_cp); }

    // lowest Doppler index ceil(-N/2); row 0 of a DDGrid
    int k_min() const { return -(n / 2); }
};

// Delay-Doppler grid, indexed [k, l] with k in [ceil(-N/2), ceil(N/2)-1].
// Storage row = k + floor(N/2).
struct DDGrid {
    Mat v; // N x M

    static DDGrid zeros(const OtfsGrid& g) { return DDGrid{Mat::Zero(g.n, g.m)}; }

    cplx& at(int k, int l, const OtfsGrid& g) { return v(k + g.n / 2, l); }
    cplx at(int k, int l, const OtfsGrid& g) const { return v(k + g.n / 2, l); }
};

// Time-frequency grid, indexed [n, m], both 0-based.
struct TFGrid {
    Mat v; // N x M

    static TFGrid zeros(const OtfsGrid& g) { return TFGrid{Mat::Zero(g.n, g.m)}; }
};

// Pilot placement in the delay-Doppler grid plus the guard-determined
// channel-support window sizes.
struct PilotLayout {
    int k_p; // initial Doppler position (in [ceil(-N/2), ...])
    int l_p; // initial delay position
    int n_p; // pilot length along Doppler
    int m_p; // pilot length along delay
    int n_g; // Doppler support window size
    int m_g; // delay support window size

    int rows() const { return m_p * n_p; }
    int cols(const OtfsGrid& g) const { return m_g * n_g * g.n_t; }
    int kprime_min() const { return -(n_g / 2); } // ceil(-N_g/2)

    void validate(const OtfsGrid& g) const;
};

TFGrid isfft(const DDGrid& x_dd, const OtfsGrid& grid);
DDGrid sfft(const TFGrid& y_tf, const OtfsGrid& grid);

// Xi_L(x) = (1/L) sum_{i=0}^{L-1} e^{-j 2 pi x i / L}
cplx xi_kernel(double x, int L);

// 0-based row of the measurement model for pilot cell (k, l)
int row_index(int k, int l, const PilotLayout& layout);

// 0-based column for channel coefficient (k', l', b),
// k' in [ceil(-N_g/2), ceil(N_g/2)-1], l' in [0, M_g), b in [-N_t/2, N_t/2)
int col_index(int k_prime, int l_prime, int b, const PilotLayout& layout,
              const OtfsGrid& grid);

} // namespace otfs
