#include "otfs/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otfs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unitary DFT matrix, W[a,b] = e^{-j 2 pi a b / L} / sqrt(L)
Mat dft_matrix(int L) {
    Mat w(L, L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            w(a, b) = std::polar(1.0 / std::sqrt(double(L)), -kTwoPi * a * b / L);
    return w;
}

} // namespace

OtfsGrid::OtfsGrid(int m_, int n_, int m_cp_, double delta_f_, int n_t_)
    : m(m_), n(n_), m_cp(m_cp_), delta_f(delta_f_), n_t(n_t_) {
    if (m <= 0 || n <= 0) throw std::invalid_argument("OtfsGrid: M and N must be positive");
    if (m_cp < 0) throw std::invalid_argument("OtfsGrid: M_CP must be >= 0");
    if (delta_f <= 0.0) throw std::invalid_argument("OtfsGrid: delta_f must be positive");
    if (n_t <= 0 || n_t % 2 != 0) throw std::invalid_argument("OtfsGrid: N_t must be a positive even integer");
}

void PilotLayout::validate(const OtfsGrid& g) const {
    if (m_p <= 0 || n_p <= 0 || m_g <= 0 || n_g <= 0)
        throw std::invalid_argument("PilotLayout: block and guard sizes must be positive");
    if (m_p < m_g || n_p < n_g)
        throw std::invalid_argument("PilotLayout: requires M_p >= M_g and N_p >= N_g");
    if (n_p > g.n || m_p > g.m)
        throw std::invalid_argument("PilotLayout: pilot block exceeds the grid");
    if (k_p < g.k_min() || k_p + n_p - 1 > g.k_min() + g.n - 1)
        throw std::invalid_argument("PilotLayout: Doppler pilot range outside the grid");
    if (l_p < 0 || l_p + m_p > g.m)
        throw std::invalid_argument("PilotLayout: delay pilot range outside the grid");
}

TFGrid isfft(const DDGrid& x_dd, const OtfsGrid& grid) {
    if (x_dd.v.rows() != grid.n || x_dd.v.cols() != grid.m)
        throw std::invalid_argument("isfft: grid dimension mismatch");
    const int N = grid.n, M = grid.m, h = N / 2;
    // X^TF[n,m] = (1/sqrt(MN)) sum_{k,l} X^DD[k,l] e^{-j2pi(ml/M - nk/N)}
    // storage row r = k + floor(N/2): inverse DFT along Doppler, forward along delay
    Mat wn = dft_matrix(N);
    Mat wm = dft_matrix(M);
    Mat out = wn.adjoint() * x_dd.v * wm;
    for (int nn = 0; nn < N; ++nn)
        out.row(nn) *= std::polar(1.0, -kTwoPi * nn * h / N);
    return TFGrid{std::move(out)};
}

DDGrid sfft(const TFGrid& y_tf, const OtfsGrid& grid) {
    if (y_tf.v.rows() != grid.n || y_tf.v.cols() != grid.m)
        throw std::invalid_argument("sfft: grid dimension mismatch");
    const int N = grid.n, M = grid.m, h = N / 2;
    Mat wn = dft_matrix(N);
    Mat wm = dft_matrix(M);
    Mat tmp = y_tf.v;
    for (int nn = 0; nn < N; ++nn)
        tmp.row(nn) *= std::polar(1.0, kTwoPi * nn * h / N);
    Mat out = wn * tmp * wm.adjoint();
    return DDGrid{std::move(out)};
}

cplx xi_kernel(double x, int L) {
    if (L <= 0) throw std::invalid_argument("xi_kernel: L must be positive");
    cplx acc(0.0, 0.0);
    for (int i = 0; i < L; ++i)
        acc += std::polar(1.0, -kTwoPi * x * i / L);
    return acc / double(L);
}

int row_index(int k, int l, const PilotLayout& layout) {
    if (k < layout.k_p || k >= layout.k_p + layout.n_p)
        throw std::out_of_range("row_index: Doppler index outside the pilot block");
    if (l < layout.l_p || l >= layout.l_p + layout.m_p)
        throw std::out_of_range("row_index: delay index outside the pilot block");
    return (l - layout.l_p) * layout.n_p + (k - layout.k_p);
}

int col_index(int k_prime, int l_prime, int b, const PilotLayout& layout,
              const OtfsGrid& grid) {
    const int half_ng = layout.n_g / 2;
    if (k_prime < layout.kprime_min() || k_prime + half_ng >= layout.n_g)
        throw std::out_of_range("col_index: k' outside the Doppler support window");
    if (l_prime < 0 || l_prime >= layout.m_g)
        throw std::out_of_range("col_index: l' outside the delay support window");
    if (b < -grid.n_t / 2 || b >= grid.n_t / 2)
        throw std::out_of_range("col_index: beam index out of range");
    return (b + grid.n_t / 2) * layout.m_g * layout.n_g + l_prime * layout.n_g +
           (k_prime + half_ng);
}

} // namespace otfs
