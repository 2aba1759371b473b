#include "otfs/sensing.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace otfs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Mat build_pilot_matrix(const PilotFrame& frame, const PilotLayout& layout,
                       const OtfsGrid& grid) {
    layout.validate(grid);
    const int N = grid.n, M = grid.m, half = N / 2;
    // 1/sqrt(N): the channel vector is defined through the unitary DFT over
    // the symbol index, so the model reads Y = (1/sqrt(N)) (Phi o X) h
    const double scale = 1.0 / std::sqrt(double(N));
    Mat x(layout.rows(), layout.cols(grid));
    for (int bi = 0; bi < grid.n_t; ++bi) {
        const int b = bi - grid.n_t / 2;
        const Mat& beam = frame.beams[bi].v;
        for (int lp = 0; lp < layout.m_g; ++lp) {
            for (int kp = layout.kprime_min(); kp + layout.n_g / 2 < layout.n_g; ++kp) {
                const int c = col_index(kp, lp, b, layout, grid);
                for (int l = layout.l_p; l < layout.l_p + layout.m_p; ++l)
                    for (int k = layout.k_p; k < layout.k_p + layout.n_p; ++k)
                        x(row_index(k, l, layout), c) =
                            scale * beam(mod_pos(k - kp + half, N), mod_pos(l - lp, M));
            }
        }
    }
    return x;
}

Mat build_phi_tilde(const PilotLayout& layout, const OtfsGrid& grid) {
    const double denom = double(grid.m + grid.m_cp) * grid.n;
    Mat phi(layout.rows(), layout.cols(grid));
    for (int bi = 0; bi < grid.n_t; ++bi) {
        const int b = bi - grid.n_t / 2;
        for (int lp = 0; lp < layout.m_g; ++lp) {
            for (int kp = layout.kprime_min(); kp + layout.n_g / 2 < layout.n_g; ++kp) {
                const int c = col_index(kp, lp, b, layout, grid);
                for (int l = layout.l_p; l < layout.l_p + layout.m_p; ++l) {
                    const cplx val = std::polar(1.0, kTwoPi * l * kp / denom);
                    for (int k = layout.k_p; k < layout.k_p + layout.n_p; ++k)
                        phi(row_index(k, l, layout), c) = val;
                }
            }
        }
    }
    return phi;
}

Mat build_phi(const PathInfo& path_info, const PilotLayout& layout, const OtfsGrid& grid) {
    if (path_info.del.size() != path_info.dop.size())
        throw std::invalid_argument("build_phi: Del and Dop must be position-paired");
    std::set<int> seen(path_info.del.begin(), path_info.del.end());
    if (seen.size() != path_info.del.size())
        throw std::invalid_argument("build_phi: duplicate delay taps in Del");

    const double denom = double(grid.m + grid.m_cp) * grid.n;
    std::vector<double> dop_of_lp(layout.m_g, 0.0);
    std::vector<bool> has_path(layout.m_g, false);
    for (std::size_t i = 0; i < path_info.del.size(); ++i) {
        const int lt = path_info.del[i];
        if (lt < 0 || lt >= layout.m_g)
            throw std::invalid_argument("build_phi: delay tap outside [0, M_g)");
        dop_of_lp[lt] = path_info.dop[i];
        has_path[lt] = true;
    }

    Mat phi = Mat::Ones(layout.rows(), layout.cols(grid));
    for (int bi = 0; bi < grid.n_t; ++bi) {
        const int b = bi - grid.n_t / 2;
        for (int lp = 0; lp < layout.m_g; ++lp) {
            if (!has_path[lp]) continue;
            for (int kp = layout.kprime_min(); kp + layout.n_g / 2 < layout.n_g; ++kp) {
                const int c = col_index(kp, lp, b, layout, grid);
                for (int l = layout.l_p; l < layout.l_p + layout.m_p; ++l) {
                    const cplx val = std::polar(1.0, kTwoPi * l * dop_of_lp[lp] / denom);
                    for (int k = layout.k_p; k < layout.k_p + layout.n_p; ++k)
                        phi(row_index(k, l, layout), c) = val;
                }
            }
        }
    }
    return phi;
}

Vec extract_received(const DDGrid& y_dd, const PilotLayout& layout, const OtfsGrid& grid) {
    if (y_dd.v.rows() != grid.n || y_dd.v.cols() != grid.m)
        throw std::invalid_argument("extract_received: grid dimension mismatch");
    Vec y(layout.rows());
    for (int l = layout.l_p; l < layout.l_p + layout.m_p; ++l)
        for (int k = layout.k_p; k < layout.k_p + layout.n_p; ++k)
            y(row_index(k, l, layout)) = y_dd.at(k, l, grid);
    return y;
}

CoherenceProfile coherence_profile(const Mat& a) {
    const Eigen::Index n = a.cols();
    Mat norm = a;
    for (Eigen::Index c = 0; c < n; ++c) {
        const double nn = norm.col(c).norm();
        if (nn <= 0.0)
            throw std::invalid_argument("coherence_profile: zero column");
        norm.col(c) /= nn;
    }
    Mat gram = norm.adjoint() * norm;
    CoherenceProfile out{0.0, {}};
    out.offdiag.reserve(std::size_t(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::abs(gram(i, j));
            out.offdiag.push_back(v);
            out.max_offdiag = std::max(out.max_offdiag, v);
        }
    return out;
}

double welch_bound(int n_rows, int n_cols) {
    if (n_rows < 1) throw std::invalid_argument("welch_bound: need n_rows >= 1");
    if (n_cols <= n_rows) return 0.0;
    return std::sqrt(double(n_cols - n_rows) / (double(n_cols - 1) * n_rows));
}

} // namespace otfs
