#include "otfs/pilot.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "otfs/rng.hpp"

namespace otfs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_prime(int x) {
    if (x < 2) return false;
    for (int d = 2; d * d <= x; ++d)
        if (x % d == 0) return false;
    return true;
}

int nearest_prime(int x) {
    for (int d = 0;; ++d) {
        if (is_prime(x - d)) return x - d;
        if (is_prime(x + d)) return x + d;
    }
}
} // namespace

Vec zc_sequence(int L, int r, int c) {
    if (L < 1) throw std::invalid_argument("zc_sequence: L must be >= 1");
    if (r < 1 || r >= L || std::gcd(r, L) != 1)
        throw std::invalid_argument("zc_sequence: root must satisfy 1 <= r < L, gcd(r, L) = 1");
    if (c < 0 || c >= L) throw std::invalid_argument("zc_sequence: shift must be in [0, L)");
    Vec z(L);
    const int parity = L % 2;
    for (int k = 0; k < L; ++k) {
        const int q = mod_pos(k - c, L);
        z(k) = std::polar(1.0 / std::sqrt(double(L)),
                          std::numbers::pi * r * q * (q + parity) / double(L));
    }
    return z;
}

Mat design_pilots(const PilotLayout& layout, int n_t) {
    const int mp = layout.m_p, np = layout.n_p;
    if (n_t < 1) throw std::invalid_argument("design_pilots: N_t must be >= 1");
    if (!is_prime(mp) || !is_prime(np)) {
        std::ostringstream msg;
        msg << "design_pilots: M_p and N_p must be prime for the deterministic design "
            << "(got " << mp << ", " << np << "; nearest primes " << nearest_prime(mp)
            << ", " << nearest_prime(np) << ")";
        throw std::invalid_argument(msg.str());
    }
    const int eta_del = mp / layout.m_g;
    const int eta_dop = np / layout.n_g;
    const int per_group = eta_del * eta_dop;
    // root pairs start at (M_p-1, N_p-1) and decrement per group; prime
    // lengths keep every value in [1, L) a valid root
    const int max_groups = std::min(mp - 1, np - 1);
    if ((n_t + per_group - 1) / per_group > max_groups) {
        std::ostringstream msg;
        msg << "design_pilots: root exhaustion, at most " << max_groups * per_group
            << " beams supported for this layout (requested " << n_t << ")";
        throw std::invalid_argument(msg.str());
    }

    Mat out(mp * np, n_t);
    for (int b = 0; b < n_t; ++b) {
        const int g = b / per_group;
        const int i = (b % per_group) / eta_dop;
        const int j = b % eta_dop;
        const Vec zm = zc_sequence(mp, mp - 1 - g, i * layout.m_g);
        const Vec zn = zc_sequence(np, np - 1 - g, j * layout.n_g);
        // delay-major Kronecker: row (l - l_p) * N_p + (k - k_p)
        for (int l = 0; l < mp; ++l)
            for (int k = 0; k < np; ++k)
                out(l * np + k, b) = zm(l) * zn(k);
    }
    return out;
}

Mat random_pilots(const PilotLayout& layout, int n_t, std::uint64_t rng_seed) {
    auto rng = make_rng(rng_seed, 0x70696c6f7473ULL); // "pilots"
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat out(layout.rows(), n_t);
    for (int b = 0; b < n_t; ++b) {
        for (int r = 0; r < layout.rows(); ++r)
            out(r, b) = cplx(gauss(rng), gauss(rng));
        out.col(b).normalize();
    }
    return out;
}

PilotFrame assemble_frame(const Mat& pilots, const PilotLayout& layout,
                          const std::vector<DDGrid>& data, const OtfsGrid& grid) {
    layout.validate(grid);
    if (pilots.rows() != layout.rows() || pilots.cols() != grid.n_t)
        throw std::invalid_argument("assemble_frame: pilot matrix must be M_p*N_p x N_t");
    if (!data.empty() && int(data.size()) != grid.n_t)
        throw std::invalid_argument("assemble_frame: need one data grid per beam (or none)");

    const int N = grid.n, M = grid.m, half = N / 2;
    const bool full_doppler = (layout.n_p == N);
    const int e = full_doppler ? 0 : (layout.n_g + 1) / 2; // ceil(N_g/2)

    if (!full_doppler && layout.n_p + 4 * e > N)
        throw std::invalid_argument("assemble_frame: pilot + extension + guard footprint exceeds N");
    if (layout.m_p + 2 * layout.m_g > M)
        throw std::invalid_argument("assemble_frame: pilot + extension + guard footprint exceeds M");

    PilotFrame frame;
    frame.kind.setConstant(N, M, (unsigned char)CellKind::Data);
    frame.beams.reserve(grid.n_t);
    for (int b = 0; b < grid.n_t; ++b) frame.beams.push_back(DDGrid::zeros(grid));

    // footprint rectangle, painted cyclically; offsets relative to (k_p, l_p)
    const int row_lo = -2 * e, row_hi = layout.n_p + 2 * e; // exclusive
    const int col_lo = -layout.m_g, col_hi = layout.m_p + layout.m_g;
    for (int dk = row_lo; dk < row_hi; ++dk) {
        for (int dl = col_lo; dl < col_hi; ++dl) {
            const int rr = mod_pos(layout.k_p + dk + half, N);
            const int cc = mod_pos(layout.l_p + dl, M);
            CellKind kind;
            const bool guard_row = !full_doppler && (dk < -e || dk >= layout.n_p + e);
            const bool guard_col = dl >= layout.m_p;
            if (guard_row || guard_col) {
                kind = CellKind::Guard;
            } else if (dk >= 0 && dk < layout.n_p && dl >= 0 && dl < layout.m_p) {
                kind = CellKind::Pilot;
            } else {
                kind = CellKind::Extension;
            }
            if (frame.kind(rr, cc) != (unsigned char)CellKind::Data)
                throw std::invalid_argument("assemble_frame: footprint self-overlap");
            frame.kind(rr, cc) = (unsigned char)kind;
            if (kind == CellKind::Pilot || kind == CellKind::Extension) {
                const int pr = mod_pos(dl, layout.m_p) * layout.n_p + mod_pos(dk, layout.n_p);
                for (int b = 0; b < grid.n_t; ++b)
                    frame.beams[b].v(rr, cc) = pilots(pr, b);
            }
        }
    }

    if (!data.empty()) {
        for (int b = 0; b < grid.n_t; ++b)
            for (int rr = 0; rr < N; ++rr)
                for (int cc = 0; cc < M; ++cc)
                    if (frame.kind(rr, cc) == (unsigned char)CellKind::Data)
                        frame.beams[b].v(rr, cc) = data[b].v(rr, cc);
    }
    return frame;
}

std::vector<DDGrid> beam_to_space(const PilotFrame& frame, const OtfsGrid& grid) {
    if (int(frame.beams.size()) != grid.n_t)
        throw std::invalid_argument("beam_to_space: frame must hold N_t beam grids");
    std::vector<DDGrid> out;
    out.reserve(grid.n_t);
    const double scale = 1.0 / std::sqrt(double(grid.n_t));
    for (int nt = 0; nt < grid.n_t; ++nt) {
        DDGrid g = DDGrid::zeros(grid);
        for (int bi = 0; bi < grid.n_t; ++bi) {
            const int b = bi - grid.n_t / 2;
            g.v += frame.beams[bi].v * (scale * std::polar(1.0, -kTwoPi * double(b) * nt / grid.n_t));
        }
        out.push_back(std::move(g));
    }
    return out;
}

void save_pilots_csv(std::ostream& os, const Mat& pilots) {
    os << "row,col,re,im\n";
    os.precision(17);
    for (Eigen::Index c = 0; c < pilots.cols(); ++c)
        for (Eigen::Index r = 0; r < pilots.rows(); ++r)
            os << r << ',' << c << ',' << pilots(r, c).real() << ','
               << pilots(r, c).imag() << '\n';
}

Mat load_pilots_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("row,col", 0) != 0)
        throw std::runtime_error("load_pilots_csv: missing header");
    struct Entry { int r, c; cplx v; };
    std::vector<Entry> entries;
    int max_r = -1, max_c = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Entry e;
        char comma;
        double re, im;
        if (!(ss >> e.r >> comma >> e.c >> comma >> re >> comma >> im))
            throw std::runtime_error("load_pilots_csv: malformed line: " + line);
        e.v = cplx(re, im);
        max_r = std::max(max_r, e.r);
        max_c = std::max(max_c, e.c);
        entries.push_back(e);
    }
    if (entries.empty()) throw std::runtime_error("load_pilots_csv: empty file");
    Mat out = Mat::Zero(max_r + 1, max_c + 1);
    for (const auto& e : entries) out(e.r, e.c) = e.v;
    return out;
}

} // namespace otfs
