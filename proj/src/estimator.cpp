#include "otfs/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace otfs {

ChannelEstimate omp_solve(const Mat& theta, const Vec& y, const OmpStop& stop) {
    const Eigen::Index rows = theta.rows(), cols = theta.cols();
    if (y.size() != rows)
        throw std::invalid_argument("omp_solve: y length must match theta rows");
    Eigen::VectorXd col_norms(cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        col_norms(c) = theta.col(c).norm();
        if (col_norms(c) <= 0.0)
            throw std::invalid_argument("omp_solve: zero column in theta");
    }

    ChannelEstimate est;
    est.h_hat = Vec::Zero(cols);
    const double y_norm = y.norm();
    if (y_norm == 0.0) return est;

    const int max_iters =
        stop.max_iters > 0 ? std::min<Eigen::Index>(stop.max_iters, std::min(rows, cols))
                           : int(std::min(rows, cols));
    Vec residual = y;
    std::vector<char> selected(cols, 0);
    Mat basis(rows, 0);
    Vec coeffs;

    for (int it = 0; it < max_iters; ++it) {
        if (residual.norm() / y_norm <= stop.residual_ratio) break;
        // greedy column pick
        int best = -1;
        double best_val = 0.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (selected[c]) continue;
            const double v = std::abs(theta.col(c).dot(residual)) / col_norms(c);
            if (v > best_val) {
                best_val = v;
                best = int(c);
            }
        }
        if (best < 0 || best_val <= 0.0) break;
        selected[best] = 1;
        est.support.push_back(best);
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = theta.col(best);

        Eigen::ColPivHouseholderQR<Mat> qr(basis);
        if (qr.rank() < basis.cols()) {
            // dependent column: drop it and halt with a diagnostic flag
            est.support.pop_back();
            basis.conservativeResize(Eigen::NoChange, basis.cols() - 1);
            est.rank_deficient = true;
            break;
        }
        coeffs = qr.solve(y);
        residual = y - basis * coeffs;
    }

    for (std::size_t i = 0; i < est.support.size(); ++i)
        est.h_hat(est.support[i]) = coeffs(Eigen::Index(i));
    est.residual_norm = residual.norm();
    return est;
}

ExtractionResult extract_paths(const ChannelEstimate& h_hat, const PilotLayout& layout,
                               const OtfsGrid& grid, double epsilon) {
    const int mg = layout.m_g, ng = layout.n_g;
    if (h_hat.h_hat.size() != layout.cols(grid))
        throw std::invalid_argument("extract_paths: estimate length mismatch");

    ExtractionResult res;
    // magnitudes summed over beams, then over Doppler
    Eigen::MatrixXd h_dd = Eigen::MatrixXd::Zero(ng, mg); // [k_idx, l']
    for (int bi = 0; bi < grid.n_t; ++bi)
        for (int lp = 0; lp < mg; ++lp)
            for (int ki = 0; ki < ng; ++ki)
                h_dd(ki, lp) +=
                    std::abs(h_hat.h_hat(bi * mg * ng + lp * ng + ki));
    Eigen::VectorXd h_d = h_dd.colwise().sum().transpose();

    const double sigma = h_d.lpNorm<1>();
    if (sigma <= 0.0) return res; // all-zero estimate: empty PathInfo

    while (h_d.lpNorm<1>() / sigma > epsilon) {
        int l_tau = 0;
        for (int lp = 1; lp < mg; ++lp, ++res.comparisons)
            if (h_d(lp) > h_d(l_tau)) l_tau = lp;
        int k1 = 0;
        for (int ki = 1; ki < ng; ++ki, ++res.comparisons)
            if (h_dd(ki, l_tau) > h_dd(k1, l_tau)) k1 = ki;
        int k2 = (k1 == 0) ? 1 : 0;
        for (int ki = 0; ki < ng; ++ki) {
            if (ki == k1) continue;
            ++res.comparisons;
            if (h_dd(ki, l_tau) > h_dd(k2, l_tau)) k2 = ki;
        }
        const double m1 = h_dd(k1, l_tau), m2 = h_dd(k2, l_tau);
        const double k_nu = double(k1 - ng / 2);
        const double k_frac = (m1 + m2) > 0.0 ? (k2 - k1) * m2 / (m1 + m2) : 0.0;
        res.info.del.push_back(l_tau);
        res.info.dop.push_back(k_nu + k_frac);
        h_d(l_tau) = 0.0;
    }
    return res;
}

namespace {

// one recovery pass with a given phase compensation matrix
ChannelEstimate solve_with_phi(const EstimatorInputs& in, const Mat& phi, const OmpStop& stop) {
    Mat theta = phi.cwiseProduct(in.x_ddb);
    return omp_solve(theta, in.y, stop);
}

} // namespace

MsmceResult msmce(const EstimatorInputs& in, const PathInfo& prior,
                  const OmpStop& stop, double epsilon) {
    MsmceResult res;
    PathInfo info = prior;
    ChannelEstimate first_stage;
    bool have_first_stage = false;

    if (info.empty()) {
        first_stage = solve_with_phi(in, build_phi_tilde(in.layout, in.grid), stop);
        have_first_stage = true;
        info = extract_paths(first_stage, in.layout, in.grid, epsilon).info;
        if (info.empty()) {
            // nothing extractable: refining with an all-ones Phi would only
            // amplify a null first stage, keep the ISMCE result
            res.estimate = std::move(first_stage);
            res.path_info = info;
            res.used_fallback = true;
            return res;
        }
    }

    res.estimate = solve_with_phi(in, build_phi(info, in.layout, in.grid), stop);
    res.path_info = extract_paths(res.estimate, in.layout, in.grid, epsilon).info;
    if (res.path_info.empty() && have_first_stage) {
        res.estimate = std::move(first_stage);
        res.path_info = info;
        res.used_fallback = true;
    }
    return res;
}

ChannelEstimate ismce(const EstimatorInputs& in, const OmpStop& stop) {
    return solve_with_phi(in, build_phi_tilde(in.layout, in.grid), stop);
}

void save_path_info(std::ostream& os, const PathInfo& info) {
    os.precision(17);
    for (std::size_t i = 0; i < info.del.size(); ++i)
        os << info.del[i] << ' ' << info.dop[i] << '\n';
}

PathInfo load_path_info(std::istream& is) {
    PathInfo info;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int tap;
        double dop;
        if (!(ss >> tap >> dop))
            throw std::runtime_error("load_path_info: malformed line: " + line);
        info.del.push_back(tap);
        info.dop.push_back(dop);
    }
    return info;
}

} // namespace otfs
