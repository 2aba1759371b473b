#pragma once

#include <vector>

#include "otfs/lattice.hpp"
#include "otfs/pilot.hpp"

// Measurement model construction: the pilot matrix X^DDB read from the
// assembled frame, the path-aware (Phi) and path-agnostic (Phi~) phase
// compensation matrices, received-vector extraction, and coherence
// analytics against the Welch bound.

namespace otfs {

// Extracted path geometry: delay taps paired with real-valued Doppler taps.
struct PathInfo {
    std::vector<int> del;     // distinct delay taps, each in [0, M_g)
    std::vector<double> dop;  // k_i + k~_i, position-paired with del

    bool empty() const { return del.empty(); }
};

struct SensingProblem {
    Vec y;     // M_p * N_p
    Mat x;     // pilot matrix, M_p*N_p x M_g*N_g*N_t
    Mat phi;   // unit-modulus phase compensation, same shape
    Mat theta; // phi (Hadamard) x
};

// Entry (row_index(k,l), col_index(k',l',b)) =
// (1/sqrt(N)) X^DDB[<k-k'>_N, (l-l')_M, b], read cyclically from the extended
// frame of beam b; the 1/sqrt(N) pairs with the unitary symbol-DFT definition
// of the channel vector so that Y = (Phi o X) h exactly.
Mat build_pilot_matrix(const PilotFrame& frame, const PilotLayout& layout,
                       const OtfsGrid& grid);

// Path-agnostic compensation: e^{j 2 pi l k' / ((M+M_CP) N)}
Mat build_phi_tilde(const PilotLayout& layout, const OtfsGrid& grid);

// Path-aware compensation: e^{j 2 pi l (k_i + k~_i) / ((M+M_CP) N)} on
// columns whose l' is a known delay tap, 1 elsewhere.
Mat build_phi(const PathInfo& path_info, const PilotLayout& layout, const OtfsGrid& grid);

// Y^DD over the pilot ranges in row_index order.
Vec extract_received(const DDGrid& y_dd, const PilotLayout& layout, const OtfsGrid& grid);

struct CoherenceProfile {
    double max_offdiag;
    std::vector<double> offdiag; // all |<a_i, a_j>|, i < j, normalized columns
};

CoherenceProfile coherence_profile(const Mat& a);

// sqrt((n_cols - n_rows) / ((n_cols - 1) n_rows)); 0 when n_cols <= n_rows.
double welch_bound(int n_rows, int n_cols);

} // namespace otfs
