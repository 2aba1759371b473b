#pragma once

#include <iosfwd>
#include <vector>

#include "otfs/lattice.hpp"
#include "otfs/sensing.hpp"

// Sparse recovery (orthogonal matching pursuit), path delay / fractional
// Doppler extraction, and the two-stage MSMCE estimator with the
// single-stage ISMCE baseline.

namespace otfs {

struct OmpStop {
    int max_iters = 0;             // 0 -> min(rows, cols)
    double residual_ratio = 0.02;  // stop when ||r|| / ||y|| <= ratio
};

struct ChannelEstimate {
    Vec h_hat;                // length M_g * N_g * N_t
    std::vector<int> support; // selected column indices
    double residual_norm = 0.0;
    bool rank_deficient = false; // a column was dropped during least squares
};

// Greedy column selection by |<residual, column>| / ||column||, least-squares
// re-solve on the support each iteration.
ChannelEstimate omp_solve(const Mat& theta, const Vec& y, const OmpStop& stop);

struct ExtractionResult {
    PathInfo info;
    long comparisons = 0; // instrumented comparison count
};

// Magnitude-tensor peak picking: per iteration take the strongest delay bin,
// read the top-two Doppler rows there and interpolate the fractional part
// from their magnitude ratio.
ExtractionResult extract_paths(const ChannelEstimate& h_hat, const PilotLayout& layout,
                               const OtfsGrid& grid, double epsilon);

struct EstimatorInputs {
    Mat x_ddb; // pilot matrix
    Vec y;
    PilotLayout layout;
    OtfsGrid grid;
};

struct MsmceResult {
    ChannelEstimate estimate;
    PathInfo path_info;
    bool used_fallback = false; // empty provisional PathInfo: first stage kept
};

// Two-stage estimation: path-agnostic first pass when no prior PathInfo is
// supplied, then the path-aware refinement.  Updated PathInfo is returned for
// the next call (channel geometry changes slowly between frames).
MsmceResult msmce(const EstimatorInputs& in, const PathInfo& prior,
                  const OmpStop& stop, double epsilon);

// First stage only: path-agnostic sensing matrix.
ChannelEstimate ismce(const EstimatorInputs& in, const OmpStop& stop);

// Plain-text PathInfo replay: "delay_tap doppler_tap" per line.
void save_path_info(std::ostream& os, const PathInfo& info);
PathInfo load_path_info(std::istream& is);

} // namespace otfs
