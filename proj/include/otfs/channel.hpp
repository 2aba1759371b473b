#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "otfs/lattice.hpp"

// Synthetic sparse multipath channel with fractional Doppler and subpath
// spread, plus the exact ground-truth delay-Doppler-beam channel vector.

namespace otfs {

inline constexpr double kSpeedOfLight = 2.99792458e8; // m/s

struct Subpath {
    cplx gain;        // h_{s_i}
    double doppler_hz; // nu_{s_i}
    double aod_rad;    // phi_{s_i}, in [-pi/2, pi/2)
};

struct DominantPath {
    int delay_tap; // l_i, all subpaths share it
    std::vector<Subpath> subpaths;
};

struct ChannelRealization {
    std::vector<DominantPath> paths;
    OtfsGrid grid;

    int max_delay_tap() const;
    // nu * N * T_sym of a subpath, i.e. its (possibly fractional) Doppler tap
    double doppler_tap(const Subpath& s) const {
        return s.doppler_hz * grid.n * grid.t_sym();
    }
};

struct BeamChannelVector {
    Vec h; // length M_g * N_g * N_t, indexed by col_index
    PilotLayout layout;
};

// Synthetic geometric channel: P distinct delay taps, per path a central
// travel angle and AoD, S subpaths with 2-degree Gaussian angular spread,
// equal-magnitude random-phase gains with total mean power 1.
ChannelRealization generate_channel(const OtfsGrid& grid, int p_paths, int s_subpaths,
                                    double velocity_mps, double carrier_hz,
                                    int max_delay_tap, std::uint64_t rng_seed);

// h_{rho,l}: complex gain of the time-variant channel on delay tap l at time rho*T_s
cplx sample_gain(const ChannelRealization& ch, int rho, int l);

// Exact H^DDB over the support window, vectorized by col_index:
// DFT over symbol index j of the per-subpath gains sampled at
// rho = M_CP + j(M+M_CP), steering factor across antennas, then the unitary
// antenna DFT, truncated to the (N_g, M_g) window.
BeamChannelVector ground_truth_hddb(const ChannelRealization& ch, const PilotLayout& layout);

// Untruncated delay-Doppler-space channel H^DDS[k, l, n_t]; tensor returned as
// a vector of per-antenna N x M matrices (row = k + floor(N/2)).  Exposed for
// the beam-transform energy test and the closed-form cross-check.
std::vector<Mat> dds_channel(const ChannelRealization& ch);

// Plain-text replay format, one subpath per line:
//   path_id delay_tap gain_re gain_im doppler_hz aod_rad
void save_channel(std::ostream& os, const ChannelRealization& ch);
ChannelRealization load_channel(std::istream& is, const OtfsGrid& grid);

} // namespace otfs
