#pragma once

#include <cstdint>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/lattice.hpp"

// OFDM-based OTFS transceiver chain in discrete time, the time-variant
// channel application, and the two delay-Doppler-domain operators (the exact
// per-subpath relationship and the simplified per-path model), each usable
// as an oracle for the others.

namespace otfs {

// One row per antenna, N*(M+M_CP) samples per row.
struct TimeSignal {
    Mat s;
};

// Per OFDM symbol: unitary length-M inverse DFT across subcarriers, last
// M_CP samples prepended as CP, symbols concatenated.
Vec ofdm_modulate(const TFGrid& x_tf, const OtfsGrid& grid);

// Per symbol: drop the first M_CP samples, unitary length-M DFT.
TFGrid ofdm_demodulate(const Vec& sig, const OtfsGrid& grid);

// r[rho] = sum_i sum_s h_s e^{j2pi nu_s (rho - l_i) T_s}
//          * sum_nt e^{j pi nt sin(phi_s)} tx(nt, rho - l_i)
// Samples before rho = 0 read zero; the first CP absorbs the transient.
Vec apply_channel(const TimeSignal& tx, const ChannelRealization& ch);

// Circular complex Gaussian noise; per-sample variance = mean power / 10^(snr/10).
// snr_db = +inf returns the input untouched.
Vec add_noise(const Vec& sig, double snr_db, std::uint64_t rng_seed);

// Gain-weighted circular mean of the subpath Doppler taps of one path,
// the per-path representative k_i + k~_i used by the simplified model.
double representative_doppler_tap(const DominantPath& path, const OtfsGrid& grid);

// Exact delay-Doppler input-output relationship (per-subpath phase), direct
// summation, noiseless.  One transmitted DD grid per antenna.
DDGrid dd_oracle(const std::vector<DDGrid>& x_dds, const ChannelRealization& ch,
                 const OtfsGrid& grid);

// Simplified model: all subpaths of a path share the representative Doppler
// tap inside the delay-position phase factor.
DDGrid dd_simplified(const std::vector<DDGrid>& x_dds, const ChannelRealization& ch,
                     const OtfsGrid& grid);

} // namespace otfs
