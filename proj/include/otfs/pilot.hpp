#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "otfs/lattice.hpp"

// Zadoff-Chu pilot construction: the deterministic per-beam pilot matrix,
// cyclic-extension frame assembly, beam->space conversion, and the
// Gaussian random-pilot baseline.

namespace otfs {

enum class CellKind : unsigned char { Data, Pilot, Extension, Guard };

// Per-beam delay-Doppler grids plus the (beam-invariant) cell designation map.
struct PilotFrame {
    std::vector<DDGrid> beams;                                  // N_t grids
    Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> kind; // N x M

    CellKind kind_at(int k, int l, const OtfsGrid& g) const {
        return CellKind(kind(k + g.n / 2, l));
    }
};

// ZC sequence of length L, root r, cyclic shift c; unit l2 norm.
// Element k: (1/sqrt(L)) e^{j pi r q (q + L mod 2) / L}, q = (k - c) mod L.
Vec zc_sequence(int L, int r, int c);

// Deterministic Kronecker-ZC pilot columns, one per beam (M_p*N_p x N_t).
// Beam b = g*eta_del*eta_dop + i*eta_dop + j carries
// z_{i*M_g}^{M_p, gamma_g} (x) z_{j*N_g}^{N_p, mu_g}, delay-major, with the
// root pair decremented per group from (M_p-1, N_p-1).
// M_p and N_p must be prime (flat cross-root correlation needs it).
Mat design_pilots(const PilotLayout& layout, int n_t);

// i.i.d. circular Gaussian pilot columns, normalized to unit l2 norm.
Mat random_pilots(const PilotLayout& layout, int n_t, std::uint64_t rng_seed);

// Place the pilot block at (k_p, l_p), add the cyclic extensions and guard
// rings, fill remaining cells with the supplied per-beam data grids (zeros
// when empty).  When N_p = N the Doppler extension and guards are omitted.
PilotFrame assemble_frame(const Mat& pilots, const PilotLayout& layout,
                          const std::vector<DDGrid>& data, const OtfsGrid& grid);

// X^DDS[k,l,nt] = (1/sqrt(N_t)) sum_b e^{-j 2 pi b nt / N_t} X^DDB[k,l,b]
std::vector<DDGrid> beam_to_space(const PilotFrame& frame, const OtfsGrid& grid);

// CSV pilot matrix io: "row,col,re,im" per line, header included.
void save_pilots_csv(std::ostream& os, const Mat& pilots);
Mat load_pilots_csv(std::istream& is);

} // namespace otfs
