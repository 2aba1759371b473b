#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/estimator.hpp"
#include "otfs/lattice.hpp"
#include "otfs/pilot.hpp"

// Monte-Carlo experiment orchestration: metrics, MMSE data detection, the
// sweep runner and its CSV output, and the run configuration.

namespace otfs {

enum class PilotType { Deterministic, Random };
enum class EstimatorKind { Msmce, Ismce };
enum class SweepVar { Snr, Velocity, Estimator };

struct ExperimentConfig {
    // grid
    int m = 64;
    int n = 16;
    int m_cp = 16;
    double delta_f = 15e3;
    int n_t = 8;
    // pilot layout; negative entries are resolved by resolved_layout()
    int k_p = std::numeric_limits<int>::min();
    int l_p = 0;
    int m_p = 31;
    int n_p = 7;
    int m_g = -1; // default max_delay_tap + 1
    int n_g = -1; // default 2 * (ceil(nu_max N T_sym) + 1)
    PilotType pilot_type = PilotType::Deterministic;
    // channel
    int paths = 4;
    int subpaths = 20;
    double velocity_mps = 100.0;
    double carrier_hz = 4e9;
    int max_delay_tap = 4;
    // run
    std::vector<double> snr_db{10.0, 15.0, 20.0};
    std::vector<double> velocities{};
    int trials = 1;
    std::uint64_t seed = 1;
    EstimatorKind estimator = EstimatorKind::Msmce;
    SweepVar sweep = SweepVar::Snr;
    bool carry_path_info = false;
    bool with_ber = false;
    bool timing = false;
    double epsilon = 0.05;
    double omp_residual_ratio = 0.02;
    int omp_max_iters = 0; // 0 -> min(rows, 4 * paths * N_g)

    OtfsGrid grid() const { return OtfsGrid(m, n, m_cp, delta_f, n_t); }
    PilotLayout resolved_layout() const;
    void validate() const;
};

// JSON config io; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct ResultRow {
    std::string sweep_value;
    double mean_nmse = 0.0;
    double nmse_std = 0.0;
    std::optional<double> mean_ber;
    double mean_zeta = 0.0;
    int trials = 0;
    std::optional<double> wall_time_s;
};

double nmse(const Vec& h_hat, const Vec& h_true);

// zeta of the per-path Doppler approximation at delay position l.
double approximation_error_zeta(const ChannelRealization& ch, int l, const OtfsGrid& grid,
                                const std::vector<double>& representative);

double pilot_overhead_ratio(const PilotLayout& layout, const OtfsGrid& grid);

// Gray-mapped 4QAM
cplx qam4_map(int b0, int b1);
void qam4_demap(cplx sym, int& b0, int& b1);

struct DetectionResult {
    Vec symbols; // hard-decided data symbols, grid scan order
    double ber = 0.0;
    long bits = 0;
    bool failed = false; // normal matrix singular beyond regularization
};

// MMSE recovery of the data cells of one beam from the received DD grid,
// using the estimated sparse channel and the extracted path phases.
DetectionResult mmse_detect(const DDGrid& y_dd, const ChannelEstimate& estimate,
                            const PilotFrame& frame, const PathInfo& path_info,
                            const PilotLayout& layout, const OtfsGrid& grid,
                            double noise_var, int data_beam);

struct TrialResult {
    double nmse = 0.0;
    double zeta = 0.0;
    std::optional<double> ber;
    std::optional<double> ber_perfect_csi;
    PathInfo path_info;
    bool used_fallback = false;
};

// One end-to-end instance: channel -> frame -> modem chain -> estimation ->
// metrics.  Deterministic in (cfg.seed, trial_index, condition_index).
TrialResult run_trial(const ExperimentConfig& cfg, double snr_db, double velocity_mps,
                      EstimatorKind estimator, int trial_index, int condition_index,
                      const PathInfo& prior = {});

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);

// Quick self-checks for the `verify` CLI subcommand.
std::vector<std::pair<std::string, bool>> run_verification(std::uint64_t seed);

} // namespace otfs
