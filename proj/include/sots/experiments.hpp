#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sots/codec.hpp"
#include "sots/security_bounds.hpp"

namespace sots {

// --- Experiment harnesses --------------------------------------------------
//
// Reproduction drivers for the headline experiments: the recovery
// phase-transition sweep, the image encrypt/decrypt pipeline, the
// distinguisher Monte-Carlo, and the analytic bound tables. Every harness is
// deterministic given (config, seed): per-item randomness is derived as
// hash(seed, grid index, trial index), so outputs are byte-identical
// regardless of evaluation order.

// Sweep grid over compression ratio rho = M/N and sparsity ratio kappa = K/M.
// Defaults follow the reference experiment: rho in steps of 2^-5, kappa in
// steps of 10^-2.
struct PhaseGrid {
    double rho_min = 0.03125;
    double rho_max = 1.0;
    double rho_step = 0.03125;
    double kappa_min = 0.01;
    double kappa_max = 1.0;
    double kappa_step = 0.01;
};

// Inclusive floating grid materialized from (lo, hi, step); hi < lo is the
// legal empty range.
struct SweepRange {
    double lo = 0.0;
    double hi = -1.0;
    double step = 1.0;

    std::vector<double> values() const; // validates step > 0
};

struct ExperimentConfig {
    std::size_t plaintext_dim = 256; // N
    std::size_t ciphertext_dim = 64; // M where the grid does not sweep it
    std::size_t row_weight = 32;     // q; row_weight == plaintext_dim is the
                                     // dense reference ensemble
    unsigned key_bits = 128;
    double noise_sigma = 0.0;
    BasisKind basis = BasisKind::dct;
    PhaseGrid grid;
    std::size_t trials = 200;
    double success_threshold = 0.01;   // relative squared reconstruction error
    std::size_t recovery_sparsity = 0; // pursuit budget; 0 = grid K (phase) or M/4
    std::vector<double> gammas{0.25, 0.5, 0.9, 1.0}; // energy ratios to test
    double pnr = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0x5075u;
    std::filesystem::path out_dir = ".";

    // bound-table sweeps; an empty range emits a header-only CSV
    SweepRange gamma_sweep{0.0, 1.0, 0.01};
    SweepRange q_sweep{2.0, 512.0, 1.0};
    SweepRange eps2_log10_sweep{-8.0, -1.0, 0.25};
    std::vector<double> budget_grid{16.0, 64.0, 128.0};

    void validate() const; // throws std::invalid_argument

    // simple key=value text, '#' comments; unknown keys are errors
    static ExperimentConfig from_file(const std::filesystem::path& path);
};

// --- Phase transition --------------------------------------------------------

struct PhasePoint {
    double rho = 0.0;
    double kappa = 0.0;
    std::size_t ciphertext_dim = 0; // M at this point
    std::size_t sparsity = 0;       // K at this point
    double success_rate = 0.0;
    bool skipped = false; // infeasible point, emitted as a marker row
};

struct PhaseResult {
    std::vector<PhasePoint> points;
    std::filesystem::path csv_path;
};

// Sweeps the (rho, kappa) grid: at each feasible point encrypts and decrypts
// `trials` random K-sparse plaintexts (Gaussian nonzeros on a uniform
// support) and records the fraction recovered below the error threshold.
// Writes `phase_transition.csv` with rows rho,kappa,success_rate and the
// literal rate `skipped` on infeasible points.
PhaseResult run_phase_transition(const ExperimentConfig& config);

// Success-frontier estimate at one M: descending kappa scan on the 10^-2
// grid (stopping once the passing region is established), antitonic
// smoothing of the raw rates, frontier = largest kappa whose smoothed rate
// reaches `level`. Plaintext and key seeds depend only on (seed, M, K,
// trial), so sparse and dense ensembles face identical plaintext sequences.
struct FrontierScan {
    std::size_t ciphertext_dim = 0;
    std::vector<double> kappas; // probed kappa values, descending
    std::vector<double> raw;
    std::vector<double> smooth;
    double frontier = 0.0;
};

FrontierScan estimate_recovery_frontier(const ExperimentConfig& config,
                                        std::size_t ciphertext_dim,
                                        double level = 0.99);

// --- Image pipeline ----------------------------------------------------------

struct ImageReport {
    std::filesystem::path ciphertext_path;
    std::filesystem::path decrypted_path;
    std::filesystem::path encrypted_view_path;
    std::filesystem::path csv_path;
    std::size_t side = 0;
    PsnrValue psnr;        // between the original and decrypted 8-bit images
    double relative_error = 0.0; // squared, on the real-valued signal
};

// Encrypts a square power-of-two grayscale image (binary PGM), decrypts it,
// and writes: the ciphertext container, the decrypted PGM, a display-only
// rescaling of the measurements as a PGM, and a one-line CSV
// image,N,q,rho,basis,psnr_db. The square dense case (M = N, q = N, sigma=0)
// is decoded by an exact linear solve instead of greedy pursuit.
ImageReport run_image_pipeline(const ExperimentConfig& config,
                               const std::filesystem::path& image_path,
                               KeystreamSource& source);

// --- Indistinguishability Monte-Carlo ---------------------------------------

struct DetectorOutcome {
    double empirical = 0.0; // detector success frequency
    double bound = 0.0;     // analytic ceiling from the ciphertext divergence
    double std_error = 0.0;
};

// Challenge experiment for one chosen-plaintext pair: per round a fresh key
// encrypts one of the two (fair coin), and the detector thresholds ||y||^2 at
// the midpoint of the two expected energies. The pair is canonicalized by
// energy first, so argument order cannot change the outcome. Throws
// bound_error if the empirical rate beats the bound by more than three
// standard errors.
DetectorOutcome energy_detector_experiment(std::span<const double> first,
                                           std::span<const double> second,
                                           const SystemParams& params, double pnr,
                                           std::size_t trials, std::uint64_t seed);

struct IndistPoint {
    double gamma = 0.0;
    std::size_t row_weight = 0;
    double empirical = 0.0;
    double bound = 0.0;
    double std_error = 0.0;
};

struct IndistResult {
    std::vector<IndistPoint> points;
    std::filesystem::path csv_path;
};

// Runs the detector experiment at every configured energy ratio with a
// constant-magnitude plaintext pair, writing indistinguishability.csv with
// rows gamma,q,empirical_pd,bound_pd.
IndistResult run_indistinguishability(const ExperimentConfig& config);

// --- Bound tables ------------------------------------------------------------

// Evaluates the analytic bounds over the configured sweeps and writes one
// CSV per table: detector_bound.csv (gamma sweep at several row weights plus
// the dense limit), candidate_space.csv (q sweep of log2 S_CPA),
// keystream_threshold.csv (eps2 sweep of the q thresholds per budget),
// success_bound.csv (q sweep of the success/key-recovery ceilings), and
// refresh_bound.csv (q sweep of the refresh horizon). Points outside a
// bound's validity region become marker rows with the literal value
// `invalid`. Returns the written paths.
std::vector<std::filesystem::path> emit_bound_tables(const ExperimentConfig& config);

} // namespace sots
