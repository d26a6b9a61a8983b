#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "sots/codec.hpp"
#include "sots/sensing.hpp"

namespace sots {

// --- Chosen-plaintext attacks against the sensing operator -----------------
//
// Both attack classes assume noiseless encryption of an adversary-chosen
// plaintext. Class 1 uses the constant probe x = (a,...,a) with a = sqrt(Mr),
// so each measurement is the plain sign sum of its row and reveals the row's
// +1/-1 counts. Class 2 uses the positional probe x_j = 3^(j-1); each
// measurement is then a balanced-ternary encoding of the row's signed support
// in composed-operator coordinates, so the whole operator can be read off.
//
// Base 3 rather than base 2 for the positional probe: with entries in
// {-1, 0, +1} base-2 sums collide (-2^0 + 2^1 = +2^0) while balanced ternary
// digits are unique. Probe values up to 3^(N-1) overflow any float, so the
// positional probe runs through an exact big-integer encryption path.

// Sign tally of one measurement row recovered by the class-1 attack.
struct RowCount {
    std::size_t row = 0;       // 1-based measurement row index
    std::size_t plus_count = 0;  // entries equal to +1
    std::size_t minus_count = 0; // entries equal to -1
};

// One signed unit entry of the composed operator, in composed-operator
// (post-permutation) column coordinates.
struct SignedEntry {
    std::uint32_t position = 0; // 1-based column index
    int sign = 0;               // +1 or -1

    friend bool operator==(const SignedEntry&, const SignedEntry&) = default;
};

// Full per-row signed support of the composed operator recovered by the
// class-2 attack: rows[i] lists row i+1's q entries in increasing position.
// The sign and permutation factors individually stay hidden.
struct ExtractedMatrix {
    std::size_t dim = 0; // plaintext dimension (column count)
    std::vector<std::vector<SignedEntry>> rows;
};

// Exact integer measurements of a probe encryption, scaled up by sqrt(Mr)
// relative to the real-valued ciphertext so every value is an integer.
using ExactCiphertext = std::vector<mpz_class>;

struct ExactEncryptResult {
    ExactCiphertext values;
    SensingKey key; // ground truth for attack validation
};

// Noiseless encryption of an integer plaintext with exact arithmetic:
// values[i] = sum over the row support of sign * plaintext entry, i.e.
// sqrt(Mr) times the real-valued measurement. Consumes keystream exactly
// like the floating-point path.
ExactEncryptResult exact_encrypt(KeystreamSource& source, const SystemParams& params,
                                 const std::vector<mpz_class>& plaintext);

// The class-1 probe x = (a,...,a), a = sqrt(Mr), for the real-valued path.
std::vector<double> class1_probe(const SystemParams& params);

// The class-2 positional probe x_j = 3^(j-1) for the exact path.
std::vector<mpz_class> class2_probe(const SystemParams& params);

// Reads the sign tallies of the rows covering the key (rows 1..tau) from a
// noiseless encryption of the class-1 probe: row value y_i is the row's sign
// sum, so plus_count = (q + y_i)/2. Throws ciphertext_error if any value is
// not an integer of the right parity in [-q, q].
std::vector<RowCount> class1_attack(const Ciphertext& ciphertext, const SystemParams& params);

// Decodes every measurement of an exact class-2 probe encryption in balanced
// ternary, recovering the full signed support of the composed operator.
// Throws ciphertext_error unless every row decodes to digits in {-1,0,+1}
// with exactly q nonzeros inside the plaintext dimension.
ExtractedMatrix class2_attack(const ExactCiphertext& ciphertext, const SystemParams& params);

// An exact nonnegative integer together with its log2 (0 maps to -inf).
struct BigCount {
    mpz_class value;
    double log2 = 0.0;
};

// Number of sign patterns consistent with the observed tallies: the product
// over rows of C(q, plus_count). This is the stage-1 candidate-keystream
// space of the two-stage attack.
BigCount count_candidates(const std::vector<RowCount>& counts);

// Number of permutations consistent with the support census: (q!)^eta.
BigCount permutation_candidate_count(const SystemParams& params);

// Monte-Carlo check of the concentration bound Pr[|y| < t] >= 1 - 2e^(-t^2/2q)
// for a length-q uniform sign sum y.
struct HoeffdingCheck {
    double empirical = 0.0; // observed Pr[|y| < t]
    double bound = 0.0;     // 1 - 2 exp(-t^2 / (2q))
    double std_error = 0.0; // binomial standard error of `empirical`
};

// Samples `trials` iid sign-sum rows and returns the empirical probability
// together with the analytic lower bound. Throws bound_error if the
// empirical value falls more than three standard errors below the bound.
HoeffdingCheck hoeffding_validate(std::size_t row_weight, std::size_t threshold,
                                  std::uint64_t trials, std::uint64_t seed);

// Composite-representation analysis of an extracted support matrix: column j
// is summarized by the integer sum of 2^(i-1) over the rows i covering it.
struct CompositeCensus {
    std::vector<mpz_class> column_values;                  // one per column
    std::vector<std::pair<mpz_class, std::size_t>> census; // distinct value -> multiplicity
};

// Computes the composite value of every column and the distinct-value census.
// The block structure forces exactly eta distinct values, each shared by the
// q columns of one support block; any other census throws ciphertext_error.
CompositeCensus composite_representation(const ExtractedMatrix& extracted,
                                         const SystemParams& params);

// Outcome of one two-stage chosen-plaintext key-recovery trial.
struct CpaTrialOutcome {
    double s_cpa_log2 = 0.0;       // log2 of the stage-1 candidate space
    bool feasible = false;         // candidate space within the 2^budget limit
    bool stage1_success = false;   // true keystream prefix consistent with tallies
    bool stage2_success = false;   // exhaustive key search isolates the true key
    std::uint64_t keystreams_enumerated = 0; // stage-1 candidate space size (saturating)
    std::uint64_t keys_tested = 0;           // stage-2 exhaustive search size
};

// Runs one full trial against a fresh encryption drawn from `source` (whose
// current state is the key under attack): class-1 probe, candidate counting,
// budget gate, then an exhaustive search over all nonzero register states for
// keys whose keystream prefix matches the observed tallies. Stage 2 succeeds
// when exactly one key is consistent and it is the true one. Requires desk
// scale (key_bits <= 24, matching the source degree) and sigma = 0; larger
// parameters throw std::invalid_argument.
CpaTrialOutcome two_stage_cpa_trial(KeystreamSource& source, const SystemParams& params,
                                    unsigned budget_log2);

} // namespace sots
