#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sots/keystream.hpp"

namespace sots {

// Public dimensions and rates of one system instance. The secret lives in
// KeystreamSource / SensingKey, never here.
struct SystemParams {
    std::size_t plaintext_dim;  // N
    std::size_t ciphertext_dim; // M
    std::size_t row_weight;     // q nonzeros per measurement row
    unsigned key_bits;          // k
    double noise_sigma;

    // Enforces N/M <= q <= N/2 with q | N and N | Mq, plus N >= key_bits.
    // q == N is additionally allowed as the dense row special case (the
    // full-weight reference construction used by the recovery experiments).
    SystemParams(std::size_t plaintext_dim, std::size_t ciphertext_dim,
                 std::size_t row_weight, unsigned key_bits, double noise_sigma = 0.0);

    std::size_t block_count() const { return plaintext_dim / row_weight; }       // eta
    std::size_t column_weight() const {                                          // Mr
        return ciphertext_dim * row_weight / plaintext_dim;
    }
    double row_density() const { return double(row_weight) / double(plaintext_dim); }
    double compression_ratio() const {
        return double(ciphertext_dim) / double(plaintext_dim);
    }
    std::size_t rows_covering_key() const { // tau
        return (key_bits + row_weight - 1) / row_weight;
    }
    double scale() const; // 1/sqrt(Mr)
};

// Ordered support of measurement row i (1-based), as 1-based column indices
// into the unpermuted sign matrix: ((i-1) mod eta)*q + 1 ... + q.
std::vector<std::uint32_t> index_set(std::size_t row, const SystemParams& params);

// One encryption's secret. signs is row-major M x q; row i holds the signed
// unit entries on its support in index_set order. perm[j] (0-based) is the
// source index selected by column j of the permutation, so column j of the
// composed operator equals sign-column perm[j].
struct SensingKey {
    std::size_t rows = 0;
    std::size_t row_weight = 0;
    std::vector<std::int8_t> signs;
    std::vector<std::uint32_t> perm;

    std::span<const std::int8_t> row_signs(std::size_t i) const { // 0-based row
        return {signs.data() + i * row_weight, row_weight};
    }
    std::vector<std::uint32_t> inverse_perm() const;

    // Test-only text form: secret material, never written by default.
    std::string debug_dump() const;
};

struct PermutationResult {
    std::vector<std::uint32_t> perm;
    std::uint64_t bits_used = 0;
};

// Fisher-Yates driven by unbiased bits: each uniform draw on [0, range)
// takes ceil(log2(range)) bits and rejects values >= range. Exactly uniform
// over all permutations for an unbiased source.
PermutationResult generate_permutation(const std::function<int()>& next_bit, std::size_t n);

struct BuildResult {
    SensingKey key;
    std::uint64_t sign_bits = 0; // c_s, always q*M
    std::uint64_t perm_bits = 0; // c_p, ~ N log2 N
};

// Consumes keystream: q*M sign symbols in row-major support order (their
// stream indices are exactly floor((i-1)/eta)*N + j, which is gap-free), then
// the permutation bits with -1 -> 0, +1 -> 1.
BuildResult build_sensing_key(KeystreamSource& source, const SystemParams& params);

// y = (1/sqrt(Mr)) * S * P * x without materializing the operator. Theta(qM).
std::vector<double> apply_phi(const SensingKey& key, const SystemParams& params,
                              std::span<const double> x);

// Transpose action, consistent with apply_phi to roundoff.
std::vector<double> apply_phi_adjoint(const SensingKey& key, const SystemParams& params,
                                      std::span<const double> y);

} // namespace sots
