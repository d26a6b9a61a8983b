#include "sots/attacks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sots/errors.hpp"
#include "sots/rng.hpp"

namespace sots {

namespace {

double log2_of(const mpz_class& v) {
    if (v == 0) return -std::numeric_limits<double>::infinity();
    long exp2 = 0;
    double mantissa = mpz_get_d_2exp(&exp2, v.get_mpz_t());
    return std::log2(std::abs(mantissa)) + double(exp2);
}

// Register state encoded the way Key stores it: the most significant bit of
// `state` becomes stage 1 (MSB of byte 0).
Key key_from_state(std::uint64_t state, unsigned degree) {
    Key key;
    key.bytes.assign((degree + 7) / 8, 0);
    for (unsigned stage = 1; stage <= degree; ++stage)
        if ((state >> (degree - stage)) & 1)
            key.bytes[(stage - 1) / 8] |= std::uint8_t(0x80u >> ((stage - 1) % 8));
    return key;
}

} // namespace

ExactEncryptResult exact_encrypt(KeystreamSource& source, const SystemParams& params,
                                 const std::vector<mpz_class>& plaintext) {
    const std::size_t n = params.plaintext_dim;
    if (plaintext.size() != n)
        throw std::invalid_argument("exact_encrypt: plaintext length must equal the plaintext dimension");

    BuildResult built = build_sensing_key(source, params);

    std::vector<const mpz_class*> permuted(n);
    for (std::size_t j = 0; j < n; ++j) permuted[built.key.perm[j]] = &plaintext[j];

    const std::size_t m = params.ciphertext_dim;
    const std::size_t q = params.row_weight;
    const std::size_t eta = params.block_count();
    ExactCiphertext values(m, mpz_class(0));
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t base = (i % eta) * q;
        auto signs = built.key.row_signs(i);
        mpz_class& acc = values[i];
        for (std::size_t l = 0; l < q; ++l) {
            if (signs[l] > 0)
                acc += *permuted[base + l];
            else
                acc -= *permuted[base + l];
        }
    }
    return {std::move(values), std::move(built.key)};
}

std::vector<double> class1_probe(const SystemParams& params) {
    return std::vector<double>(params.plaintext_dim,
                               std::sqrt(double(params.column_weight())));
}

std::vector<mpz_class> class2_probe(const SystemParams& params) {
    std::vector<mpz_class> probe;
    probe.reserve(params.plaintext_dim);
    mpz_class power = 1;
    for (std::size_t j = 0; j < params.plaintext_dim; ++j) {
        probe.push_back(power);
        power *= 3;
    }
    return probe;
}

std::vector<RowCount> class1_attack(const Ciphertext& ciphertext, const SystemParams& params) {
    if (ciphertext.plaintext_dim != params.plaintext_dim ||
        ciphertext.ciphertext_dim != params.ciphertext_dim ||
        ciphertext.row_weight != params.row_weight ||
        ciphertext.values.size() != params.ciphertext_dim)
        throw std::invalid_argument("class1_attack: ciphertext does not match the parameters");

    const long long q = (long long)params.row_weight;
    const std::size_t tau = params.rows_covering_key();
    std::vector<RowCount> counts;
    counts.reserve(tau);
    for (std::size_t i = 0; i < tau; ++i) {
        const double y = ciphertext.values[i];
        const double nearest = std::round(y);
        if (!(std::abs(y - nearest) <= 1e-6))
            throw ciphertext_error("class-1 row value is not an integer sign sum "
                                   "(noisy ciphertext or wrong probe)");
        const long long yi = (long long)nearest;
        if (std::llabs(yi) > q)
            throw ciphertext_error("class-1 row sign sum exceeds the row weight");
        if ((q + yi) % 2 != 0)
            throw ciphertext_error("class-1 row sign sum has the wrong parity");
        const std::size_t plus = std::size_t((q + yi) / 2);
        counts.push_back({i + 1, plus, params.row_weight - plus});
    }
    return counts;
}

ExtractedMatrix class2_attack(const ExactCiphertext& ciphertext, const SystemParams& params) {
    if (ciphertext.size() != params.ciphertext_dim)
        throw std::invalid_argument("class2_attack: ciphertext does not match the parameters");

    const std::size_t n = params.plaintext_dim;
    const std::size_t q = params.row_weight;
    ExtractedMatrix out;
    out.dim = n;
    out.rows.resize(ciphertext.size());
    for (std::size_t i = 0; i < ciphertext.size(); ++i) {
        mpz_class v = ciphertext[i];
        auto& row = out.rows[i];
        row.reserve(q);
        std::uint32_t position = 0;
        while (v != 0) {
            ++position;
            if (position > n)
                throw ciphertext_error("class-2 digits extend past the plaintext dimension");
            const unsigned long rem = mpz_fdiv_ui(v.get_mpz_t(), 3);
            const int digit = rem == 2 ? -1 : int(rem);
            if (digit != 0) {
                row.push_back({position, digit});
                v -= digit;
            }
            mpz_divexact_ui(v.get_mpz_t(), v.get_mpz_t(), 3);
        }
        if (row.size() != q)
            throw ciphertext_error("class-2 row decodes to the wrong support size");
    }
    return out;
}

BigCount count_candidates(const std::vector<RowCount>& counts) {
    if (counts.empty())
        throw std::invalid_argument("count_candidates: need at least one row count");
    mpz_class total = 1;
    mpz_class term;
    for (const RowCount& rc : counts) {
        const unsigned long q = (unsigned long)(rc.plus_count + rc.minus_count);
        mpz_bin_uiui(term.get_mpz_t(), q, (unsigned long)rc.plus_count);
        total *= term;
    }
    return {total, log2_of(total)};
}

BigCount permutation_candidate_count(const SystemParams& params) {
    mpz_class factorial;
    mpz_fac_ui(factorial.get_mpz_t(), (unsigned long)params.row_weight);
    mpz_class total;
    mpz_pow_ui(total.get_mpz_t(), factorial.get_mpz_t(),
               (unsigned long)params.block_count());
    return {total, log2_of(total)};
}

HoeffdingCheck hoeffding_validate(std::size_t row_weight, std::size_t threshold,
                                  std::uint64_t trials, std::uint64_t seed) {
    if (row_weight == 0)
        throw std::invalid_argument("hoeffding_validate: row weight must be positive");
    if (threshold > row_weight)
        throw std::invalid_argument("hoeffding_validate: threshold exceeds the row weight");
    if (trials == 0)
        throw std::invalid_argument("hoeffding_validate: need at least one trial");

    Rng rng(derive_seed(seed, row_weight, threshold));
    const std::size_t full_words = row_weight / 64;
    const std::size_t rem = row_weight % 64;
    const std::uint64_t rem_mask = rem ? (~0ull >> (64 - rem)) : 0;
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::size_t plus = 0;
        for (std::size_t w = 0; w < full_words; ++w) plus += std::popcount(rng.next());
        if (rem) plus += std::popcount(rng.next() & rem_mask);
        const long long y = 2 * (long long)plus - (long long)row_weight;
        if (std::llabs(y) < (long long)threshold) ++hits;
    }

    HoeffdingCheck out;
    out.empirical = double(hits) / double(trials);
    out.bound = 1.0 - 2.0 * std::exp(-(double(threshold) * double(threshold)) /
                                     (2.0 * double(row_weight)));
    out.std_error = std::sqrt(out.empirical * (1.0 - out.empirical) / double(trials));
    if (out.empirical < out.bound - 3.0 * out.std_error) {
        std::ostringstream msg;
        msg << "hoeffding_validate: empirical " << out.empirical
            << " undercuts the bound " << out.bound
            << " by more than three standard errors";
        throw bound_error(msg.str());
    }
    return out;
}

CompositeCensus composite_representation(const ExtractedMatrix& extracted,
                                         const SystemParams& params) {
    if (extracted.dim != params.plaintext_dim ||
        extracted.rows.size() != params.ciphertext_dim)
        throw std::invalid_argument("composite_representation: extraction must cover all rows");

    CompositeCensus out;
    out.column_values.assign(params.plaintext_dim, mpz_class(0));
    for (std::size_t i = 0; i < extracted.rows.size(); ++i)
        for (const SignedEntry& entry : extracted.rows[i]) {
            if (entry.position == 0 || entry.position > params.plaintext_dim)
                throw ciphertext_error("composite_representation: support entry outside "
                                       "the plaintext dimension");
            mpz_setbit(out.column_values[entry.position - 1].get_mpz_t(), i);
        }

    std::map<mpz_class, std::size_t> census;
    for (const mpz_class& v : out.column_values) ++census[v];
    if (census.size() != params.block_count())
        throw ciphertext_error("composite_representation: distinct column values differ "
                               "from the block count");
    for (const auto& [value, multiplicity] : census)
        if (multiplicity != params.row_weight)
            throw ciphertext_error("composite_representation: a column value does not "
                                   "repeat row_weight times");
    out.census.assign(census.begin(), census.end());
    return out;
}

CpaTrialOutcome two_stage_cpa_trial(KeystreamSource& source, const SystemParams& params,
                                    unsigned budget_log2) {
    const unsigned degree = source.spec().degree;
    if (degree != params.key_bits)
        throw std::invalid_argument("two_stage_cpa_trial: source degree must equal key_bits");
    if (degree > 24)
        throw std::invalid_argument("two_stage_cpa_trial: exhaustive key search needs "
                                    "key_bits <= 24");
    if (params.noise_sigma != 0.0)
        throw std::invalid_argument("two_stage_cpa_trial: the attack model is noiseless");

    const std::size_t q = params.row_weight;
    const std::size_t tau = params.rows_covering_key();

    const Key truth = source.state_key();
    const std::vector<double> probe = class1_probe(params);
    const EncryptResult enc = encrypt(source, params, probe);
    const std::vector<RowCount> counts = class1_attack(enc.ciphertext, params);
    const BigCount space = count_candidates(counts);

    CpaTrialOutcome out;
    out.s_cpa_log2 = space.log2;
    out.keystreams_enumerated = mpz_fits_ulong_p(space.value.get_mpz_t())
                                    ? std::uint64_t(mpz_get_ui(space.value.get_mpz_t()))
                                    : std::numeric_limits<std::uint64_t>::max();
    out.feasible = space.value <= (mpz_class(1) << budget_log2);
    if (!out.feasible) return out;

    // A keystream prefix lies in the stage-1 candidate set exactly when its
    // per-row +1 tallies reproduce the observed counts, so membership is
    // decided per key instead of materializing the enumeration.
    const std::size_t prefix_len = tau * q;
    auto tally_consistent = [&](const std::int8_t* symbols) {
        for (std::size_t i = 0; i < tau; ++i) {
            std::size_t plus = 0;
            for (std::size_t l = 0; l < q; ++l)
                if (symbols[i * q + l] > 0) ++plus;
            if (plus != counts[i].plus_count) return false;
        }
        return true;
    };

    // Rows 1..tau hold the first tau*q emitted symbols of this encryption.
    std::vector<std::int8_t> truth_prefix(prefix_len);
    for (std::size_t i = 0; i < tau; ++i) {
        auto signs = enc.key.row_signs(i);
        std::copy(signs.begin(), signs.end(), truth_prefix.begin() + i * q);
    }
    out.stage1_success = tally_consistent(truth_prefix.data());

    std::vector<Key> matched;
    const std::uint64_t states = (1ull << degree) - 1;
    for (std::uint64_t state = 1; state <= states; ++state) {
        Key candidate = key_from_state(state, degree);
        KeystreamSource candidate_source(source.spec(), candidate);
        const std::vector<std::int8_t> prefix = candidate_source.take_bits(prefix_len);
        if (tally_consistent(prefix.data())) matched.push_back(std::move(candidate));
    }
    out.keys_tested = states;
    out.stage2_success = matched.size() == 1 && matched.front().bytes == truth.bytes;
    return out;
}

} // namespace sots
