#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sots {

// Feedback specification of a Fibonacci LFSR. Stage indices are 1-based; the
// register shifts toward higher stages, the output is stage `degree`, and the
// feedback bit (XOR of the tapped stages, computed before the shift) becomes
// the new stage 1. With primitive feedback the output is an m-sequence of
// period 2^degree - 1.
struct LfsrSpec {
    unsigned degree = 0;
    std::vector<unsigned> taps;

    // Built-in primitive polynomials for the supported key lengths
    // {8, 16, 32, 64, 128, 256}. Any other degree requires explicit taps.
    static LfsrSpec primitive(unsigned degree);

    void validate() const; // throws std::invalid_argument
};

// Initial register contents, i.e. the secret key: big-endian bytes, most
// significant bit of byte 0 = stage 1, unused trailing bits zero.
struct Key {
    std::vector<std::uint8_t> bytes;

    static Key from_hex(std::string_view hex, unsigned degree);
    std::string to_hex() const;
};

// Samples a uniformly random nonzero key from OS randomness.
Key sample_key(unsigned degree);

// LFSR plus self-shrinking decimator. The raw m-sequence is consumed in
// pairs (a1, a2); a pair with a1 = 1 emits the bipolar symbol (-1)^a2, a
// pair with a1 = 0 is discarded. Counters make the consumed-bit accounting
// (c_s, c_p) exact.
class KeystreamSource {
public:
    KeystreamSource(LfsrSpec spec, const Key& key);

    int lfsr_next();                // next raw m-sequence bit
    std::int8_t ssg_next_bipolar(); // next keystream symbol, -1 or +1
    std::vector<std::int8_t> take_bits(std::size_t n);

    std::uint64_t raw_bits() const { return raw_bits_; }
    std::uint64_t emitted() const { return emitted_; }
    const LfsrSpec& spec() const { return spec_; }

    // Register snapshot in key encoding (for persisting stream position).
    Key state_key() const;

private:
    LfsrSpec spec_;
    std::vector<std::uint64_t> state_;    // stage i at bit (i-1)
    std::vector<std::uint64_t> tap_mask_;
    std::uint64_t top_mask_;
    unsigned out_word_;
    unsigned out_bit_;
    std::uint64_t raw_bits_ = 0;
    std::uint64_t emitted_ = 0;
};

// Fraction of +1 symbols; the SSG keystream should give ~0.5.
double balance_statistic(std::span<const std::int8_t> symbols);

// Text key file: line 1 "degree=<k>", line 2 "taps=<comma-separated>",
// line 3 "state=<hex>".
struct KeyFile {
    LfsrSpec spec;
    Key key;
};

KeyFile read_key_file(const std::string& path);
void write_key_file(const std::string& path, const LfsrSpec& spec, const Key& key);

} // namespace sots
