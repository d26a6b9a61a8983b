#include "sots/keystream.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sots/errors.hpp"

namespace sots {

LfsrSpec LfsrSpec::primitive(unsigned degree) {
    // x^k + x^t2 + ... + 1 for each tap list {k, t2, ...}; all entries
    // verified primitive over GF(2).
    switch (degree) {
        case 8:   return {8, {8, 6, 5, 4}};
        case 16:  return {16, {16, 15, 13, 4}};
        case 32:  return {32, {32, 22, 2, 1}};
        case 64:  return {64, {64, 63, 61, 60}};
        case 128: return {128, {128, 127, 126, 121}};
        case 256: return {256, {256, 254, 251, 246}};
        default:
            throw std::invalid_argument(
                "no built-in primitive polynomial for degree " + std::to_string(degree) +
                " (have 8, 16, 32, 64, 128, 256); pass explicit taps");
    }
}

void LfsrSpec::validate() const {
    if (degree < 2) throw std::invalid_argument("LFSR degree must be >= 2");
    if (taps.empty()) throw std::invalid_argument("LFSR tap set must be nonempty");
    for (unsigned t : taps)
        if (t < 1 || t > degree)
            throw std::invalid_argument("LFSR tap index " + std::to_string(t) +
                                        " outside [1, " + std::to_string(degree) + "]");
}

Key Key::from_hex(std::string_view hex, unsigned degree) {
    std::size_t want = (degree + 7) / 8;
    if (hex.size() != 2 * want)
        throw std::invalid_argument("key hex length " + std::to_string(hex.size()) +
                                    ", expected " + std::to_string(2 * want) +
                                    " digits for degree " + std::to_string(degree));
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument(std::string("bad hex digit '") + c + "' in key");
    };
    Key k;
    k.bytes.resize(want);
    for (std::size_t i = 0; i < want; ++i)
        k.bytes[i] = std::uint8_t(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    // trailing pad bits beyond the last stage must be zero
    if (unsigned rem = degree % 8; rem != 0) {
        std::uint8_t pad = std::uint8_t(0xffu >> rem);
        if (k.bytes.back() & pad)
            throw std::invalid_argument("key has nonzero bits past stage " +
                                        std::to_string(degree));
    }
    return k;
}

std::string Key::to_hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * bytes.size());
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

Key sample_key(unsigned degree) {
    std::random_device rd;
    Key k;
    k.bytes.resize((degree + 7) / 8);
    for (;;) {
        for (auto& b : k.bytes) b = std::uint8_t(rd());
        // zero the pad bits past the last stage
        if (unsigned rem = degree % 8; rem != 0)
            k.bytes.back() &= std::uint8_t(~(0xffu >> rem));
        bool zero = std::all_of(k.bytes.begin(), k.bytes.end(),
                                [](std::uint8_t b) { return b == 0; });
        if (!zero) return k;
    }
}

KeystreamSource::KeystreamSource(LfsrSpec spec, const Key& key) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t words = (spec_.degree + 63) / 64;
    state_.assign(words, 0);
    tap_mask_.assign(words, 0);
    if (key.bytes.size() != (spec_.degree + 7) / 8)
        throw std::invalid_argument("key length does not match LFSR degree");
    // key bytes are big-endian with stage 1 at the MSB of byte 0
    for (unsigned stage = 1; stage <= spec_.degree; ++stage) {
        unsigned byte = (stage - 1) / 8, bit = 7 - (stage - 1) % 8;
        if (key.bytes[byte] >> bit & 1)
            state_[(stage - 1) / 64] |= 1ull << ((stage - 1) % 64);
    }
    bool zero = std::all_of(state_.begin(), state_.end(),
                            [](std::uint64_t w) { return w == 0; });
    if (zero) throw std::invalid_argument("all-zero LFSR state is a fixed point");
    for (unsigned t : spec_.taps) tap_mask_[(t - 1) / 64] |= 1ull << ((t - 1) % 64);
    unsigned rem = spec_.degree % 64;
    top_mask_ = rem ? (1ull << rem) - 1 : ~0ull;
    out_word_ = (spec_.degree - 1) / 64;
    out_bit_ = (spec_.degree - 1) % 64;
}

int KeystreamSource::lfsr_next() {
    int out = int(state_[out_word_] >> out_bit_ & 1);
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < state_.size(); ++w) acc ^= state_[w] & tap_mask_[w];
    std::uint64_t carry = std::uint64_t(std::popcount(acc) & 1);
    for (auto& w : state_) {
        std::uint64_t next_carry = w >> 63;
        w = (w << 1) | carry;
        carry = next_carry;
    }
    state_.back() &= top_mask_;
    ++raw_bits_;
    return out;
}

std::int8_t KeystreamSource::ssg_next_bipolar() {
    for (;;) {
        int a1 = lfsr_next();
        int a2 = lfsr_next();
        if (a1) {
            ++emitted_;
            return a2 ? std::int8_t(-1) : std::int8_t(+1); // b = (-1)^d
        }
    }
}

std::vector<std::int8_t> KeystreamSource::take_bits(std::size_t n) {
    std::vector<std::int8_t> out(n);
    for (auto& s : out) s = ssg_next_bipolar();
    return out;
}

Key KeystreamSource::state_key() const {
    Key k;
    k.bytes.assign((spec_.degree + 7) / 8, 0);
    for (unsigned stage = 1; stage <= spec_.degree; ++stage)
        if (state_[(stage - 1) / 64] >> ((stage - 1) % 64) & 1)
            k.bytes[(stage - 1) / 8] |= std::uint8_t(1u << (7 - (stage - 1) % 8));
    return k;
}

double balance_statistic(std::span<const std::int8_t> symbols) {
    if (symbols.empty()) throw std::invalid_argument("balance of an empty sequence");
    std::size_t plus = 0;
    for (auto s : symbols) plus += (s > 0);
    return double(plus) / double(symbols.size());
}

KeyFile read_key_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open key file: " + path);
    std::string line;
    auto field = [&](const char* name) {
        if (!std::getline(in, line))
            throw std::invalid_argument("key file truncated: missing " + std::string(name));
        std::string prefix = std::string(name) + "=";
        if (line.rfind(prefix, 0) != 0)
            throw std::invalid_argument("key file line \"" + line + "\": expected " + prefix + "...");
        return line.substr(prefix.size());
    };
    KeyFile kf;
    kf.spec.degree = unsigned(std::stoul(field("degree")));
    std::stringstream taps(field("taps"));
    std::string item;
    while (std::getline(taps, item, ','))
        if (!item.empty()) kf.spec.taps.push_back(unsigned(std::stoul(item)));
    kf.spec.validate();
    kf.key = Key::from_hex(field("state"), kf.spec.degree);
    return kf;
}

void write_key_file(const std::string& path, const LfsrSpec& spec, const Key& key) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write key file: " + path);
    out << "degree=" << spec.degree << "\n";
    out << "taps=";
    for (std::size_t i = 0; i < spec.taps.size(); ++i)
        out << (i ? "," : "") << spec.taps[i];
    out << "\n";
    out << "state=" << key.to_hex() << "\n";
    if (!out) throw std::invalid_argument("write failed: " + path);
}

} // namespace sots
