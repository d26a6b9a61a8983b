#include <doctest.h>

#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "sots/keystream.hpp"

using namespace sots;

namespace {

KeystreamSource make_source(unsigned degree, std::vector<unsigned> taps,
                            std::vector<std::uint8_t> key_bytes) {
    return KeystreamSource({degree, std::move(taps)}, Key{std::move(key_bytes)});
}

// m-sequence period by state-cycle enumeration
std::uint64_t lfsr_period(KeystreamSource& src, unsigned degree) {
    Key start = src.state_key();
    std::uint64_t steps = 0, cap = (1ull << degree) + 1;
    do {
        src.lfsr_next();
        ++steps;
    } while (!(src.state_key().bytes == start.bytes) && steps < cap);
    return steps;
}

} // namespace

TEST_SUITE("keystream") {

TEST_CASE("degree-3 register walks the documented cycle") {
    // x^3 + x^2 + 1, initial stages (s1,s2,s3) = (0,0,1)
    auto src = make_source(3, {3, 2}, {0x20});
    const int expect[14] = {1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1};
    for (int i = 0; i < 14; ++i) CHECK(src.lfsr_next() == expect[i]);
    CHECK(src.raw_bits() == 14);

    auto fresh = make_source(3, {3, 2}, {0x20});
    CHECK(lfsr_period(fresh, 3) == 7);
}

TEST_CASE("self-shrinking rule: pair (1,x) emits (-1)^x, pair (0,x) is dropped") {
    // raw stream above pairs up as (1,0) (0,1) (0,1) (1,1) (0,0) (1,0) (1,1),
    // so the first four symbols are +1, -1, +1, -1
    auto src = make_source(3, {3, 2}, {0x20});
    auto sym = src.take_bits(4);
    CHECK(sym == std::vector<std::int8_t>{+1, -1, +1, -1});
    CHECK(src.raw_bits() == 14);
    CHECK(src.emitted() == 4);
    CHECK(balance_statistic(sym) == doctest::Approx(0.5));
}

TEST_CASE("golden keystreams match an independent implementation") {
    auto src8 = make_source(8, {8, 6, 5, 4}, {0x53});
    const std::vector<std::int8_t> expect8 = {-1, 1, 1, -1, -1, -1, -1, 1,
                                              -1, -1, 1, 1, 1, -1, 1, 1};
    CHECK(src8.take_bits(16) == expect8);

    auto src16 = make_source(16, {16, 15, 13, 4}, {0xaa, 0x01});
    const std::vector<std::int8_t> expect16 = {1, -1, -1, -1, 1, 1, 1, 1,
                                               -1, -1, 1, 1, -1, 1, -1, -1};
    CHECK(src16.take_bits(16) == expect16);
}

TEST_CASE("stream consistency across arbitrary take_bits splits") {
    for (std::size_t cut : {0, 1, 3, 7, 10}) {
        auto a = make_source(8, {8, 6, 5, 4}, {0x91});
        auto b = make_source(8, {8, 6, 5, 4}, {0x91});
        auto whole = a.take_bits(10);
        auto first = b.take_bits(cut);
        auto rest = b.take_bits(10 - cut);
        first.insert(first.end(), rest.begin(), rest.end());
        CHECK(whole == first);
        CHECK(a.raw_bits() == b.raw_bits());
        CHECK(a.emitted() == 10);
    }
}

TEST_CASE("take_bits(0) leaves the source untouched") {
    auto src = make_source(8, {8, 6, 5, 4}, {0x01});
    CHECK(src.take_bits(0).empty());
    CHECK(src.raw_bits() == 0);
    CHECK(src.emitted() == 0);
}

TEST_CASE("shrinking never emits more than half the raw bits") {
    auto src = make_source(16, {16, 15, 13, 4}, {0x3c, 0x7a});
    for (int i = 0; i < 500; ++i) {
        src.ssg_next_bipolar();
        CHECK(src.emitted() <= (src.raw_bits() + 1) / 2);
    }
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(make_source(3, {3, 2}, {0x00}), std::invalid_argument);
    CHECK_THROWS_AS(make_source(1, {1}, {0x80}), std::invalid_argument);
    CHECK_THROWS_AS(make_source(8, {}, {0x12}), std::invalid_argument);
    CHECK_THROWS_AS(make_source(8, {9}, {0x12}), std::invalid_argument);
    CHECK_THROWS_AS(make_source(8, {8, 4}, {0x12, 0x34}), std::invalid_argument);
    CHECK_THROWS_AS(Key::from_hex("2", 3), std::invalid_argument);
    CHECK_THROWS_AS(Key::from_hex("21", 3), std::invalid_argument); // pad bits set
    CHECK_THROWS_AS(Key::from_hex("zz", 8), std::invalid_argument);
    CHECK_THROWS_AS(balance_statistic({}), std::invalid_argument);
    CHECK_THROWS_AS(LfsrSpec::primitive(7), std::invalid_argument);
}

TEST_CASE("m-sequence period is 2^k - 1 for the built-in table (degree <= 16)") {
    for (unsigned degree : {8u, 16u}) {
        auto spec = LfsrSpec::primitive(degree);
        std::vector<std::uint8_t> key(degree / 8, 0);
        key[0] = 0x80;
        KeystreamSource src(spec, Key{key});
        CHECK(lfsr_period(src, degree) == (1ull << degree) - 1);
    }
}

TEST_CASE("SSG output period meets the 2^floor(k/2) lower bound") {
    struct Cfg {
        unsigned degree;
        std::vector<unsigned> taps;
    };
    // companion primitive polynomials for the odd sizes used only here
    for (const Cfg& cfg : {Cfg{8, {8, 6, 5, 4}}, Cfg{10, {10, 7}}, Cfg{12, {12, 6, 4, 1}}}) {
        std::vector<std::uint8_t> key((cfg.degree + 7) / 8, 0);
        key[0] = 0xb0;
        KeystreamSource src({cfg.degree, cfg.taps}, Key{key});

        // One LFSR cycle has odd length, so the pairing realigns only after
        // two cycles; the emitted stream then repeats with period 2^(k-1).
        std::uint64_t super = 1ull << (cfg.degree - 1);
        auto sym = src.take_bits(2 * super);
        REQUIRE(std::equal(sym.begin(), sym.begin() + super, sym.begin() + super));

        std::uint64_t minimal = super;
        for (std::uint64_t cand = 1; cand < super; cand <<= 1) {
            bool periodic = true;
            for (std::uint64_t i = 0; i + cand < super && periodic; ++i)
                periodic = sym[i] == sym[i + cand];
            if (periodic && super % cand == 0) {
                minimal = cand;
                break;
            }
        }
        INFO("degree ", cfg.degree, " minimal period ", minimal);
        CHECK(minimal >= (1ull << (cfg.degree / 2)));
    }
}

TEST_CASE("keystream balance at degree 16") {
    auto spec = LfsrSpec::primitive(16);
    KeystreamSource src(spec, Key::from_hex("6d2f", 16));
    auto sym = src.take_bits(100000);
    CHECK(balance_statistic(sym) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("identical keys give identical streams; state snapshot resumes") {
    auto spec = LfsrSpec::primitive(32);
    Key key = Key::from_hex("deadbeef", 32);
    KeystreamSource a(spec, key), b(spec, key);
    CHECK(a.take_bits(1000) == b.take_bits(1000));

    KeystreamSource resumed(spec, a.state_key());
    CHECK(a.take_bits(64) == resumed.take_bits(64));
}

TEST_CASE("sampled keys are well-formed and nonzero") {
    for (unsigned degree : {8u, 12u, 256u}) {
        Key k = sample_key(degree);
        CHECK(k.bytes.size() == (degree + 7) / 8);
        bool zero = true;
        for (auto b : k.bytes) zero &= (b == 0);
        CHECK_FALSE(zero);
        // round-trips through hex with pad bits intact
        CHECK(Key::from_hex(k.to_hex(), degree).bytes == k.bytes);
    }
}

TEST_CASE("key file round trip") {
    std::string path = "keystream_test_key.txt";
    auto spec = LfsrSpec::primitive(64);
    Key key = sample_key(64);
    write_key_file(path, spec, key);
    KeyFile kf = read_key_file(path);
    CHECK(kf.spec.degree == 64);
    CHECK(kf.spec.taps == spec.taps);
    CHECK(kf.key.bytes == key.bytes);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_key_file("does_not_exist.key"), std::invalid_argument);
}

} // TEST_SUITE
