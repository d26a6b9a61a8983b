#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sots/rng.hpp"
#include "sots/sensing.hpp"

using namespace sots;

namespace {

KeystreamSource test_source(std::uint64_t salt = 0) {
    Key key = Key::from_hex("00000000deadbeef", 64);
    key.bytes[3] = std::uint8_t(salt);
    key.bytes[2] = std::uint8_t(salt >> 8);
    return KeystreamSource(LfsrSpec::primitive(64), key);
}

std::vector<double> dense_row(const SensingKey& key, const SystemParams& p, std::size_t i) {
    std::vector<double> row(p.plaintext_dim);
    std::vector<double> e(p.plaintext_dim, 0.0);
    for (std::size_t j = 0; j < p.plaintext_dim; ++j) {
        e[j] = 1.0;
        row[j] = apply_phi(key, p, e)[i];
        e[j] = 0.0;
    }
    return row;
}

} // namespace

TEST_SUITE("sensing") {

TEST_CASE("params validation") {
    CHECK_NOTHROW(SystemParams(8, 4, 2, 4));
    CHECK_NOTHROW(SystemParams(8, 1, 8, 4));     // dense special case
    CHECK_THROWS_AS(SystemParams(8, 4, 1, 4), std::invalid_argument);  // q < N/M
    CHECK_THROWS_AS(SystemParams(8, 4, 5, 4), std::invalid_argument);  // q > N/2, q != N
    CHECK_THROWS_AS(SystemParams(12, 6, 5, 4), std::invalid_argument); // eta not integer
    CHECK_THROWS_AS(SystemParams(8, 3, 2, 4), std::invalid_argument);  // Mr not integer
    CHECK_THROWS_AS(SystemParams(8, 4, 2, 16), std::invalid_argument); // k > N
    CHECK_THROWS_AS(SystemParams(8, 4, 2, 4, -1.0), std::invalid_argument);

    SystemParams p(256, 128, 32, 64, 0.25);
    CHECK(p.block_count() == 8);
    CHECK(p.column_weight() == 16);
    CHECK(p.rows_covering_key() == 2);
    CHECK(p.row_density() == doctest::Approx(0.125));
    CHECK(p.compression_ratio() == doctest::Approx(0.5));
    CHECK(p.scale() == doctest::Approx(0.25));
}

TEST_CASE("index sets walk blocks cyclically") {
    SystemParams p(8, 8, 2, 4);
    CHECK(index_set(1, p) == std::vector<std::uint32_t>{1, 2});
    CHECK(index_set(2, p) == std::vector<std::uint32_t>{3, 4});
    CHECK(index_set(4, p) == std::vector<std::uint32_t>{7, 8});
    CHECK(index_set(5, p) == std::vector<std::uint32_t>{1, 2}); // (5-1) mod 4 = 0
    for (std::size_t i = 1; i <= 8; ++i) {
        auto idx = index_set(i, p);
        CHECK(idx.size() == p.row_weight);
        CHECK(idx.back() <= p.plaintext_dim);
    }
    CHECK_THROWS_AS(index_set(0, p), std::invalid_argument);
    CHECK_THROWS_AS(index_set(9, p), std::invalid_argument);
}

TEST_CASE("sign table consumes the stream gap-free in support order") {
    SystemParams p(8, 8, 2, 8);
    auto src = test_source(1);
    auto reference = test_source(1);
    auto expected = reference.take_bits(16); // q*M symbols

    auto built = build_sensing_key(src, p);
    CHECK(built.sign_bits == 16);
    CHECK(built.key.signs == expected);
    // row 5 opens the second block: symbols b9, b10
    CHECK(built.key.row_signs(4)[0] == expected[8]);
    CHECK(built.key.row_signs(4)[1] == expected[9]);
    // permutation consumed its own bits afterwards
    CHECK(built.perm_bits > 0);
    CHECK(src.emitted() == 16 + built.perm_bits);
}

TEST_CASE("c_s is exactly qM and builds never share symbols") {
    SystemParams p(64, 16, 8, 16);
    auto src = test_source(2);
    auto first = build_sensing_key(src, p);
    std::uint64_t mark = src.emitted();
    auto second = build_sensing_key(src, p);
    CHECK(first.sign_bits == 128);
    CHECK(second.sign_bits == 128);
    CHECK(src.emitted() == mark + second.sign_bits + second.perm_bits);
    CHECK(first.key.signs != second.key.signs); // one-time usage
}

TEST_CASE("average permutation cost stays within [N log2 N, 2N log2 N]") {
    const std::size_t n = 1024;
    SystemParams p(n, 256, 64, 64);
    auto src = test_source(3);
    double total = 0;
    const int keys = 100;
    for (int r = 0; r < keys; ++r) total += double(build_sensing_key(src, p).perm_bits);
    double avg = total / keys;
    double nlogn = double(n) * 10.0; // log2(1024)
    CHECK(avg >= nlogn);
    CHECK(avg <= 2 * nlogn);
}

TEST_CASE("permutation generator: edge cases and exact uniformity") {
    int calls = 0;
    auto ones = [&calls] { ++calls; return 1; };
    auto single = generate_permutation(ones, 1);
    CHECK(single.perm == std::vector<std::uint32_t>{0});
    CHECK(single.bits_used == 0);
    CHECK(calls == 0);

    // n = 2: one bit decides; 1 keeps order, 0 swaps
    auto keep = generate_permutation([] { return 1; }, 2);
    CHECK(keep.perm == std::vector<std::uint32_t>{0, 1});
    CHECK(keep.bits_used == 1);
    auto swapped = generate_permutation([] { return 0; }, 2);
    CHECK(swapped.perm == std::vector<std::uint32_t>{1, 0});

    Rng rng(271828);
    auto coin = [&rng] { return int(rng.next() >> 63); };
    std::map<std::vector<std::uint32_t>, int> freq;
    const int streams = 100000;
    for (int t = 0; t < streams; ++t) ++freq[generate_permutation(coin, 4).perm];
    CHECK(freq.size() == 24);
    double expect = streams / 24.0;
    double sigma = std::sqrt(streams * (1.0 / 24) * (23.0 / 24));
    for (auto& [perm, count] : freq) {
        CHECK(count > expect - 3 * sigma);
        CHECK(count < expect + 3 * sigma);
    }
}

TEST_CASE("operator action on canonical inputs") {
    SystemParams p(8, 4, 2, 4);
    auto src = test_source(4);
    auto key = build_sensing_key(src, p).key;

    std::vector<double> zero(8, 0.0);
    auto y0 = apply_phi(key, p, zero);
    CHECK(std::all_of(y0.begin(), y0.end(), [](double v) { return v == 0.0; }));

    // identity permutation, all-plus signs: constant input sqrt(Mr) gives q
    SensingKey plus;
    plus.rows = 4;
    plus.row_weight = 2;
    plus.signs.assign(8, +1);
    plus.perm.resize(8);
    std::iota(plus.perm.begin(), plus.perm.end(), 0u);
    std::vector<double> x(8, std::sqrt(double(p.column_weight())));
    for (double v : apply_phi(plus, p, x)) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(apply_phi(key, p, std::vector<double>(7)), std::invalid_argument);
    CHECK_THROWS_AS(apply_phi_adjoint(key, p, std::vector<double>(5)), std::invalid_argument);
}

TEST_CASE("realized rows have exact support and magnitude") {
    SystemParams p(16, 8, 4, 8);
    auto src = test_source(5);
    auto key = build_sensing_key(src, p).key;
    auto inv = key.inverse_perm();
    double mag = p.scale();
    for (std::size_t i = 0; i < p.ciphertext_dim; ++i) {
        auto row = dense_row(key, p, i);
        std::size_t nonzeros = 0;
        for (double v : row)
            if (v != 0.0) {
                ++nonzeros;
                CHECK(std::abs(v) == mag); // exact: product of exact factors
            }
        CHECK(nonzeros == p.row_weight);
        // support = inverse-permuted index set
        for (auto l : index_set(i + 1, p)) CHECK(row[inv[l - 1]] != 0.0);
    }
    // permutation is a bijection
    auto sorted = key.perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) CHECK(sorted[j] == j);
}

TEST_CASE("energy is preserved in expectation") {
    SystemParams p(128, 32, 16, 32);
    Rng rng(99);
    std::vector<double> x(128);
    for (auto& v : x) v = rng.gaussian();
    double xnorm2 = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);

    auto src = test_source(6);
    double sum = 0;
    const int keys = 10000;
    for (int r = 0; r < keys; ++r) {
        auto y = apply_phi(build_sensing_key(src, p).key, p, x);
        sum += std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
    }
    CHECK(sum / keys == doctest::Approx(xnorm2).epsilon(0.02));
}

TEST_CASE("adjoint identity holds to 1e-12") {
    SystemParams p(64, 32, 8, 16);
    auto src = test_source(7);
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        auto key = build_sensing_key(src, p).key;
        std::vector<double> x(64), y(32);
        for (auto& v : x) v = rng.gaussian();
        for (auto& v : y) v = rng.gaussian();
        auto yx = apply_phi(key, p, x);
        auto xy = apply_phi_adjoint(key, p, y);
        double lhs = std::inner_product(yx.begin(), yx.end(), y.begin(), 0.0);
        double rhs = std::inner_product(x.begin(), x.end(), xy.begin(), 0.0);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));
    }
}

TEST_CASE("single dense row spreads the one measurement everywhere") {
    SystemParams p(4, 1, 4, 2);
    auto src = test_source(8);
    auto key = build_sensing_key(src, p).key;
    auto out = apply_phi_adjoint(key, p, std::vector<double>{2.0});
    auto inv = key.inverse_perm();
    for (std::size_t l = 0; l < 4; ++l) {
        double expect = 2.0 * (key.signs[l] > 0 ? 1.0 : -1.0) * p.scale();
        CHECK(out[inv[l]] == doctest::Approx(expect));
    }
}

TEST_CASE("debug dump lists signed supports and the permutation") {
    SystemParams p(4, 2, 2, 2);
    auto src = test_source(9);
    auto key = build_sensing_key(src, p).key;
    auto dump = key.debug_dump();
    CHECK(dump.find("1:") == 0);
    CHECK(dump.find("perm:") != std::string::npos);
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 3);
}

} // TEST_SUITE
