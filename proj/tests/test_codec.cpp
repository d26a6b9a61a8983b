#include "doctest.h"

#include "sots/codec.hpp"
#include "sots/errors.hpp"
#include "sots/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

using namespace sots;

namespace {

KeystreamSource test_source(std::uint64_t salt, unsigned degree = 64) {
    auto spec = LfsrSpec::primitive(degree);
    Key key;
    key.bytes.assign((degree + 7) / 8, 0);
    Rng rng(derive_seed(0xc0dec, salt));
    for (auto& b : key.bytes) b = std::uint8_t(rng.below(256));
    if (std::all_of(key.bytes.begin(), key.bytes.end(), [](auto b) { return b == 0; }))
        key.bytes[0] = 1;
    return KeystreamSource(spec, key);
}

double rel_sq_error(const std::vector<double>& x, const std::vector<double>& xt) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - xt[i]) * (x[i] - xt[i]);
        den += x[i] * x[i];
    }
    return num / den;
}

// exactly sparse coefficient vector with `k` unit-scale gaussian entries
std::vector<double> sparse_coeffs(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<double> alpha(n, 0.0);
    std::size_t placed = 0;
    while (placed < k) {
        const auto p = rng.below(n);
        if (alpha[p] == 0.0) {
            double v = rng.gaussian();
            if (v == 0.0) v = 1.0;
            alpha[p] = v;
            ++placed;
        }
    }
    return alpha;
}

std::filesystem::path temp_file(const char* stem) {
    return std::filesystem::temp_directory_path() / stem;
}

} // namespace

TEST_SUITE("codec") {

TEST_CASE("zero plaintext with zero noise encrypts to the zero ciphertext") {
    SystemParams params(16, 8, 4, 16, 0.0);
    auto src = test_source(1, 16);
    std::vector<double> x(16, 0.0);
    auto enc = encrypt(src, params, x);
    CHECK(enc.ciphertext.values.size() == 8);
    for (double v : enc.ciphertext.values) CHECK(v == 0.0);
    CHECK(enc.ciphertext.plaintext_dim == 16);
    CHECK(enc.ciphertext.ciphertext_dim == 8);
    CHECK(enc.ciphertext.row_weight == 4);
    CHECK(enc.ciphertext.noise_sigma == 0.0);
    CHECK_FALSE(enc.keystream_reuse);
}

TEST_CASE("each encryption renews the sensing key") {
    SystemParams params(32, 16, 8, 16, 0.0);
    auto src = test_source(2, 16);
    Rng rng(7);
    std::vector<double> x(32);
    for (auto& v : x) v = rng.gaussian();
    auto a = encrypt(src, params, x);
    auto b = encrypt(src, params, x);
    CHECK(a.key.signs != b.key.signs);
    CHECK(a.ciphertext.values != b.ciphertext.values);
    // the ciphertext is exactly Phi x for the returned key when sigma = 0
    auto direct = apply_phi(a.key, params, x);
    CHECK(a.ciphertext.values == direct);
}

TEST_CASE("noise bookkeeping matches the configured pnr and power") {
    Rng rng(99);
    std::vector<double> x(64);
    for (auto& v : x) v = rng.gaussian();
    const double pnr = 20.0;
    const double sigma = noise_sigma_for_pnr(x, 32, pnr);
    double xn2 = 0.0;
    for (double v : x) xn2 += v * v;
    CHECK(xn2 / (32.0 * sigma * sigma) == doctest::Approx(pnr).epsilon(1e-12));

    // E||y - Phi x||^2 = M sigma^2 over repeated encryptions
    SystemParams params(64, 32, 8, 64, 0.5);
    auto src = test_source(3);
    double acc = 0.0;
    const int reps = 300;
    for (int t = 0; t < reps; ++t) {
        auto enc = encrypt(src, params, x, derive_seed(500, t));
        auto clean = apply_phi(enc.key, params, x);
        for (std::size_t i = 0; i < clean.size(); ++i)
            acc += (enc.ciphertext.values[i] - clean[i]) * (enc.ciphertext.values[i] - clean[i]);
    }
    const double mean = acc / reps;
    const double want = 32.0 * 0.25;
    CHECK(mean > want * 0.9);
    CHECK(mean < want * 1.1);
    CHECK_THROWS_AS((void)noise_sigma_for_pnr(x, 32, 0.0), std::invalid_argument);
}

TEST_CASE("noiseless sparse plaintexts decrypt essentially exactly") {
    SystemParams params(256, 128, 32, 64, 0.0);
    auto src = test_source(4);
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, 256);
    settings.sparsity = 8;
    Rng rng(1234);
    for (int t = 0; t < 20; ++t) {
        auto alpha = sparse_coeffs(rng, 256, 8);
        auto x = synthesize(settings.basis, alpha);
        auto enc = encrypt(src, params, x);
        auto res = decrypt_detailed(enc.key, params, enc.ciphertext, settings);
        CHECK(rel_sq_error(x, res.plaintext) < 1e-2);
        CHECK(res.residual_ratio < 1e-6);
    }
}

TEST_CASE("zero ciphertext decrypts to zero without iterating") {
    SystemParams params(64, 32, 8, 64, 0.0);
    auto src = test_source(5);
    auto enc = encrypt(src, params, std::vector<double>(64, 0.0));
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, 64);
    auto res = decrypt_detailed(enc.key, params, enc.ciphertext, settings);
    CHECK(res.iterations == 0);
    for (double v : res.plaintext) CHECK(v == 0.0);
}

TEST_CASE("single-atom recovery is exact for every coefficient index") {
    SystemParams params(64, 32, 16, 64, 0.0);
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, 64);
    settings.sparsity = 1;
    auto src = test_source(6);
    for (std::size_t j = 0; j < 64; ++j) {
        std::vector<double> alpha(64, 0.0);
        alpha[j] = 2.5;
        auto x = synthesize(settings.basis, alpha);
        auto enc = encrypt(src, params, x);
        auto res = decrypt_detailed(enc.key, params, enc.ciphertext, settings);
        REQUIRE(res.support.size() == 1);
        CHECK(res.support[0] == j);
        CHECK(res.coefficients[j] == doctest::Approx(2.5).epsilon(1e-8));
    }
}

TEST_CASE("omp residual is nonincreasing in the iteration budget") {
    SystemParams params(128, 64, 16, 64, 0.0);
    auto src = test_source(7);
    Rng rng(88);
    std::vector<double> x(128);
    for (auto& v : x) v = rng.gaussian(); // not sparse: forces a long pursuit
    auto enc = encrypt(src, params, x);
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, 128);
    settings.residual_tol = 0.0;
    double prev = 2.0;
    for (std::size_t budget = 1; budget <= 12; ++budget) {
        settings.sparsity = budget;
        auto res = decrypt_detailed(enc.key, params, enc.ciphertext, settings);
        CHECK(res.support.size() == budget);
        CHECK(res.iterations == budget);
        CHECK(res.residual_ratio <= prev + 1e-12);
        prev = res.residual_ratio;
    }
}

TEST_CASE("decrypting with a renewed key fails as it should") {
    SystemParams params(256, 128, 32, 64, 0.0);
    auto src = test_source(8);
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, 256);
    settings.sparsity = 8;
    Rng rng(4321);
    auto alpha = sparse_coeffs(rng, 256, 8);
    auto x = synthesize(settings.basis, alpha);
    auto enc = encrypt(src, params, x);
    auto other = encrypt(src, params, x); // different one-time key
    auto wrong = decrypt(other.key, params, enc.ciphertext, settings);
    CHECK(rel_sq_error(x, wrong) > 0.5);
}

TEST_CASE("recovery settings are validated") {
    SystemParams params(64, 32, 8, 64, 0.0);
    auto src = test_source(9);
    auto enc = encrypt(src, params, std::vector<double>(64, 1.0));
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, 64);

    settings.sparsity = 33; // exceeds M
    CHECK_THROWS_AS((void)decrypt(enc.key, params, enc.ciphertext, settings),
                    std::invalid_argument);
    settings.sparsity = 4;
    settings.residual_tol = -1.0;
    CHECK_THROWS_AS((void)decrypt(enc.key, params, enc.ciphertext, settings),
                    std::invalid_argument);
    settings.residual_tol = 1e-6;
    settings.basis = Basis::one_d(BasisKind::dct, 32);
    CHECK_THROWS_AS((void)decrypt(enc.key, params, enc.ciphertext, settings),
                    std::invalid_argument);
    settings.basis = Basis::one_d(BasisKind::dct, 64);

    auto bad = enc.ciphertext;
    bad.row_weight = 4; // echo disagrees with params
    CHECK_THROWS_AS((void)decrypt(enc.key, params, bad, settings), ciphertext_error);

    SystemParams other(64, 32, 16, 64, 0.0);
    CHECK_THROWS_AS((void)decrypt(enc.key, other, enc.ciphertext, settings),
                    std::invalid_argument);

    // default budget is M/4
    auto res = decrypt_detailed(enc.key, params, enc.ciphertext, RecoverySettings{
                                    .sparsity = 0, .residual_tol = 0.0,
                                    .basis = Basis::one_d(BasisKind::dct, 64)});
    CHECK(res.support.size() == 8);
}

TEST_CASE("mean recovery error is flat across the row weight") {
    // compressible (power-law) plaintexts shared across q; the sensing row
    // weight shouldn't matter for recovery quality
    const std::size_t n = 256, m = 128, budget = 8;
    RecoverySettings settings;
    settings.basis = Basis::one_d(BasisKind::dct, n);
    settings.sparsity = budget;
    Rng prng(31337);
    std::vector<std::vector<double>> plaintexts;
    for (int t = 0; t < 40; ++t) {
        std::vector<double> alpha(n, 0.0);
        std::size_t placed = 0;
        while (placed < 32) {
            const auto p = prng.below(n);
            if (alpha[p] == 0.0) {
                ++placed;
                alpha[p] = std::pow(double(placed), -2.0) * prng.sign();
            }
        }
        plaintexts.push_back(synthesize(settings.basis, alpha));
    }
    std::vector<double> means;
    for (std::size_t q : {16, 32, 64}) {
        SystemParams params(n, m, q, 64, 0.0);
        auto src = test_source(derive_seed(10, q));
        double acc = 0.0;
        for (const auto& x : plaintexts) {
            auto enc = encrypt(src, params, x);
            acc += rel_sq_error(x, decrypt(enc.key, params, enc.ciphertext, settings));
        }
        means.push_back(acc / double(plaintexts.size()));
    }
    const double lo = *std::min_element(means.begin(), means.end());
    const double hi = *std::max_element(means.begin(), means.end());
    CHECK(lo > 0.0);
    CHECK((hi - lo) / hi < 0.2);
}

TEST_CASE("psnr formula, exact marker, and validation") {
    std::vector<double> x(100, 40.0);
    CHECK(psnr(x, x, 255.0).exact);
    CHECK(psnr(x, x, 255.0).db == std::numeric_limits<double>::infinity());

    // ||x - xt||^2 = N * 255^2 is the 0 dB fixed point
    std::vector<double> zero(100, 0.0), off(100, 255.0);
    auto p = psnr(zero, off, 255.0);
    CHECK_FALSE(p.exact);
    CHECK(p.db == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<double> shorter(99, 0.0);
    CHECK_THROWS_AS((void)psnr(zero, shorter, 255.0), std::invalid_argument);
    CHECK_THROWS_AS((void)psnr(zero, off, 0.0), std::invalid_argument);
}

TEST_CASE("ciphertext files round-trip and reject corruption") {
    SystemParams params(32, 16, 8, 16, 0.25);
    auto src = test_source(11, 16);
    Rng rng(3);
    std::vector<double> x(32);
    for (auto& v : x) v = rng.gaussian();
    auto enc = encrypt(src, params, x, 777);
    const auto path = temp_file("sots_codec_ct.bin");
    write_ciphertext(path, enc.ciphertext);
    auto back = read_ciphertext(path);
    CHECK(back.values == enc.ciphertext.values);
    CHECK(back.plaintext_dim == 32);
    CHECK(back.ciphertext_dim == 16);
    CHECK(back.row_weight == 8);
    CHECK(back.noise_sigma == 0.25);

    { // bad magic
        std::ofstream f(path, std::ios::binary);
        f << "NOPE then some bytes";
    }
    CHECK_THROWS_AS((void)read_ciphertext(path), ciphertext_error);
    { // truncated after the header
        std::ofstream f(path, std::ios::binary);
        f << "SOTS";
        f.put(32).put(0).put(0).put(0);
    }
    CHECK_THROWS_AS((void)read_ciphertext(path), ciphertext_error);
    // non-finite entry
    auto poisoned = enc.ciphertext;
    poisoned.values[3] = std::numeric_limits<double>::quiet_NaN();
    write_ciphertext(path, poisoned);
    CHECK_THROWS_AS((void)read_ciphertext(path), ciphertext_error);
    std::filesystem::remove(path);
}

TEST_CASE("pgm io round-trips column-stacked pixels") {
    PgmImage img;
    img.rows = 5;
    img.cols = 8;
    img.pixels.resize(40);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 8; ++c) img.pixels[r + c * 5] = std::uint8_t(10 * r + c);
    const auto path = temp_file("sots_codec_img.pgm");
    write_pgm(path, img);
    auto back = read_pgm(path);
    CHECK(back.rows == 5);
    CHECK(back.cols == 8);
    CHECK(back.pixels == img.pixels);

    auto sig = back.to_signal();
    CHECK(sig[2] == double(img.pixels[2]));
    auto again = PgmImage::from_signal(sig, 5, 8);
    CHECK(again.pixels == img.pixels);

    // clamping and rounding
    std::vector<double> vals = {-3.0, 300.0, 17.6, 0.0};
    auto clamped = PgmImage::from_signal(vals, 2, 2);
    CHECK(clamped.pixels[0] == 0);
    CHECK(clamped.pixels[1] == 255);
    CHECK(clamped.pixels[2] == 18);

    { // header with a comment line still parses
        std::ofstream f(path, std::ios::binary);
        f << "P5\n# a comment\n3 2\n255\n";
        for (int i = 0; i < 6; ++i) f.put(char(i));
    }
    auto commented = read_pgm(path);
    CHECK(commented.cols == 3);
    CHECK(commented.rows == 2);
    CHECK(commented.pixels[0 + 0 * 2] == 0); // raster (0,0)
    CHECK(commented.pixels[1 + 2 * 2] == 5); // raster (1,2), last byte

    { // 16-bit images rejected
        std::ofstream f(path, std::ios::binary);
        f << "P5\n3 2\n65535\n";
        for (int i = 0; i < 12; ++i) f.put(char(i));
    }
    CHECK_THROWS_AS((void)read_pgm(path), std::runtime_error);
    { // truncated pixels
        std::ofstream f(path, std::ios::binary);
        f << "P5\n3 2\n255\n";
        f.put(char(1));
    }
    CHECK_THROWS_AS((void)read_pgm(path), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("keystream reuse is flagged once the period bound is hit") {
    SystemParams params(8, 4, 2, 8, 0.0);
    auto spec = LfsrSpec::primitive(8);
    auto key = Key::from_hex("53", 8);
    KeystreamSource src(spec, key);
    std::vector<double> x(8, 1.0);
    bool seen = false;
    for (int t = 0; t < 12; ++t) {
        auto enc = encrypt(src, params, x);
        if (seen) CHECK(enc.keystream_reuse); // sticky once the budget is spent
        seen = seen || enc.keystream_reuse;
    }
    CHECK(seen);
    CHECK(src.emitted() >= 16); // 2^(k/2) symbols for k = 8
}

} // TEST_SUITE
