#pragma once

#include "sots/keystream.hpp"
#include "sots/sensing.hpp"
#include "sots/transforms.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace sots {

struct Ciphertext {
    std::vector<double> values;     // M measurements
    std::size_t plaintext_dim = 0;  // N echo
    std::size_t ciphertext_dim = 0; // M echo
    std::size_t row_weight = 0;     // q echo
    double noise_sigma = 0.0;       // sigma used at encryption
};

struct EncryptResult {
    Ciphertext ciphertext;
    SensingKey key;        // for the legitimate recipient (and tests)
    bool keystream_reuse = false; // set once cumulative draw reaches the period bound
};

// sigma achieving a target plaintext-to-noise ratio ||x||^2 / (M sigma^2)
double noise_sigma_for_pnr(std::span<const double> x, std::size_t ciphertext_dim, double pnr);

// One encryption: renews S and P from the keystream, y = Phi x + n.
// With sigma > 0 and no seed, the noise generator is seeded from the OS.
EncryptResult encrypt(KeystreamSource& source, const SystemParams& params,
                      std::span<const double> x,
                      std::optional<std::uint64_t> noise_seed = std::nullopt);

struct RecoverySettings {
    std::size_t sparsity = 0;   // OMP iteration budget; 0 means M/4
    double residual_tol = 1e-6; // relative residual stop
    Basis basis;                // sparsifying basis, dim N
};

struct RecoveryResult {
    std::vector<double> plaintext;       // x~
    std::vector<double> coefficients;    // alpha~, zeros off support
    std::vector<std::uint32_t> support;  // selected coefficient indices, in order
    std::vector<std::uint32_t> skipped;  // indices dropped as numerically singular
    std::size_t iterations = 0;
    double residual_ratio = 0.0;         // final ||r|| / ||y||
};

RecoveryResult decrypt_detailed(const SensingKey& key, const SystemParams& params,
                                const Ciphertext& y, const RecoverySettings& settings);
std::vector<double> decrypt(const SensingKey& key, const SystemParams& params,
                            const Ciphertext& y, const RecoverySettings& settings);

struct PsnrValue {
    double db = 0.0;
    bool exact = false; // distinguished marker for a zero-error match
};

PsnrValue psnr(std::span<const double> original, std::span<const double> decrypted,
               double peak);

// Binary ciphertext container: magic "SOTS", u32 N, M, q, M doubles, sigma.
void write_ciphertext(const std::filesystem::path& path, const Ciphertext& ct);
Ciphertext read_ciphertext(const std::filesystem::path& path);

// 8-bit binary PGM (P5); pixel (r, c) of the rows x cols raster sits at
// index r + c*rows, so the stored vector is the column-stacked signal.
struct PgmImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels; // column-stacked

    std::vector<double> to_signal() const;
    static PgmImage from_signal(std::span<const double> x, std::size_t rows,
                                std::size_t cols); // rounds and clamps to [0, 255]
};

PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& image);

} // namespace sots
