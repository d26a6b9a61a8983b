#include "sots/codec.hpp"

#include "sots/errors.hpp"
#include "sots/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace sots {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void put_u32_le(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64_le(std::ofstream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32_le(std::ifstream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ciphertext_error("ciphertext file truncated");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

double get_f64_le(std::ifstream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw ciphertext_error("ciphertext file truncated");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

// Skips PGM whitespace and '#' comments, then parses a decimal token.
std::size_t pgm_number(std::ifstream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw std::runtime_error("pgm: malformed header");
    std::size_t v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + std::size_t(c - '0');
        if (v > 1u << 24) throw std::runtime_error("pgm: header value out of range");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return v;
}

} // namespace

double noise_sigma_for_pnr(std::span<const double> x, std::size_t ciphertext_dim, double pnr) {
    if (pnr <= 0.0 || ciphertext_dim == 0)
        throw std::invalid_argument("codec: PNR and dimension must be positive");
    return norm(x) / std::sqrt(double(ciphertext_dim) * pnr);
}

EncryptResult encrypt(KeystreamSource& source, const SystemParams& params,
                      std::span<const double> x, std::optional<std::uint64_t> noise_seed) {
    if (x.size() != params.plaintext_dim)
        throw std::invalid_argument("codec: plaintext has wrong dimension");
    EncryptResult out;
    auto built = build_sensing_key(source, params); // S and P renewed per call
    out.key = std::move(built.key);
    out.ciphertext.values = apply_phi(out.key, params, x);
    out.ciphertext.plaintext_dim = params.plaintext_dim;
    out.ciphertext.ciphertext_dim = params.ciphertext_dim;
    out.ciphertext.row_weight = params.row_weight;
    out.ciphertext.noise_sigma = params.noise_sigma;
    if (params.noise_sigma > 0.0) {
        std::uint64_t seed;
        if (noise_seed) {
            seed = *noise_seed;
        } else {
            std::random_device rd;
            seed = (std::uint64_t(rd()) << 32) | rd();
        }
        Rng rng(seed);
        for (auto& v : out.ciphertext.values) v += params.noise_sigma * rng.gaussian();
    }
    // one-time property exhausted: cumulative draw reaches the period bound
    const std::size_t half = params.key_bits / 2;
    out.keystream_reuse = half < 64 && source.emitted() >= (std::uint64_t(1) << half);
    return out;
}

RecoveryResult decrypt_detailed(const SensingKey& key, const SystemParams& params,
                                const Ciphertext& y, const RecoverySettings& settings) {
    const std::size_t n = params.plaintext_dim;
    const std::size_t m = params.ciphertext_dim;
    if (key.rows != m || key.row_weight != params.row_weight || key.perm.size() != n)
        throw std::invalid_argument("codec: key does not match the system parameters");
    if (y.values.size() != m || y.plaintext_dim != n || y.ciphertext_dim != m ||
        y.row_weight != params.row_weight)
        throw ciphertext_error("codec: ciphertext does not match the system parameters");
    if (settings.basis.dim != n)
        throw std::invalid_argument("codec: basis dimension does not match the plaintext");
    if (settings.residual_tol < 0.0)
        throw std::invalid_argument("codec: residual tolerance must be nonnegative");
    std::size_t budget = settings.sparsity ? settings.sparsity : std::max<std::size_t>(1, m / 4);
    if (budget > m) throw std::invalid_argument("codec: sparsity budget exceeds measurements");

    RecoveryResult res;
    res.coefficients.assign(n, 0.0);
    res.plaintext.assign(n, 0.0);

    const double norm_y = norm(y.values);
    if (norm_y == 0.0) return res; // nothing to explain

    std::vector<double> r = y.values;          // residual, kept orthogonal to span(Q)
    std::vector<double> qcols;                 // orthonormal columns, m x s flat
    std::vector<double> rmat(budget * budget, 0.0); // upper-triangular factor
    std::vector<double> z;                     // Q^T y entries
    std::vector<std::uint8_t> unavailable(n, 0);
    std::vector<double> e(n, 0.0);

    double rnorm = norm_y;
    while (res.support.size() < budget && rnorm / norm_y >= settings.residual_tol) {
        ++res.iterations;
        // correlation of the residual with the columns of Phi Psi^T
        auto corr = analyze(settings.basis, apply_phi_adjoint(key, params, r));
        std::size_t pick = n;
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = std::abs(corr[j]);
            if (!unavailable[j] && a > best) {
                best = a;
                pick = j;
            }
        }
        if (pick == n || best == 0.0) break; // no usable column left

        e[pick] = 1.0;
        auto v = apply_phi(key, params, synthesize(settings.basis, e));
        e[pick] = 0.0;

        // Gram-Schmidt against accepted columns, one reorthogonalization pass
        const std::size_t s = res.support.size();
        const double vnorm = norm(v);
        std::vector<double> coef(s, 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t l = 0; l < s; ++l) {
                const double c =
                    dot(std::span(qcols).subspan(l * m, m), v);
                coef[l] += c;
                const double* qc = qcols.data() + l * m;
                for (std::size_t i = 0; i < m; ++i) v[i] -= c * qc[i];
            }
        }
        const double wnorm = norm(v);
        if (wnorm <= vnorm * 1e-10 || wnorm == 0.0) {
            // numerically inside the current span: drop it and keep going
            unavailable[pick] = 1;
            res.skipped.push_back(std::uint32_t(pick));
            continue;
        }
        for (std::size_t l = 0; l < s; ++l) rmat[l * budget + s] = coef[l];
        rmat[s * budget + s] = wnorm;
        const double inv = 1.0 / wnorm;
        for (auto& vi : v) vi *= inv;
        const double zi = dot(v, r);
        z.push_back(zi);
        for (std::size_t i = 0; i < m; ++i) r[i] -= zi * v[i];
        qcols.insert(qcols.end(), v.begin(), v.end());
        res.support.push_back(std::uint32_t(pick));
        unavailable[pick] = 1;
        rnorm = norm(r);
    }

    // back-substitute R a = z on the selected support
    const std::size_t s = res.support.size();
    std::vector<double> a(s, 0.0);
    for (std::size_t irev = s; irev-- > 0;) {
        double acc = z[irev];
        for (std::size_t l = irev + 1; l < s; ++l) acc -= rmat[irev * budget + l] * a[l];
        a[irev] = acc / rmat[irev * budget + irev];
    }
    for (std::size_t i = 0; i < s; ++i) res.coefficients[res.support[i]] = a[i];
    res.plaintext = synthesize(settings.basis, res.coefficients);
    res.residual_ratio = rnorm / norm_y;
    return res;
}

std::vector<double> decrypt(const SensingKey& key, const SystemParams& params,
                            const Ciphertext& y, const RecoverySettings& settings) {
    return decrypt_detailed(key, params, y, settings).plaintext;
}

PsnrValue psnr(std::span<const double> original, std::span<const double> decrypted,
               double peak) {
    if (original.size() != decrypted.size())
        throw std::invalid_argument("codec: psnr dimension mismatch");
    if (!(peak > 0.0)) throw std::invalid_argument("codec: psnr peak must be positive");
    double err2 = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double d = original[i] - decrypted[i];
        err2 += d * d;
    }
    PsnrValue out;
    if (err2 == 0.0) {
        out.exact = true;
        out.db = std::numeric_limits<double>::infinity();
        return out;
    }
    out.db = 10.0 * std::log10(double(original.size()) * peak * peak / err2);
    return out;
}

void write_ciphertext(const std::filesystem::path& path, const Ciphertext& ct) {
    if (ct.values.size() != ct.ciphertext_dim)
        throw ciphertext_error("ciphertext length disagrees with its dimension field");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write("SOTS", 4);
    put_u32_le(out, std::uint32_t(ct.plaintext_dim));
    put_u32_le(out, std::uint32_t(ct.ciphertext_dim));
    put_u32_le(out, std::uint32_t(ct.row_weight));
    for (double v : ct.values) put_f64_le(out, v);
    put_f64_le(out, ct.noise_sigma);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Ciphertext read_ciphertext(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SOTS", 4) != 0)
        throw ciphertext_error("not a ciphertext file (bad magic)");
    Ciphertext ct;
    ct.plaintext_dim = get_u32_le(in);
    ct.ciphertext_dim = get_u32_le(in);
    ct.row_weight = get_u32_le(in);
    if (ct.ciphertext_dim == 0 || ct.ciphertext_dim > (1u << 28))
        throw ciphertext_error("ciphertext dimension out of range");
    ct.values.resize(ct.ciphertext_dim);
    for (auto& v : ct.values) v = get_f64_le(in);
    ct.noise_sigma = get_f64_le(in);
    for (double v : ct.values)
        if (!std::isfinite(v)) throw ciphertext_error("non-finite ciphertext entry");
    if (!std::isfinite(ct.noise_sigma) || ct.noise_sigma < 0.0)
        throw ciphertext_error("invalid noise level");
    return ct;
}

std::vector<double> PgmImage::to_signal() const {
    return std::vector<double>(pixels.begin(), pixels.end());
}

PgmImage PgmImage::from_signal(std::span<const double> x, std::size_t rows, std::size_t cols) {
    if (x.size() != rows * cols)
        throw std::invalid_argument("codec: signal length does not match image shape");
    PgmImage img;
    img.rows = rows;
    img.cols = cols;
    img.pixels.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = std::nearbyint(x[i]);
        img.pixels[i] = std::uint8_t(std::clamp(v, 0.0, 255.0));
    }
    return img;
}

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    char p, five;
    in.get(p);
    in.get(five);
    if (!in || p != 'P' || five != '5') throw std::runtime_error("pgm: not a binary P5 file");
    PgmImage img;
    img.cols = pgm_number(in); // width first in the header
    img.rows = pgm_number(in);
    const std::size_t maxval = pgm_number(in);
    if (maxval != 255) throw std::runtime_error("pgm: only 8-bit images supported");
    in.get(); // single whitespace after maxval
    if (img.rows == 0 || img.cols == 0) throw std::runtime_error("pgm: empty image");
    std::vector<std::uint8_t> raster(img.rows * img.cols);
    if (!in.read(reinterpret_cast<char*>(raster.data()), std::streamsize(raster.size())))
        throw std::runtime_error("pgm: truncated pixel data");
    img.pixels.resize(raster.size());
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c)
            img.pixels[r + c * img.rows] = raster[r * img.cols + c];
    return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& image) {
    if (image.pixels.size() != image.rows * image.cols)
        throw std::invalid_argument("codec: image buffer does not match its shape");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << image.cols << " " << image.rows << "\n255\n";
    std::vector<std::uint8_t> raster(image.pixels.size());
    for (std::size_t r = 0; r < image.rows; ++r)
        for (std::size_t c = 0; c < image.cols; ++c)
            raster[r * image.cols + c] = image.pixels[r + c * image.rows];
    out.write(reinterpret_cast<const char*>(raster.data()), std::streamsize(raster.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace sots
