#include "sots/sensing.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sots {

SystemParams::SystemParams(std::size_t n, std::size_t m, std::size_t q,
                           unsigned k, double sigma)
    : plaintext_dim(n), ciphertext_dim(m), row_weight(q), key_bits(k), noise_sigma(sigma) {
    if (n == 0 || m == 0 || q == 0) throw std::invalid_argument("dimensions must be positive");
    bool sparse_ok = q * m >= n && 2 * q <= n;
    if (!sparse_ok && q != n)
        throw std::invalid_argument("row weight must satisfy N/M <= q <= N/2 (or q = N dense)");
    if (n % q != 0)
        throw std::invalid_argument("N/q must be an integer");
    if ((m * q) % n != 0)
        throw std::invalid_argument("Mq/N must be an integer");
    if (k < 2) throw std::invalid_argument("key length must be >= 2");
    if (std::size_t(k) > n)
        throw std::invalid_argument("key length must not exceed the plaintext dimension");
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
}

double SystemParams::scale() const { return 1.0 / std::sqrt(double(column_weight())); }

std::vector<std::uint32_t> index_set(std::size_t row, const SystemParams& params) {
    if (row < 1 || row > params.ciphertext_dim)
        throw std::invalid_argument("row index outside [1, M]");
    std::size_t q = params.row_weight;
    std::size_t base = ((row - 1) % params.block_count()) * q;
    std::vector<std::uint32_t> idx(q);
    for (std::size_t l = 0; l < q; ++l) idx[l] = std::uint32_t(base + l + 1);
    return idx;
}

std::vector<std::uint32_t> SensingKey::inverse_perm() const {
    std::vector<std::uint32_t> inv(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) inv[perm[j]] = std::uint32_t(j);
    return inv;
}

std::string SensingKey::debug_dump() const {
    std::size_t n = perm.size();
    std::size_t eta = n / row_weight;
    auto inv = inverse_perm();
    std::ostringstream out;
    for (std::size_t i = 0; i < rows; ++i) {
        out << (i + 1) << ':';
        std::size_t base = (i % eta) * row_weight;
        auto sg = row_signs(i);
        for (std::size_t l = 0; l < row_weight; ++l)
            out << ' ' << (inv[base + l] + 1) << ':' << (sg[l] > 0 ? "+1" : "-1");
        out << '\n';
    }
    out << "perm:";
    for (std::size_t j = 0; j < n; ++j) out << (j ? "," : " ") << (perm[j] + 1);
    out << '\n';
    return out.str();
}

PermutationResult generate_permutation(const std::function<int()>& next_bit, std::size_t n) {
    if (n == 0) throw std::invalid_argument("permutation of an empty set");
    PermutationResult res;
    res.perm.resize(n);
    std::iota(res.perm.begin(), res.perm.end(), 0u);
    for (std::size_t j = n - 1; j >= 1; --j) {
        std::uint64_t range = j + 1;
        unsigned width = unsigned(std::bit_width(range - 1));
        std::uint64_t draw;
        do {
            draw = 0;
            for (unsigned b = 0; b < width; ++b) draw = draw << 1 | std::uint64_t(next_bit() & 1);
            res.bits_used += width;
        } while (draw >= range);
        std::swap(res.perm[j], res.perm[draw]);
    }
    return res;
}

BuildResult build_sensing_key(KeystreamSource& source, const SystemParams& params) {
    std::size_t m = params.ciphertext_dim, q = params.row_weight;
    BuildResult res;
    res.key.rows = m;
    res.key.row_weight = q;
    res.key.signs.resize(m * q);
    for (auto& s : res.key.signs) s = source.ssg_next_bipolar();
    res.sign_bits = std::uint64_t(m) * q;

    auto bits = [&source] { return source.ssg_next_bipolar() > 0 ? 1 : 0; };
    auto pr = generate_permutation(bits, params.plaintext_dim);
    res.key.perm = std::move(pr.perm);
    res.perm_bits = pr.bits_used;
    return res;
}

std::vector<double> apply_phi(const SensingKey& key, const SystemParams& params,
                              std::span<const double> x) {
    std::size_t n = params.plaintext_dim, m = params.ciphertext_dim, q = params.row_weight;
    if (x.size() != n) throw std::invalid_argument("plaintext dimension mismatch");
    if (key.rows != m || key.row_weight != q || key.perm.size() != n)
        throw std::invalid_argument("sensing key does not match params");
    std::vector<double> permuted(n);
    for (std::size_t j = 0; j < n; ++j) permuted[key.perm[j]] = x[j];
    std::vector<double> y(m);
    double scale = params.scale();
    std::size_t eta = params.block_count();
    for (std::size_t i = 0; i < m; ++i) {
        const double* seg = permuted.data() + (i % eta) * q;
        const std::int8_t* sg = key.signs.data() + i * q;
        double acc = 0;
        for (std::size_t l = 0; l < q; ++l) acc += sg[l] > 0 ? seg[l] : -seg[l];
        y[i] = scale * acc;
    }
    return y;
}

std::vector<double> apply_phi_adjoint(const SensingKey& key, const SystemParams& params,
                                      std::span<const double> y) {
    std::size_t n = params.plaintext_dim, m = params.ciphertext_dim, q = params.row_weight;
    if (y.size() != m) throw std::invalid_argument("measurement dimension mismatch");
    if (key.rows != m || key.row_weight != q || key.perm.size() != n)
        throw std::invalid_argument("sensing key does not match params");
    std::vector<double> gathered(n, 0.0);
    std::size_t eta = params.block_count();
    for (std::size_t i = 0; i < m; ++i) {
        double* seg = gathered.data() + (i % eta) * q;
        const std::int8_t* sg = key.signs.data() + i * q;
        double v = y[i];
        for (std::size_t l = 0; l < q; ++l) seg[l] += sg[l] > 0 ? v : -v;
    }
    std::vector<double> out(n);
    double scale = params.scale();
    for (std::size_t j = 0; j < n; ++j) out[j] = scale * gathered[key.perm[j]];
    return out;
}

} // namespace sots
