#include "sots/transforms.hpp"

#include "sots/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sots {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Daubechies-4 analysis filters (orthonormal; g is the alternating flip of h).
constexpr double kD4H0 = (1.0 + 1.7320508075688772935) / (4.0 * 1.4142135623730950488);
constexpr double kD4H1 = (3.0 + 1.7320508075688772935) / (4.0 * 1.4142135623730950488);
constexpr double kD4H2 = (3.0 - 1.7320508075688772935) / (4.0 * 1.4142135623730950488);
constexpr double kD4H3 = (1.0 - 1.7320508075688772935) / (4.0 * 1.4142135623730950488);
constexpr double kD4G0 = kD4H3;
constexpr double kD4G1 = -kD4H2;
constexpr double kD4G2 = kD4H1;
constexpr double kD4G3 = -kD4H0;

// Row-major orthonormal DCT-II matrices, cached per size.
std::shared_ptr<const std::vector<double>> dct_matrix(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto mat = std::make_shared<std::vector<double>>(n * n);
    const double dc = std::sqrt(1.0 / double(n));
    const double ac = std::sqrt(2.0 / double(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double scale = (k == 0) ? dc : ac;
        for (std::size_t j = 0; j < n; ++j) {
            (*mat)[k * n + j] =
                scale * std::cos(std::numbers::pi * double(k) * (2.0 * double(j) + 1.0) /
                                 (2.0 * double(n)));
        }
    }
    cache.emplace(n, mat);
    return mat;
}

void wht_inplace(double* x, std::size_t n) {
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t base = 0; base < n; base += 2 * len) {
            for (std::size_t i = base; i < base + len; ++i) {
                const double a = x[i];
                const double b = x[i + len];
                x[i] = a + b;
                x[i + len] = a - b;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(double(n));
    for (std::size_t i = 0; i < n; ++i) x[i] *= scale;
}

// One Haar analysis step on x[0..len): averages to the front, details behind.
void haar_step_fwd(double* x, std::size_t len, double* scratch) {
    const std::size_t half = len / 2;
    constexpr double inv_rt2 = 0.70710678118654752440;
    for (std::size_t i = 0; i < half; ++i) {
        scratch[i] = (x[2 * i] + x[2 * i + 1]) * inv_rt2;
        scratch[half + i] = (x[2 * i] - x[2 * i + 1]) * inv_rt2;
    }
    std::memcpy(x, scratch, len * sizeof(double));
}

void haar_step_inv(double* x, std::size_t len, double* scratch) {
    const std::size_t half = len / 2;
    constexpr double inv_rt2 = 0.70710678118654752440;
    for (std::size_t i = 0; i < half; ++i) {
        scratch[2 * i] = (x[i] + x[half + i]) * inv_rt2;
        scratch[2 * i + 1] = (x[i] - x[half + i]) * inv_rt2;
    }
    std::memcpy(x, scratch, len * sizeof(double));
}

// One D4 analysis step with periodic wrap on x[0..len), len >= 4.
void d4_step_fwd(double* x, std::size_t len, double* scratch) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double x0 = x[(2 * i) % len];
        const double x1 = x[(2 * i + 1) % len];
        const double x2 = x[(2 * i + 2) % len];
        const double x3 = x[(2 * i + 3) % len];
        scratch[i] = kD4H0 * x0 + kD4H1 * x1 + kD4H2 * x2 + kD4H3 * x3;
        scratch[half + i] = kD4G0 * x0 + kD4G1 * x1 + kD4G2 * x2 + kD4G3 * x3;
    }
    std::memcpy(x, scratch, len * sizeof(double));
}

void d4_step_inv(double* x, std::size_t len, double* scratch) {
    const std::size_t half = len / 2;
    std::fill(scratch, scratch + len, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        const double a = x[i];
        const double d = x[half + i];
        scratch[(2 * i) % len] += kD4H0 * a + kD4G0 * d;
        scratch[(2 * i + 1) % len] += kD4H1 * a + kD4G1 * d;
        scratch[(2 * i + 2) % len] += kD4H2 * a + kD4G2 * d;
        scratch[(2 * i + 3) % len] += kD4H3 * a + kD4G3 * d;
    }
    std::memcpy(x, scratch, len * sizeof(double));
}

// In-place 1D analysis on x[0..n) for a validated kind/size.
void analyze_1d(BasisKind kind, double* x, std::size_t n, std::vector<double>& scratch) {
    switch (kind) {
    case BasisKind::identity:
        return;
    case BasisKind::dct: {
        auto mat = dct_matrix(n);
        scratch.assign(n, 0.0);
        const double* m = mat->data();
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            const double* row = m + k * n;
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
            scratch[k] = acc;
        }
        std::memcpy(x, scratch.data(), n * sizeof(double));
        return;
    }
    case BasisKind::wht:
        wht_inplace(x, n);
        return;
    case BasisKind::haar:
        scratch.resize(n);
        for (std::size_t len = n; len >= 2; len /= 2) haar_step_fwd(x, len, scratch.data());
        return;
    case BasisKind::d4:
        scratch.resize(n);
        for (std::size_t len = n; len >= 4; len /= 2) d4_step_fwd(x, len, scratch.data());
        return;
    }
    throw std::invalid_argument("transforms: unknown basis kind");
}

void synthesize_1d(BasisKind kind, double* x, std::size_t n, std::vector<double>& scratch) {
    switch (kind) {
    case BasisKind::identity:
        return;
    case BasisKind::dct: {
        auto mat = dct_matrix(n);
        scratch.assign(n, 0.0);
        const double* m = mat->data();
        for (std::size_t k = 0; k < n; ++k) {
            const double v = x[k];
            if (v == 0.0) continue;
            const double* row = m + k * n;
            for (std::size_t j = 0; j < n; ++j) scratch[j] += v * row[j];
        }
        std::memcpy(x, scratch.data(), n * sizeof(double));
        return;
    }
    case BasisKind::wht:
        wht_inplace(x, n); // symmetric, self-inverse
        return;
    case BasisKind::haar:
        scratch.resize(n);
        for (std::size_t len = 2; len <= n; len *= 2) haar_step_inv(x, len, scratch.data());
        return;
    case BasisKind::d4:
        scratch.resize(n);
        for (std::size_t len = 4; len <= n; len *= 2) d4_step_inv(x, len, scratch.data());
        return;
    }
    throw std::invalid_argument("transforms: unknown basis kind");
}

// Column-stacked 2D pass: 1D transform down each column, then along each row.
template <typename Step>
void apply_2d(double* x, std::size_t side, std::vector<double>& scratch, Step step) {
    std::vector<double> line(side);
    for (std::size_t c = 0; c < side; ++c) step(x + c * side, side, scratch);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) line[c] = x[c * side + r];
        step(line.data(), side, scratch);
        for (std::size_t c = 0; c < side; ++c) x[c * side + r] = line[c];
    }
}

void validate_1d(BasisKind kind, std::size_t n) {
    if (n == 0) throw std::invalid_argument("transforms: dimension must be positive");
    switch (kind) {
    case BasisKind::identity:
    case BasisKind::dct:
        return;
    case BasisKind::wht:
        if (!is_pow2(n)) throw std::invalid_argument("transforms: WHT size must be a power of two");
        return;
    case BasisKind::haar:
        if (!is_pow2(n) || n < 2)
            throw std::invalid_argument("transforms: Haar size must be a power of two >= 2");
        return;
    case BasisKind::d4:
        if (!is_pow2(n) || n < 4)
            throw std::invalid_argument("transforms: D4 size must be a power of two >= 4");
        return;
    }
    throw std::invalid_argument("transforms: unknown basis kind");
}

double max_abs_entry_1d(BasisKind kind, std::size_t n) {
    std::vector<double> col(n), scratch;
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        analyze_1d(kind, col.data(), n, scratch);
        for (double v : col) best = std::max(best, std::abs(v));
    }
    return best;
}

} // namespace

BasisKind basis_kind_from_name(std::string_view name) {
    if (name == "identity") return BasisKind::identity;
    if (name == "dct") return BasisKind::dct;
    if (name == "wht") return BasisKind::wht;
    if (name == "haar") return BasisKind::haar;
    if (name == "d4") return BasisKind::d4;
    throw std::invalid_argument("transforms: unknown basis name '" + std::string(name) + "'");
}

const char* basis_name(BasisKind kind) {
    switch (kind) {
    case BasisKind::identity: return "identity";
    case BasisKind::dct: return "dct";
    case BasisKind::wht: return "wht";
    case BasisKind::haar: return "haar";
    case BasisKind::d4: return "d4";
    }
    throw std::invalid_argument("transforms: unknown basis kind");
}

Basis Basis::one_d(BasisKind kind, std::size_t dim) {
    validate_1d(kind, dim);
    Basis b;
    b.kind = kind;
    b.dim = dim;
    b.side = 0;
    return b;
}

Basis Basis::two_d(BasisKind kind, std::size_t side) {
    validate_1d(kind, side);
    Basis b;
    b.kind = kind;
    b.dim = side * side;
    b.side = side;
    return b;
}

std::vector<double> analyze(const Basis& basis, std::span<const double> x) {
    if (x.size() != basis.dim)
        throw std::invalid_argument("transforms: analyze input has wrong dimension");
    std::vector<double> out(x.begin(), x.end());
    std::vector<double> scratch;
    if (basis.is_2d())
        apply_2d(out.data(), basis.side, scratch,
                 [&](double* p, std::size_t n, std::vector<double>& s) {
                     analyze_1d(basis.kind, p, n, s);
                 });
    else
        analyze_1d(basis.kind, out.data(), basis.dim, scratch);
    return out;
}

std::vector<double> synthesize(const Basis& basis, std::span<const double> alpha) {
    if (alpha.size() != basis.dim)
        throw std::invalid_argument("transforms: synthesize input has wrong dimension");
    std::vector<double> out(alpha.begin(), alpha.end());
    std::vector<double> scratch;
    if (basis.is_2d())
        apply_2d(out.data(), basis.side, scratch,
                 [&](double* p, std::size_t n, std::vector<double>& s) {
                     synthesize_1d(basis.kind, p, n, s);
                 });
    else
        synthesize_1d(basis.kind, out.data(), basis.dim, scratch);
    return out;
}

double coherence(const Basis& basis) {
    const std::size_t n = basis.is_2d() ? basis.side : basis.dim;
    const double max1d = max_abs_entry_1d(basis.kind, n);
    if (basis.is_2d()) {
        // Kronecker square: max entry is the squared 1D max.
        return double(basis.dim > 0 ? std::sqrt(double(basis.dim)) : 0.0) * max1d * max1d;
    }
    return std::sqrt(double(n)) * max1d;
}

double c_statistic(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("transforms: c_statistic of empty vector");
    double s2 = 0.0, s4 = 0.0;
    for (double v : x) {
        const double v2 = v * v;
        s2 += v2;
        s4 += v2 * v2;
    }
    if (s2 == 0.0) throw std::invalid_argument("transforms: c_statistic of zero vector");
    return double(x.size()) * s4 / (s2 * s2);
}

double estimate_c_max(const Basis& basis, std::size_t sparsity, std::uint64_t trials,
                      std::uint64_t seed) {
    const std::size_t n = basis.dim;
    if (sparsity == 0 || sparsity > n)
        throw std::invalid_argument("transforms: sparsity must be in [1, dim]");
    if (trials == 0) throw std::invalid_argument("transforms: need at least one trial");

    // Fast path: for identity/1D-DCT, x is a K-term combination of rows we
    // can gather directly instead of running a dense synthesis per trial.
    const bool gather = !basis.is_2d() &&
                        (basis.kind == BasisKind::identity || basis.kind == BasisKind::dct);
    std::shared_ptr<const std::vector<double>> mat;
    if (gather && basis.kind == BasisKind::dct) mat = dct_matrix(n);

    std::vector<double> x(n), alpha, scratch;
    std::vector<std::uint32_t> pos(sparsity);
    std::vector<std::uint8_t> used(n);
    double best = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, t));
        std::fill(used.begin(), used.end(), 0);
        for (std::size_t i = 0; i < sparsity; ++i) {
            std::uint64_t p;
            do {
                p = rng.below(n);
            } while (used[p]);
            used[p] = 1;
            pos[i] = std::uint32_t(p);
        }
        if (gather) {
            std::fill(x.begin(), x.end(), 0.0);
            for (std::size_t i = 0; i < sparsity; ++i) {
                const double v = rng.gaussian();
                if (basis.kind == BasisKind::identity) {
                    x[pos[i]] = v;
                } else {
                    const double* row = mat->data() + std::size_t(pos[i]) * n;
                    for (std::size_t j = 0; j < n; ++j) x[j] += v * row[j];
                }
            }
        } else {
            alpha.assign(n, 0.0);
            for (std::size_t i = 0; i < sparsity; ++i) alpha[pos[i]] = rng.gaussian();
            x = synthesize(basis, alpha);
        }
        double s2 = 0.0, s4 = 0.0;
        for (double v : x) {
            const double v2 = v * v;
            s2 += v2;
            s4 += v2 * v2;
        }
        if (s2 > 0.0) best = std::max(best, double(n) * s4 / (s2 * s2));
    }
    return best;
}

} // namespace sots
