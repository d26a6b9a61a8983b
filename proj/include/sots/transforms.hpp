#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sots {

enum class BasisKind { identity, dct, wht, haar, d4 };

BasisKind basis_kind_from_name(std::string_view name); // "dct", "wht", ...
const char* basis_name(BasisKind kind);

// Orthonormal sparsifying basis descriptor. 1D acts on length-dim vectors;
// 2D is the Kronecker square acting on column-stacked side x side images.
struct Basis {
    BasisKind kind = BasisKind::identity;
    std::size_t dim = 0;  // N
    std::size_t side = 0; // n for 2D (dim = n*n), 0 for 1D

    bool is_2d() const { return side != 0; }

    static Basis one_d(BasisKind kind, std::size_t dim);
    static Basis two_d(BasisKind kind, std::size_t side);
};

// alpha = Psi * x
std::vector<double> analyze(const Basis& basis, std::span<const double> x);
// x = Psi^T * alpha
std::vector<double> synthesize(const Basis& basis, std::span<const double> alpha);

// mu = sqrt(N) * max |psi_ij|, by entry scan; the 2D value is the square of
// the 1D value (Kronecker structure, checked against the scan in tests).
double coherence(const Basis& basis);

// c_h = N * sum((x_j/||x||)^4), in [1, N]
double c_statistic(std::span<const double> x);

// Max of c_statistic over `trials` plaintexts x = Psi^T alpha, where alpha
// has `sparsity` Gaussian nonzeros at distinct uniform positions. Trial
// streams are derived from the seed, so the result is order-independent.
double estimate_c_max(const Basis& basis, std::size_t sparsity,
                      std::uint64_t trials, std::uint64_t seed);

} // namespace sots
