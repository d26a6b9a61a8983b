#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace sots {

// Parameter point for the distinguisher (indistinguishability) bounds.
struct IndistParams {
    std::size_t ciphertext_dim = 0; // M
    std::size_t row_weight = 0;     // q
    double gamma = 1.0;             // min/max plaintext energy ratio, in (0, 1]
    double pnr_max = std::numeric_limits<double>::infinity(); // in (0, +inf]
    double c_max = 1.0;             // worst-case concentration statistic, >= 1

    IndistParams() = default;
    IndistParams(std::size_t m, std::size_t q, double gamma_, double pnr, double cmax);

    double gamma_e() const; // effective ratio (1 + gamma*pnr)/(1 + pnr)
    double c_constant() const; // worst-case c = c_max/(1+1/pnr)^2 * ((gamma/gamma_e)^2 + 1)
};

// Parameter point for the chosen-plaintext security bounds.
struct CpaParams {
    std::size_t key_bits = 0;  // k
    std::size_t row_weight = 0; // q
    double rho = 0.0;           // M/N, in (0, 1]
    double log2_power = 0.0;    // L, adversary's log2 computing budget
    double eps2 = 0.0;          // keystream-recovery failure probability, in (0,1)
    double delta = 0.0;         // key-hypothesis rate, in [1/k, 1]
    double eps3 = 0.0;          // refresh failure probability, in (0,1)
    std::size_t plaintext_dim = 0; // optional N for the keystream-period check

    CpaParams() = default;
    CpaParams(std::size_t k, std::size_t q, double rho_, double l2, double e2, double del,
              double e3, std::size_t n = 0);

    std::size_t tau() const; // ceil(k/q)
    double beta() const;     // -(k/(L ln2)) W_-1(-L ln2 / k); needs k >= L e ln2
};

// Lower branch of the Lambert W function on [-1/e, 0); w e^w = x, w <= -1.
double lambert_w_neg1(double x);

// log2 of an exact big-integer binomial coefficient.
double log2_binomial(std::uint64_t n, std::uint64_t k);

// Squared Hellinger distance between the two worst-case ciphertext laws.
double hellinger_sq(const IndistParams& p);

struct TvBounds {
    double low = 0.0; // = d_H^2
    double up = 0.0;  // = d_H sqrt(2 - d_H^2)
};
TvBounds tv_bounds(const IndistParams& p);

// Distinguisher success bound 1/2 + d_TV,up/2.
double p_d_bound(const IndistParams& p);
// Reference bound with the row-weight factor at its q -> infinity value
// (dense-sensing baseline used for the convergence comparison).
double p_d_bound_limit(const IndistParams& p);

// log2 of the keystream-candidate count lower bound, tau * log2 C(q, ceil((q-t)/2)).
double s_cpa_low(const CpaParams& p);

// Minimum row weight making keystream recovery infeasible (and its beta -> e
// worst case). Both require k >= L e ln2.
std::size_t q_cpa(const CpaParams& p);
std::size_t q_cpa_up(const CpaParams& p);

// Single-encryption keystream recovery success bound.
double p_suc_up(const CpaParams& p);
// Key recovery success bound per encryption.
double p_key_up(const CpaParams& p);

struct RefreshBound {
    double encryptions = 0.0;           // floor of the Eq.-(11)-style quotient
    std::optional<bool> period_ok;      // keystream-period constraint, if N known
    double consumed_log2 = 0.0;         // log2 of estimated total keystream draw
};
RefreshBound t_ref_up(const CpaParams& p);

// One evaluation of every bound at a parameter point; quantities that are
// invalid at the point carry NaN and a reason instead of a number.
struct SecurityReport {
    IndistParams indist;
    CpaParams cpa;
    double d_h_sq = 0.0;
    double d_tv_low = 0.0;
    double d_tv_up = 0.0;
    double p_d = 0.0;
    std::string indist_status; // "ok" or the validity failure
    double log2_s_cpa = 0.0;
    std::string s_cpa_status;
    std::size_t q_cpa_value = 0;
    std::size_t q_cpa_up_value = 0;
    double p_suc = 0.0;
    double p_key = 0.0;
    double t_ref = 0.0;
    std::optional<bool> period_ok;
    std::string cpa_status;
};

SecurityReport build_security_report(const IndistParams& ip, const CpaParams& cp);

// CSV header and one row for a report (status columns mark invalid entries).
std::string security_report_csv_header();
std::string security_report_csv_row(const SecurityReport& r);

} // namespace sots
