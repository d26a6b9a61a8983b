#include "sots/security_bounds.hpp"

#include "sots/errors.hpp"

#include <gmp.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sots {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kE = 2.71828182845904523536;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double require_beta_condition(const CpaParams& p) {
    const double k = double(p.key_bits);
    const double threshold = p.log2_power * kE * kLn2;
    if (k < threshold) {
        std::ostringstream msg;
        msg << "bound requires k >= L*e*ln2 = " << threshold << ", got k = " << k;
        throw bound_error(msg.str());
    }
    return k;
}

// ln(2 / (1 - (1-eps)^(1/m))) without cancellation for tiny eps or huge m
double log_two_over_complement_root(double eps, double m) {
    // (1-eps)^(1/m) = exp(log1p(-eps)/m); 1 - that = -expm1(log1p(-eps)/m)
    const double root = std::log1p(-eps) / m;
    const double denom = -std::expm1(root);
    return kLn2 - std::log(denom);
}

double q_threshold(double beta, const CpaParams& p) {
    const double coeff = 2.0 + 4.0 / (beta - 2.0);
    const double m = double(p.key_bits) * p.rho + 1.0;
    return 0.5 * coeff * coeff * log_two_over_complement_root(p.eps2, m);
}

} // namespace

IndistParams::IndistParams(std::size_t m, std::size_t q, double gamma_, double pnr, double cmax)
    : ciphertext_dim(m), row_weight(q), gamma(gamma_), pnr_max(pnr), c_max(cmax) {
    if (m == 0 || q == 0) throw std::invalid_argument("bounds: M and q must be positive");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("bounds: gamma must lie in (0, 1]");
    if (!(pnr > 0.0)) throw std::invalid_argument("bounds: PNR must be positive (or infinite)");
    if (!(cmax >= 1.0)) throw std::invalid_argument("bounds: c_max must be at least 1");
}

double IndistParams::gamma_e() const {
    if (std::isinf(pnr_max)) return gamma;
    return (1.0 + gamma * pnr_max) / (1.0 + pnr_max);
}

double IndistParams::c_constant() const {
    const double ge = gamma_e();
    const double atten = std::isinf(pnr_max) ? 1.0 : 1.0 / (1.0 + 1.0 / pnr_max);
    const double ratio = gamma / ge; // = 1 at infinite PNR
    return c_max * atten * atten * (ratio * ratio + 1.0);
}

CpaParams::CpaParams(std::size_t k, std::size_t q, double rho_, double l2, double e2,
                     double del, double e3, std::size_t n)
    : key_bits(k), row_weight(q), rho(rho_), log2_power(l2), eps2(e2), delta(del), eps3(e3),
      plaintext_dim(n) {
    if (k < 2 || q == 0) throw std::invalid_argument("bounds: k >= 2 and q >= 1 required");
    if (!(rho > 0.0) || rho > 1.0) throw std::invalid_argument("bounds: rho must lie in (0, 1]");
    if (!(l2 > 0.0)) throw std::invalid_argument("bounds: L must be positive");
    if (!(e2 > 0.0) || !(e2 < 1.0))
        throw std::invalid_argument("bounds: eps2 must lie in (0, 1)");
    if (del < 1.0 / double(k) || del > 1.0)
        throw std::invalid_argument("bounds: delta must lie in [1/k, 1]");
    if (!(e3 > 0.0) || !(e3 < 1.0))
        throw std::invalid_argument("bounds: eps3 must lie in (0, 1)");
}

std::size_t CpaParams::tau() const { return (key_bits + row_weight - 1) / row_weight; }

double CpaParams::beta() const {
    // k >= L e ln2 guarantees -L ln2/k lies inside [-1/e, 0)
    const double k = require_beta_condition(*this);
    return -(k / (log2_power * kLn2)) * lambert_w_neg1(-log2_power * kLn2 / k);
}

double lambert_w_neg1(double x) {
    constexpr double inv_e = 1.0 / kE;
    if (!(x >= -inv_e) || !(x < 0.0))
        throw std::invalid_argument("lambert_w_neg1: argument must lie in [-1/e, 0)");
    double w;
    const double p2 = 2.0 * (1.0 + kE * x);
    if (p2 <= 0.0) return -1.0; // branch point (p2 < 0 only by rounding)
    if (p2 < 1e-3) {
        // series around the branch point with the negative root
        const double p = -std::sqrt(p2);
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
    } else {
        // asymptotic guess for the lower branch
        const double l1 = std::log(-x);
        const double l2 = std::log(-l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        const double step = f / denom;
        w -= step;
        if (std::abs(step) <= 1e-15 * std::abs(w)) break;
    }
    return w;
}

double log2_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw std::invalid_argument("log2_binomial: k must not exceed n");
    mpz_t z;
    mpz_init(z);
    mpz_bin_uiui(z, n, k);
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, z);
    mpz_clear(z);
    return std::log2(mant) + double(exp);
}

namespace {

// log of the product term inside d_H^2, i.e. A with d_H^2 = 1 - e^A
double hellinger_log_term(const IndistParams& p) {
    const double ge = p.gamma_e();
    const double c = p.c_constant();
    const double frac = c / (8.0 * double(p.row_weight));
    if (frac > 1.0) {
        std::ostringstream msg;
        msg << "bound invalid: c/(8q) = " << frac << " > 1; q >= c_max/4 = "
            << p.c_max / 4.0 << " is always sufficient";
        throw bound_error(msg.str());
    }
    const double m = double(p.ciphertext_dim);
    const double ratio = (ge - 1.0) / (ge + 1.0);
    const double first = std::log(4.0 * ge / ((ge + 1.0) * (ge + 1.0)));
    const double second = std::log1p(-frac * ratio * ratio);
    return 0.25 * m * first + m * second;
}

double hellinger_log_term_limit(const IndistParams& p) {
    // row-weight factor at its q -> infinity value (the c/(8q) term vanishes)
    const double ge = p.gamma_e();
    const double m = double(p.ciphertext_dim);
    return 0.25 * m * std::log(4.0 * ge / ((ge + 1.0) * (ge + 1.0)));
}

} // namespace

double hellinger_sq(const IndistParams& p) { return -std::expm1(hellinger_log_term(p)); }

TvBounds tv_bounds(const IndistParams& p) {
    const double a = hellinger_log_term(p);
    TvBounds out;
    out.low = -std::expm1(a);
    // d_H sqrt(2 - d_H^2) = sqrt(1 - e^{2A})
    out.up = std::sqrt(-std::expm1(2.0 * a));
    return out;
}

double p_d_bound(const IndistParams& p) { return 0.5 + 0.5 * tv_bounds(p).up; }

double p_d_bound_limit(const IndistParams& p) {
    const double a = hellinger_log_term_limit(p);
    return 0.5 + 0.5 * std::sqrt(-std::expm1(2.0 * a));
}

double s_cpa_low(const CpaParams& p) {
    const double q = double(p.row_weight);
    const double tau = double(p.tau());
    const double t = std::sqrt(2.0 * q * log_two_over_complement_root(p.eps2, tau));
    if (t > q) {
        std::ostringstream msg;
        msg << "bound vacuous: t = " << t << " exceeds q = " << q
            << " (no candidates excluded)";
        throw bound_error(msg.str());
    }
    const auto idx = std::uint64_t(std::ceil((q - t) / 2.0));
    return tau * log2_binomial(p.row_weight, idx);
}

std::size_t q_cpa(const CpaParams& p) {
    return std::size_t(std::ceil(q_threshold(p.beta(), p)));
}

std::size_t q_cpa_up(const CpaParams& p) {
    require_beta_condition(p);
    return std::size_t(std::ceil(q_threshold(kE, p)));
}

double p_suc_up(const CpaParams& p) {
    const double beta = p.beta();
    const double q = double(p.row_weight);
    const double z = 0.5 * q * (1.0 - 2.0 / beta) * (1.0 - 2.0 / beta);
    const double term = 2.0 * std::exp(-z);
    if (term >= 1.0) return 1.0;
    const double tau = double(p.tau());
    return -std::expm1(tau * std::log1p(-term));
}

double p_key_up(const CpaParams& p) {
    const double floor = std::exp2(-double(p.key_bits));
    const double coeff = 1.0 - floor - p.delta + 1.0 / double(p.key_bits);
    const double bound = floor + coeff * p_suc_up(p);
    return std::min(1.0, std::max(0.0, bound));
}

RefreshBound t_ref_up(const CpaParams& p) {
    const double pkey = p_key_up(p);
    if (!(pkey > 0.0) || !(pkey < 1.0))
        throw bound_error("refresh bound needs P_key,up strictly inside (0, 1)");
    RefreshBound out;
    out.encryptions = std::floor(std::log1p(-p.eps3) / std::log1p(-pkey));
    if (p.plaintext_dim) {
        // draw per encryption: qM sign bits plus roughly 2 N log2 N shuffle bits
        const double n = double(p.plaintext_dim);
        const double m = p.rho * n;
        const double per_encryption = double(p.row_weight) * m + 2.0 * n * std::log2(n);
        out.consumed_log2 = std::log2(per_encryption) + std::log2(out.encryptions);
        out.period_ok = out.consumed_log2 < std::floor(double(p.key_bits) / 2.0);
    }
    return out;
}

SecurityReport build_security_report(const IndistParams& ip, const CpaParams& cp) {
    SecurityReport r;
    r.indist = ip;
    r.cpa = cp;
    try {
        r.d_h_sq = hellinger_sq(ip);
        const auto tv = tv_bounds(ip);
        r.d_tv_low = tv.low;
        r.d_tv_up = tv.up;
        r.p_d = p_d_bound(ip);
        r.indist_status = "ok";
    } catch (const bound_error& e) {
        r.d_h_sq = r.d_tv_low = r.d_tv_up = r.p_d = kNan;
        r.indist_status = e.what();
    }
    try {
        r.log2_s_cpa = s_cpa_low(cp);
        r.s_cpa_status = "ok";
    } catch (const bound_error& e) {
        r.log2_s_cpa = kNan;
        r.s_cpa_status = e.what();
    }
    try {
        r.q_cpa_value = q_cpa(cp);
        r.q_cpa_up_value = q_cpa_up(cp);
        r.p_suc = p_suc_up(cp);
        r.p_key = p_key_up(cp);
        const auto refresh = t_ref_up(cp);
        r.t_ref = refresh.encryptions;
        r.period_ok = refresh.period_ok;
        r.cpa_status = "ok";
    } catch (const bound_error& e) {
        r.q_cpa_value = r.q_cpa_up_value = 0;
        r.p_suc = r.p_key = r.t_ref = kNan;
        r.cpa_status = e.what();
    }
    return r;
}

std::string security_report_csv_header() {
    return "M,q,gamma,pnr_max,c_max,k,rho,L,eps2,delta,eps3,"
           "d_h_sq,d_tv_low,d_tv_up,p_d_bound,indist_status,"
           "log2_s_cpa_low,s_cpa_status,q_cpa,q_cpa_up,p_suc_up,p_key_up,t_ref_up,"
           "period_ok,cpa_status";
}

namespace {
std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}
} // namespace

std::string security_report_csv_row(const SecurityReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.indist.ciphertext_dim << ',' << r.indist.row_weight << ',' << r.indist.gamma
       << ',' << r.indist.pnr_max << ',' << r.indist.c_max << ',' << r.cpa.key_bits << ','
       << r.cpa.rho << ',' << r.cpa.log2_power << ',' << r.cpa.eps2 << ',' << r.cpa.delta
       << ',' << r.cpa.eps3 << ',' << r.d_h_sq << ',' << r.d_tv_low << ',' << r.d_tv_up
       << ',' << r.p_d << ',' << csv_quote(r.indist_status) << ',' << r.log2_s_cpa << ','
       << csv_quote(r.s_cpa_status) << ',' << r.q_cpa_value << ',' << r.q_cpa_up_value
       << ',' << r.p_suc << ',' << r.p_key << ',' << r.t_ref << ',';
    if (r.period_ok) os << (*r.period_ok ? "yes" : "no");
    else os << "unknown";
    os << ',' << csv_quote(r.cpa_status);
    return os.str();
}

} // namespace sots
