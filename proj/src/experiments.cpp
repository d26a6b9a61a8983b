#include "sots/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "sots/errors.hpp"
#include "sots/rng.hpp"

namespace sots {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write " + path.string());
    out << header << '\n';
    return out;
}

Key random_key(Rng& rng, unsigned degree) {
    Key key;
    key.bytes.assign((degree + 7) / 8, 0);
    for (auto& b : key.bytes) b = std::uint8_t(rng.below(256));
    const unsigned rem = degree % 8;
    if (rem) key.bytes.back() &= std::uint8_t(0xffu << (8 - rem));
    if (std::all_of(key.bytes.begin(), key.bytes.end(), [](auto b) { return b == 0; }))
        key.bytes[0] = 0x80;
    return key;
}

// K distinct uniform coefficient positions with unit-scale Gaussian values
std::vector<double> sparse_plaintext(Rng& rng, const Basis& basis, std::size_t k) {
    std::vector<double> alpha(basis.dim, 0.0);
    std::size_t placed = 0;
    while (placed < k) {
        const auto p = rng.below(basis.dim);
        if (alpha[p] == 0.0) {
            double v = rng.gaussian();
            if (v == 0.0) v = 1.0;
            alpha[p] = v;
            ++placed;
        }
    }
    return synthesize(basis, alpha);
}

double rel_sq_error(std::span<const double> x, std::span<const double> xt) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - xt[i]) * (x[i] - xt[i]);
        den += x[i] * x[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

// One recovery trial; all randomness comes from the caller's rng.
bool recovery_trial(Rng& rng, const SystemParams& params, const Basis& basis,
                    std::size_t sparsity, double threshold) {
    const auto x = sparse_plaintext(rng, basis, sparsity);
    KeystreamSource source(LfsrSpec::primitive(params.key_bits),
                           random_key(rng, params.key_bits));
    const auto enc = encrypt(source, params, x);
    RecoverySettings settings;
    settings.sparsity = sparsity;
    settings.basis = basis;
    const auto xt = decrypt(enc.key, params, enc.ciphertext, settings);
    if (sparsity == 0) {
        double num = 0.0;
        for (double v : xt) num += v * v;
        return num <= 1e-24;
    }
    return rel_sq_error(x, xt) < threshold;
}

// pool-adjacent-violators fit, nondecreasing along the input order
std::vector<double> isotonic_nondecreasing(const std::vector<double>& v) {
    std::vector<double> mean, weight;
    std::vector<std::size_t> count;
    for (double x : v) {
        mean.push_back(x);
        weight.push_back(1.0);
        count.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            const double w = weight.back() + weight[weight.size() - 2];
            const double m = (mean.back() * weight.back() +
                              mean[mean.size() - 2] * weight[weight.size() - 2]) / w;
            const std::size_t c = count.back() + count[count.size() - 2];
            mean.pop_back(); weight.pop_back(); count.pop_back();
            mean.back() = m; weight.back() = w; count.back() = c;
        }
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t b = 0; b < mean.size(); ++b)
        out.insert(out.end(), count[b], mean[b]);
    return out;
}

bool power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// exact decode of the square dense system by LU factorization
std::vector<double> solve_dense_square(const SensingKey& key, const SystemParams& params,
                                       const std::vector<double>& y) {
    const std::size_t n = params.plaintext_dim;
    const double scale = params.scale();
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto signs = key.row_signs(i);
        for (std::size_t j = 0; j < n; ++j)
            a(Eigen::Index(i), Eigen::Index(j)) = scale * double(signs[key.perm[j]]);
    }
    Eigen::Map<const Eigen::VectorXd> b(y.data(), Eigen::Index(n));
    Eigen::VectorXd sol = a.partialPivLu().solve(b);
    return {sol.data(), sol.data() + n};
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::string trimmed(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

SweepRange parse_sweep(const std::string& text) {
    SweepRange range;
    std::stringstream ss(text);
    std::string item;
    std::vector<double> parts;
    while (std::getline(ss, item, ':'))
        if (!item.empty()) parts.push_back(std::stod(item));
    if (parts.size() != 3)
        throw std::invalid_argument("sweep ranges use the form lo:hi:step");
    range.lo = parts[0];
    range.hi = parts[1];
    range.step = parts[2];
    return range;
}

} // namespace

std::vector<double> SweepRange::values() const {
    if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
    std::vector<double> out;
    if (hi < lo) return out;
    const auto count = std::size_t(std::floor((hi - lo) / step + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + double(i) * step);
    return out;
}

void ExperimentConfig::validate() const {
    if (!(grid.rho_step > 0.0) || !(grid.kappa_step > 0.0))
        throw std::invalid_argument("grid steps must be positive");
    if (!(success_threshold > 0.0 && success_threshold < 1.0))
        throw std::invalid_argument("success threshold must lie in (0, 1)");
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    for (double g : gammas)
        if (!(g > 0.0 && g <= 1.0))
            throw std::invalid_argument("energy ratios must lie in (0, 1]");
    if (!(pnr > 0.0)) throw std::invalid_argument("plaintext-to-noise ratio must be positive");
    if (out_dir.empty()) throw std::invalid_argument("output directory must be set");
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config " + path.string());
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trimmed(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        " is not key=value");
        const std::string key = trimmed(line.substr(0, eq));
        const std::string value = trimmed(line.substr(eq + 1));

        if (key == "plaintext_dim") cfg.plaintext_dim = std::stoull(value);
        else if (key == "ciphertext_dim") cfg.ciphertext_dim = std::stoull(value);
        else if (key == "row_weight") cfg.row_weight = std::stoull(value);
        else if (key == "key_bits") cfg.key_bits = unsigned(std::stoul(value));
        else if (key == "noise_sigma") cfg.noise_sigma = std::stod(value);
        else if (key == "basis") cfg.basis = basis_kind_from_name(value);
        else if (key == "trials") cfg.trials = std::stoull(value);
        else if (key == "success_threshold") cfg.success_threshold = std::stod(value);
        else if (key == "recovery_sparsity") cfg.recovery_sparsity = std::stoull(value);
        else if (key == "gammas") cfg.gammas = parse_double_list(value);
        else if (key == "pnr") cfg.pnr = value == "inf"
                                             ? std::numeric_limits<double>::infinity()
                                             : std::stod(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "rho_min") cfg.grid.rho_min = std::stod(value);
        else if (key == "rho_max") cfg.grid.rho_max = std::stod(value);
        else if (key == "rho_step") cfg.grid.rho_step = std::stod(value);
        else if (key == "kappa_min") cfg.grid.kappa_min = std::stod(value);
        else if (key == "kappa_max") cfg.grid.kappa_max = std::stod(value);
        else if (key == "kappa_step") cfg.grid.kappa_step = std::stod(value);
        else if (key == "gamma_sweep") cfg.gamma_sweep = parse_sweep(value);
        else if (key == "q_sweep") cfg.q_sweep = parse_sweep(value);
        else if (key == "eps2_log10_sweep") cfg.eps2_log10_sweep = parse_sweep(value);
        else if (key == "budget_grid") cfg.budget_grid = parse_double_list(value);
        else throw std::invalid_argument("unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

PhaseResult run_phase_transition(const ExperimentConfig& config) {
    config.validate();
    if (config.noise_sigma != 0.0)
        throw std::invalid_argument("phase transition sweeps run in noiseless mode");

    const std::size_t n = config.plaintext_dim;
    const Basis basis = Basis::one_d(config.basis, n);

    SweepRange rho_range{config.grid.rho_min, config.grid.rho_max, config.grid.rho_step};
    SweepRange kappa_range{config.grid.kappa_min, config.grid.kappa_max,
                           config.grid.kappa_step};
    const auto rhos = rho_range.values();
    const auto kappas = kappa_range.values();

    std::filesystem::create_directories(config.out_dir);
    PhaseResult result;
    result.csv_path = config.out_dir / "phase_transition.csv";
    auto csv = open_csv(result.csv_path, "rho,kappa,success_rate");

    std::size_t grid_index = 0;
    for (double rho : rhos) {
        const auto m = std::size_t(std::llround(rho * double(n)));
        for (double kappa : kappas) {
            ++grid_index;
            PhasePoint pt;
            pt.rho = rho;
            pt.kappa = kappa;
            pt.ciphertext_dim = m;
            pt.sparsity = std::size_t(std::llround(kappa * double(m)));

            bool feasible = pt.sparsity <= m;
            if (feasible) {
                try {
                    const SystemParams params(n, m, config.row_weight, config.key_bits, 0.0);
                    std::size_t hits = 0;
                    for (std::size_t t = 0; t < config.trials; ++t) {
                        Rng rng(derive_seed(config.seed, grid_index, t));
                        if (recovery_trial(rng, params, basis, pt.sparsity,
                                           config.success_threshold))
                            ++hits;
                    }
                    pt.success_rate = double(hits) / double(config.trials);
                } catch (const std::invalid_argument&) {
                    feasible = false; // dimensions unrealizable at this rho
                }
            }
            pt.skipped = !feasible;
            if (pt.skipped)
                csv << fmt(rho) << ',' << fmt(kappa) << ",skipped\n";
            else
                csv << fmt(rho) << ',' << fmt(kappa) << ',' << fmt(pt.success_rate) << '\n';
            result.points.push_back(pt);
        }
    }
    return result;
}

FrontierScan estimate_recovery_frontier(const ExperimentConfig& config,
                                        std::size_t ciphertext_dim, double level) {
    config.validate();
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("frontier level must lie in (0, 1)");
    const std::size_t n = config.plaintext_dim;
    const SystemParams params(n, ciphertext_dim, config.row_weight, config.key_bits, 0.0);
    const Basis basis = Basis::one_d(config.basis, n);

    FrontierScan scan;
    scan.ciphertext_dim = ciphertext_dim;

    // Descend from well above any plausible frontier; once several
    // consecutive grid points pass the level the frontier is bracketed.
    int consecutive = 0;
    for (int centi = 48; centi >= 1; --centi) {
        const double kappa = double(centi) / 100.0;
        const auto sparsity = std::size_t(std::llround(kappa * double(ciphertext_dim)));
        if (sparsity < 1 || sparsity > ciphertext_dim) continue;

        std::size_t hits = 0;
        for (std::size_t t = 0; t < config.trials; ++t) {
            // Seeds fold in only (M, K, trial): the sparse and dense
            // ensembles at the same point see identical plaintexts and keys.
            Rng rng(derive_seed(config.seed, 0xf7a5e,
                                (std::uint64_t(ciphertext_dim) << 20) | sparsity, t));
            if (recovery_trial(rng, params, basis, sparsity, config.success_threshold))
                ++hits;
        }
        const double rate = double(hits) / double(config.trials);
        scan.kappas.push_back(kappa);
        scan.raw.push_back(rate);
        if (rate >= level) {
            if (++consecutive >= 4) break;
        } else {
            consecutive = 0;
        }
    }

    // Success is antitone in K, i.e. nondecreasing along this descending scan.
    scan.smooth = isotonic_nondecreasing(scan.raw);
    scan.frontier = 0.0;
    for (std::size_t i = 0; i < scan.kappas.size(); ++i)
        if (scan.smooth[i] >= level) {
            scan.frontier = scan.kappas[i];
            break;
        }
    return scan;
}

ImageReport run_image_pipeline(const ExperimentConfig& config,
                               const std::filesystem::path& image_path,
                               KeystreamSource& source) {
    config.validate();
    const PgmImage image = read_pgm(image_path);
    if (image.rows != image.cols || !power_of_two(image.rows))
        throw std::invalid_argument("image must be square with a power-of-two side");
    const std::size_t side = image.rows;
    const std::size_t n = side * side;

    const SystemParams params(n, config.ciphertext_dim, config.row_weight,
                              source.spec().degree, config.noise_sigma);
    const Basis basis = Basis::two_d(config.basis, side);

    const auto x = image.to_signal();
    const auto enc = encrypt(source, params, x, derive_seed(config.seed, 0x1a3e));

    std::vector<double> xt;
    if (params.row_weight == n && params.ciphertext_dim == n && config.noise_sigma == 0.0) {
        xt = solve_dense_square(enc.key, params, enc.ciphertext.values);
    } else {
        RecoverySettings settings;
        settings.sparsity = config.recovery_sparsity; // 0 keeps the M/4 default
        settings.basis = basis;
        xt = decrypt(enc.key, params, enc.ciphertext, settings);
    }

    ImageReport report;
    report.side = side;
    report.relative_error = rel_sq_error(x, xt);

    const PgmImage decoded = PgmImage::from_signal(xt, side, side);
    std::vector<double> original_px(n), decoded_px(n);
    for (std::size_t i = 0; i < n; ++i) {
        original_px[i] = double(image.pixels[i]);
        decoded_px[i] = double(decoded.pixels[i]);
    }
    report.psnr = psnr(original_px, decoded_px, 255.0);

    std::filesystem::create_directories(config.out_dir);
    const std::string stem = image_path.stem().string();
    report.ciphertext_path = config.out_dir / (stem + ".sots");
    write_ciphertext(report.ciphertext_path, enc.ciphertext);
    report.decrypted_path = config.out_dir / (stem + "_decrypted.pgm");
    write_pgm(report.decrypted_path, decoded);

    // display-only rescaling of the measurement vector
    const auto [lo_it, hi_it] =
        std::minmax_element(enc.ciphertext.values.begin(), enc.ciphertext.values.end());
    const double lo = *lo_it, span = *hi_it - *lo_it;
    std::vector<double> view(params.ciphertext_dim, 0.0);
    for (std::size_t i = 0; i < view.size(); ++i)
        view[i] = span > 0.0
                      ? (enc.ciphertext.values[i] - lo) / span * 255.0
                      : 0.0;
    const std::size_t view_rows =
        params.ciphertext_dim % side == 0 ? params.ciphertext_dim / side : 1;
    const std::size_t view_cols = params.ciphertext_dim / view_rows;
    report.encrypted_view_path = config.out_dir / (stem + "_encrypted.pgm");
    write_pgm(report.encrypted_view_path, PgmImage::from_signal(view, view_rows, view_cols));

    report.csv_path = config.out_dir / "image_psnr.csv";
    auto csv = open_csv(report.csv_path, "image,N,q,rho,basis,psnr_db");
    csv << image_path.filename().string() << ',' << n << ',' << params.row_weight << ','
        << fmt(double(params.ciphertext_dim) / double(n)) << ','
        << basis_name(config.basis) << ','
        << (report.psnr.exact ? std::string("exact") : fmt(report.psnr.db)) << '\n';
    return report;
}

DetectorOutcome energy_detector_experiment(std::span<const double> first,
                                           std::span<const double> second,
                                           const SystemParams& params, double pnr,
                                           std::size_t trials, std::uint64_t seed) {
    if (first.size() != params.plaintext_dim || second.size() != params.plaintext_dim)
        throw std::invalid_argument("challenge plaintexts must match the plaintext dimension");
    if (trials == 0) throw std::invalid_argument("need at least one round");

    auto energy = [](std::span<const double> v) {
        double e = 0.0;
        for (double x : v) e += x * x;
        return e;
    };
    const double e_first = energy(first), e_second = energy(second);
    if (e_first == 0.0 || e_second == 0.0)
        throw std::invalid_argument("challenge plaintexts must have nonzero energy");

    // canonical order: by energy, lexicographic tie-break, so that the two
    // argument orders run the identical experiment
    bool first_is_high = e_first > e_second;
    if (e_first == e_second)
        first_is_high = !std::lexicographical_compare(first.begin(), first.end(),
                                                      second.begin(), second.end());
    const auto hi = first_is_high ? first : second;
    const auto lo = first_is_high ? second : first;
    const double e_hi = energy(hi), e_lo = energy(lo);

    const double sigma = std::isinf(pnr)
                             ? 0.0
                             : noise_sigma_for_pnr(hi, params.ciphertext_dim, pnr);
    const SystemParams round_params(params.plaintext_dim, params.ciphertext_dim,
                                    params.row_weight, params.key_bits, sigma);
    const double midpoint = 0.5 * (e_hi + e_lo) +
                            double(params.ciphertext_dim) * sigma * sigma;

    const IndistParams bound_params(params.ciphertext_dim, params.row_weight, e_lo / e_hi,
                                    pnr, std::max(c_statistic(hi), c_statistic(lo)));
    const double bound = p_d_bound(bound_params);

    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, 0xd7ec7, t));
        const bool pick_high = rng.next() & 1;
        KeystreamSource source(LfsrSpec::primitive(params.key_bits),
                               random_key(rng, params.key_bits));
        const auto enc = encrypt(source, round_params, pick_high ? hi : lo,
                                 derive_seed(seed, 0x9015e, t));
        double observed = 0.0;
        for (double v : enc.ciphertext.values) observed += v * v;
        const bool guess_high = observed > midpoint;
        if (guess_high == pick_high) ++hits;
    }

    DetectorOutcome out;
    out.empirical = double(hits) / double(trials);
    out.bound = bound;
    out.std_error = std::sqrt(out.empirical * (1.0 - out.empirical) / double(trials));
    if (out.empirical > out.bound + 3.0 * out.std_error) {
        std::ostringstream msg;
        msg << "detector success " << out.empirical << " beats the analytic ceiling "
            << out.bound << " by more than three standard errors";
        throw bound_error(msg.str());
    }
    return out;
}

IndistResult run_indistinguishability(const ExperimentConfig& config) {
    config.validate();
    const std::size_t n = config.plaintext_dim;
    const SystemParams params(n, config.ciphertext_dim, config.row_weight,
                              config.key_bits, 0.0);

    std::filesystem::create_directories(config.out_dir);
    IndistResult result;
    result.csv_path = config.out_dir / "indistinguishability.csv";
    auto csv = open_csv(result.csv_path, "gamma,q,empirical_pd,bound_pd");

    for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
        const double gamma = config.gammas[gi];
        const std::vector<double> high(n, 1.0);
        const std::vector<double> low(n, std::sqrt(gamma));
        const auto outcome =
            energy_detector_experiment(high, low, params, config.pnr, config.trials,
                                       derive_seed(config.seed, 0x1d15, gi));
        result.points.push_back({gamma, params.row_weight, outcome.empirical,
                                 outcome.bound, outcome.std_error});
        csv << fmt(gamma) << ',' << params.row_weight << ',' << fmt(outcome.empirical)
            << ',' << fmt(outcome.bound) << '\n';
    }
    return result;
}

std::vector<std::filesystem::path> emit_bound_tables(const ExperimentConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> written;

    // reference parameter point shared by every emitted table
    const auto cpa_at = [&](std::size_t q, double budget) {
        CpaParams cp;
        cp.key_bits = 256;
        cp.row_weight = q;
        cp.rho = 0.5;
        cp.log2_power = budget;
        cp.eps2 = 1e-5;
        cp.delta = 0.5;
        cp.eps3 = 1e-5;
        cp.plaintext_dim = config.plaintext_dim;
        return cp;
    };

    { // detector bound over gamma, several row weights plus the dense limit
        const auto path = config.out_dir / "detector_bound.csv";
        auto csv = open_csv(path, "gamma,variant,p_d");
        const double inf = std::numeric_limits<double>::infinity();
        for (double gamma : config.gamma_sweep.values()) {
            for (std::size_t q : {std::size_t(8), std::size_t(16), std::size_t(48)}) {
                try {
                    const IndistParams ip(256, q, gamma, inf, 4.0);
                    csv << fmt(gamma) << ",q=" << q << ',' << fmt(p_d_bound(ip)) << '\n';
                } catch (const std::exception&) {
                    csv << fmt(gamma) << ",q=" << q << ",invalid\n";
                }
            }
            try {
                const IndistParams ip(256, 48, gamma, inf, 4.0); // q unused by the limit
                csv << fmt(gamma) << ",limit," << fmt(p_d_bound_limit(ip)) << '\n';
            } catch (const std::exception&) {
                csv << fmt(gamma) << ",limit,invalid\n";
            }
        }
        written.push_back(path);
    }

    { // stage-1 candidate space over q
        const auto path = config.out_dir / "candidate_space.csv";
        auto csv = open_csv(path, "q,tau,log2_s_cpa_low");
        for (double qd : config.q_sweep.values()) {
            const auto q = std::size_t(std::llround(qd));
            if (q == 0) continue;
            const auto cp = cpa_at(q, 128.0);
            csv << q << ',' << cp.tau() << ',';
            try {
                csv << fmt(s_cpa_low(cp)) << '\n';
            } catch (const bound_error&) {
                csv << "invalid\n";
            }
        }
        written.push_back(path);
    }

    { // row-weight thresholds over eps2 for each adversary budget
        const auto path = config.out_dir / "keystream_threshold.csv";
        auto csv = open_csv(path, "eps2,budget,q_cpa,q_cpa_up");
        for (double l : config.eps2_log10_sweep.values()) {
            const double eps2 = std::pow(10.0, l);
            for (double budget : config.budget_grid) {
                auto cp = cpa_at(16, budget);
                cp.eps2 = eps2;
                csv << fmt(eps2) << ',' << fmt(budget) << ',';
                try {
                    csv << q_cpa(cp) << ',' << q_cpa_up(cp) << '\n';
                } catch (const bound_error&) {
                    csv << "invalid,invalid\n";
                }
            }
        }
        written.push_back(path);
    }

    { // success and key-recovery ceilings over q
        const auto path = config.out_dir / "success_bound.csv";
        auto csv = open_csv(path, "q,p_suc_up,p_key_up");
        for (double qd : config.q_sweep.values()) {
            const auto q = std::size_t(std::llround(qd));
            if (q == 0) continue;
            const auto cp = cpa_at(q, 128.0);
            try {
                csv << q << ',' << fmt(p_suc_up(cp)) << ',' << fmt(p_key_up(cp)) << '\n';
            } catch (const bound_error&) {
                csv << q << ",invalid,invalid\n";
            }
        }
        written.push_back(path);
    }

    { // refresh horizon over q
        const auto path = config.out_dir / "refresh_bound.csv";
        auto csv = open_csv(path, "q,t_ref_up,period_ok");
        for (double qd : config.q_sweep.values()) {
            const auto q = std::size_t(std::llround(qd));
            if (q == 0) continue;
            const auto cp = cpa_at(q, 128.0);
            try {
                const auto refresh = t_ref_up(cp);
                csv << q << ',' << fmt(refresh.encryptions) << ',';
                if (refresh.period_ok.has_value())
                    csv << (*refresh.period_ok ? "true" : "false") << '\n';
                else
                    csv << "unchecked\n";
            } catch (const bound_error&) {
                csv << q << ",invalid,invalid\n";
            }
        }
        written.push_back(path);
    }

    return written;
}

} // namespace sots
