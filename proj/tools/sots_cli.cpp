// Command-line front end: key management, file/image encryption, attack
// simulations, bound evaluation, and the reproduction experiment harnesses.
//
// Exit codes: 0 success, 2 argument error, 3 bound-invalid, 4
// inconsistent-ciphertext.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sots/attacks.hpp"
#include "sots/errors.hpp"
#include "sots/experiments.hpp"
#include "sots/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sots;

namespace {

Key key_from_rng(Rng& rng, unsigned degree) {
    Key key;
    key.bytes.assign((degree + 7) / 8, 0);
    for (auto& b : key.bytes) b = std::uint8_t(rng.below(256));
    const unsigned rem = degree % 8;
    if (rem) key.bytes.back() &= std::uint8_t(0xffu << (8 - rem));
    bool zero = true;
    for (auto b : key.bytes) zero = zero && b == 0;
    if (zero) key.bytes[0] = 0x80;
    return key;
}

// Plaintext input: binary PGM (P5) or plain text, one value per line.
struct LoadedSignal {
    std::vector<double> values;
    std::size_t side = 0; // nonzero when the source was a square image
};

LoadedSignal load_signal(const fs::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::invalid_argument("cannot read input " + path.string());
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    LoadedSignal out;
    if (magic[0] == 'P' && magic[1] == '5') {
        const PgmImage img = read_pgm(path);
        out.values = img.to_signal();
        if (img.rows == img.cols) out.side = img.rows;
        return out;
    }
    std::ifstream in(path);
    double v = 0.0;
    while (in >> v) out.values.push_back(v);
    if (out.values.empty())
        throw std::invalid_argument("input " + path.string() +
                                    " holds no readable values");
    return out;
}

void write_signal(const fs::path& path, const std::vector<double>& x) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write " + path.string());
    out << std::setprecision(17);
    for (double v : x) out << v << '\n';
}

std::size_t square_side(std::size_t n) {
    const auto side = std::size_t(std::llround(std::sqrt(double(n))));
    if (side * side != n)
        throw std::invalid_argument("plaintext dimension is not a perfect square");
    return side;
}

// Count the +1 entries on the first tau support rows of a sensing key.
bool class1_matches_key(const std::vector<RowCount>& counts, const SensingKey& key,
                        const SystemParams& params) {
    const std::size_t tau = params.rows_covering_key();
    if (counts.size() != tau) return false;
    for (std::size_t i = 0; i < tau; ++i) {
        std::size_t plus = 0;
        for (auto s : key.row_signs(i))
            if (s > 0) ++plus;
        if (counts[i].plus_count != plus) return false;
    }
    return true;
}

bool class2_matches_key(const ExtractedMatrix& extracted, const SensingKey& key,
                        const SystemParams& params) {
    if (extracted.rows.size() != params.ciphertext_dim) return false;
    const auto inv = key.inverse_perm();
    const std::size_t eta = params.block_count();
    for (std::size_t i = 0; i < params.ciphertext_dim; ++i) {
        std::vector<SignedEntry> truth;
        const auto signs = key.row_signs(i);
        const std::size_t base = (i % eta) * params.row_weight;
        for (std::size_t l = 0; l < params.row_weight; ++l)
            truth.push_back({inv[base + l] + 1, int(signs[l])});
        std::sort(truth.begin(), truth.end(),
                  [](const SignedEntry& a, const SignedEntry& b) {
                      return a.position < b.position;
                  });
        if (truth != extracted.rows[i]) return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse one-time sensing toolkit: encryption, attacks, bounds, "
                 "and reproduction experiments"};
    app.require_subcommand(1);

    // global configuration and overrides (valid before or after the subcommand)
    std::string config_path;
    app.add_option("--config", config_path, "key=value experiment configuration file")
        ->check(CLI::ExistingFile);
    std::uint64_t seed_override = 0;
    auto* seed_opt = app.add_option("--seed", seed_override, "base seed override");
    std::string out_override;
    auto* out_opt = app.add_option("--out", out_override,
                                   "output path (key file for keygen, ciphertext for "
                                   "encrypt, signal for decrypt, directory otherwise)");
    std::size_t n_override = 0;
    auto* n_opt = app.add_option("-N,--plaintext-dim", n_override, "plaintext dimension");
    std::size_t m_override = 0;
    auto* m_opt =
        app.add_option("-M,--ciphertext-dim", m_override, "measurement count");
    std::size_t q_override = 0;
    auto* q_opt = app.add_option("-q,--row-weight", q_override, "nonzeros per row");
    unsigned k_override = 0;
    auto* k_opt = app.add_option("-k,--key-bits", k_override, "key length in bits");
    double sigma_override = 0.0;
    auto* sigma_opt =
        app.add_option("--noise-sigma", sigma_override, "measurement noise sigma");
    std::string basis_override;
    auto* basis_opt = app.add_option("--basis", basis_override,
                                     "sparsifying basis: identity|dct|wht|haar|d4");
    std::size_t trials_override = 0;
    auto* trials_opt = app.add_option("--trials", trials_override, "trial count");

    // keygen
    auto* keygen = app.add_subcommand("keygen", "sample a fresh key file");
    unsigned keygen_degree = 128;
    keygen->add_option("--degree", keygen_degree, "register length (key bits)");
    keygen->fallthrough();

    // encrypt
    auto* encrypt_cmd = app.add_subcommand("encrypt", "encrypt a signal or PGM image");
    std::string enc_key_path;
    encrypt_cmd->add_option("--key", enc_key_path, "key file (state advances)")
        ->required()
        ->check(CLI::ExistingFile);
    std::string enc_in;
    encrypt_cmd->add_option("--in", enc_in, "plaintext: PGM (P5) or text, one value/line")
        ->required()
        ->check(CLI::ExistingFile);
    bool enc_keep_state = false;
    encrypt_cmd->add_flag("--keep-state", enc_keep_state,
                          "do not advance the key file state");
    std::uint64_t enc_noise_seed = 0;
    auto* enc_noise_seed_opt = encrypt_cmd->add_option(
        "--noise-seed", enc_noise_seed, "deterministic noise seed (default: OS entropy)");
    encrypt_cmd->fallthrough();

    // decrypt
    auto* decrypt_cmd = app.add_subcommand("decrypt", "decrypt a ciphertext file");
    std::string dec_key_path;
    decrypt_cmd->add_option("--key", dec_key_path, "key file (state advances)")
        ->required()
        ->check(CLI::ExistingFile);
    std::string dec_in;
    decrypt_cmd->add_option("--in", dec_in, "ciphertext file")
        ->required()
        ->check(CLI::ExistingFile);
    bool dec_pgm = false;
    decrypt_cmd->add_flag("--pgm", dec_pgm, "write the recovered signal as a square PGM");
    std::size_t dec_sparsity = 0;
    decrypt_cmd->add_option("--sparsity", dec_sparsity,
                            "pursuit iteration budget (0 = M/4)");
    bool dec_keep_state = false;
    decrypt_cmd->add_flag("--keep-state", dec_keep_state,
                          "do not advance the key file state");
    decrypt_cmd->fallthrough();

    // cmax
    auto* cmax_cmd =
        app.add_subcommand("cmax", "estimate the worst-case concentration statistic");
    std::size_t cmax_sparsity = 0;
    cmax_cmd->add_option("--sparsity", cmax_sparsity,
                         "coefficient sparsity (default plaintext_dim/16)");
    cmax_cmd->fallthrough();

    // bounds
    auto* bounds_cmd =
        app.add_subcommand("bounds", "evaluate the security bounds at one point");
    bool bounds_sweep = false;
    bounds_cmd->add_flag("--sweep", bounds_sweep,
                         "emit the full bound tables for the configured sweeps");
    double b_gamma = 0.5, b_pnr = std::numeric_limits<double>::infinity();
    double b_cmax = 4.0, b_rho = 0.5, b_budget = 128.0;
    double b_eps2 = 1e-5, b_delta = 0.5, b_eps3 = 1e-5;
    bounds_cmd->add_option("--gamma", b_gamma, "plaintext energy ratio in (0,1]");
    bounds_cmd->add_option("--pnr", b_pnr, "max plaintext-to-noise ratio");
    bounds_cmd->add_option("--c-max", b_cmax, "worst-case concentration statistic");
    bounds_cmd->add_option("--rho", b_rho, "compression ratio M/N");
    bounds_cmd->add_option("--budget", b_budget, "adversary log2 computing budget L");
    bounds_cmd->add_option("--eps2", b_eps2, "keystream-recovery failure probability");
    bounds_cmd->add_option("--delta", b_delta, "key-hypothesis rate");
    bounds_cmd->add_option("--eps3", b_eps3, "refresh failure probability");
    bounds_cmd->fallthrough();

    // attack
    auto* attack_cmd =
        app.add_subcommand("attack", "run chosen-plaintext attack simulations");
    std::string attack_mode;
    attack_cmd->add_option("--mode", attack_mode, "class1 | class2 | trial")
        ->required()
        ->check(CLI::IsMember({"class1", "class2", "trial"}));
    unsigned attack_budget = 30;
    attack_cmd->add_option("--budget", attack_budget,
                           "log2 enumeration budget for trial mode");
    attack_cmd->fallthrough();

    // experiment harnesses
    auto* phase_cmd =
        app.add_subcommand("phase", "recovery phase-transition sweep (CSV)");
    phase_cmd->fallthrough();
    auto* image_cmd = app.add_subcommand("image", "image encrypt/decrypt pipeline");
    std::string image_in;
    image_cmd->add_option("--in", image_in, "square power-of-two PGM image")
        ->required()
        ->check(CLI::ExistingFile);
    std::string image_key_path;
    image_cmd->add_option("--key", image_key_path,
                          "key file (default: key derived from --seed)")
        ->check(CLI::ExistingFile);
    bool image_keep_state = false;
    image_cmd->add_flag("--keep-state", image_keep_state,
                        "do not advance the key file state");
    image_cmd->fallthrough();
    auto* indist_cmd = app.add_subcommand(
        "indist", "indistinguishability Monte-Carlo against the analytic bound");
    indist_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = ExperimentConfig::from_file(config_path);
        if (seed_opt->count()) cfg.seed = seed_override;
        if (n_opt->count()) cfg.plaintext_dim = n_override;
        if (m_opt->count()) cfg.ciphertext_dim = m_override;
        if (q_opt->count()) cfg.row_weight = q_override;
        if (k_opt->count()) cfg.key_bits = k_override;
        if (sigma_opt->count()) cfg.noise_sigma = sigma_override;
        if (basis_opt->count()) cfg.basis = basis_kind_from_name(basis_override);
        if (trials_opt->count()) cfg.trials = trials_override;
        const bool out_is_set = out_opt->count() > 0;
        if (out_is_set) cfg.out_dir = out_override;

        if (keygen->parsed()) {
            const fs::path path = out_is_set ? fs::path(out_override) : fs::path("key.txt");
            const auto spec = LfsrSpec::primitive(keygen_degree);
            Key key;
            if (seed_opt->count()) {
                Rng rng(derive_seed(cfg.seed, 0x6e9));
                key = key_from_rng(rng, keygen_degree);
            } else {
                key = sample_key(keygen_degree);
            }
            write_key_file(path.string(), spec, key);
            std::cout << "key_file=" << path.string() << "\ndegree=" << keygen_degree
                      << '\n';
        } else if (encrypt_cmd->parsed()) {
            auto kf = read_key_file(enc_key_path);
            KeystreamSource source(kf.spec, kf.key);
            const auto input = load_signal(enc_in);
            const SystemParams params(input.values.size(), cfg.ciphertext_dim,
                                      cfg.row_weight, kf.spec.degree, cfg.noise_sigma);
            std::optional<std::uint64_t> noise_seed;
            if (enc_noise_seed_opt->count()) noise_seed = enc_noise_seed;
            const auto enc = encrypt(source, params, input.values, noise_seed);
            const fs::path ct_path =
                out_is_set ? fs::path(out_override) : fs::path("ciphertext.sots");
            write_ciphertext(ct_path, enc.ciphertext);
            if (!enc_keep_state)
                write_key_file(enc_key_path, kf.spec, source.state_key());
            std::cout << "ciphertext=" << ct_path.string() << "\nN="
                      << params.plaintext_dim << "\nM=" << params.ciphertext_dim
                      << "\nq=" << params.row_weight << "\nsigma=" << params.noise_sigma
                      << "\nkeystream_reuse=" << (enc.keystream_reuse ? 1 : 0)
                      << "\nstate_advanced=" << (enc_keep_state ? 0 : 1) << '\n';
        } else if (decrypt_cmd->parsed()) {
            auto kf = read_key_file(dec_key_path);
            KeystreamSource source(kf.spec, kf.key);
            const Ciphertext ct = read_ciphertext(dec_in);
            const SystemParams params(ct.plaintext_dim, ct.ciphertext_dim, ct.row_weight,
                                      kf.spec.degree, ct.noise_sigma);
            const auto built = build_sensing_key(source, params);
            RecoverySettings settings;
            settings.sparsity = dec_sparsity ? dec_sparsity : cfg.recovery_sparsity;
            settings.basis = dec_pgm
                                 ? Basis::two_d(cfg.basis, square_side(ct.plaintext_dim))
                                 : Basis::one_d(cfg.basis, ct.plaintext_dim);
            const auto x = decrypt(built.key, params, ct, settings);
            fs::path out_path;
            if (dec_pgm) {
                out_path = out_is_set ? fs::path(out_override) : fs::path("decrypted.pgm");
                const auto side = square_side(ct.plaintext_dim);
                write_pgm(out_path, PgmImage::from_signal(x, side, side));
            } else {
                out_path = out_is_set ? fs::path(out_override) : fs::path("decrypted.txt");
                write_signal(out_path, x);
            }
            if (!dec_keep_state)
                write_key_file(dec_key_path, kf.spec, source.state_key());
            std::cout << "decrypted=" << out_path.string()
                      << "\nstate_advanced=" << (dec_keep_state ? 0 : 1) << '\n';
        } else if (cmax_cmd->parsed()) {
            const std::size_t sparsity =
                cmax_sparsity ? cmax_sparsity
                              : std::max<std::size_t>(1, cfg.plaintext_dim / 16);
            const Basis basis = Basis::one_d(cfg.basis, cfg.plaintext_dim);
            const double value = estimate_c_max(basis, sparsity, cfg.trials, cfg.seed);
            std::cout << "basis,N,K,trials,c_max\n"
                      << basis_name(cfg.basis) << ',' << cfg.plaintext_dim << ','
                      << sparsity << ',' << cfg.trials << ',' << std::setprecision(12)
                      << value << '\n';
        } else if (bounds_cmd->parsed()) {
            if (bounds_sweep) {
                for (const auto& path : emit_bound_tables(cfg))
                    std::cout << "table=" << path.string() << '\n';
            } else {
                const IndistParams ip(cfg.ciphertext_dim, cfg.row_weight, b_gamma, b_pnr,
                                      b_cmax);
                const CpaParams cp(cfg.key_bits, cfg.row_weight, b_rho, b_budget, b_eps2,
                                   b_delta, b_eps3, cfg.plaintext_dim);
                const auto report = build_security_report(ip, cp);
                std::cout << security_report_csv_header() << '\n'
                          << security_report_csv_row(report) << '\n';
            }
        } else if (attack_cmd->parsed()) {
            const SystemParams params(cfg.plaintext_dim, cfg.ciphertext_dim,
                                      cfg.row_weight, cfg.key_bits, cfg.noise_sigma);
            const auto spec = LfsrSpec::primitive(cfg.key_bits);
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                Rng rng(derive_seed(cfg.seed, 0xa77ac, t));
                KeystreamSource source(spec, key_from_rng(rng, cfg.key_bits));
                json record;
                record["mode"] = attack_mode;
                if (attack_mode == "class1") {
                    const auto probe = class1_probe(params);
                    const auto enc = encrypt(source, params, probe);
                    const auto counts = class1_attack(enc.ciphertext, params);
                    record["S_CPA_log2"] = count_candidates(counts).log2;
                    record["feasible"] = true;
                    record["stage1_success"] =
                        class1_matches_key(counts, enc.key, params);
                    record["stage2_success"] = false;
                    record["work"] = params.rows_covering_key();
                } else if (attack_mode == "class2") {
                    const auto probe = class2_probe(params);
                    const auto enc = exact_encrypt(source, params, probe);
                    const auto extracted = class2_attack(enc.values, params);
                    record["S_CPA_log2"] = 0.0; // every sign revealed
                    record["feasible"] = true;
                    record["stage1_success"] =
                        class2_matches_key(extracted, enc.key, params);
                    record["stage2_success"] = false;
                    record["work"] = params.ciphertext_dim * params.row_weight;
                } else {
                    const auto outcome = two_stage_cpa_trial(source, params, attack_budget);
                    record["S_CPA_log2"] = outcome.s_cpa_log2;
                    record["feasible"] = outcome.feasible;
                    record["stage1_success"] = outcome.stage1_success;
                    record["stage2_success"] = outcome.stage2_success;
                    record["work"] = outcome.keys_tested;
                }
                std::cout << record.dump() << '\n';
            }
        } else if (phase_cmd->parsed()) {
            const auto result = run_phase_transition(cfg);
            std::size_t skipped = 0;
            for (const auto& pt : result.points)
                if (pt.skipped) ++skipped;
            std::cout << "points=" << result.points.size() << "\nskipped=" << skipped
                      << "\ncsv=" << result.csv_path.string() << '\n';
        } else if (image_cmd->parsed()) {
            std::optional<KeyFile> kf;
            std::optional<KeystreamSource> source;
            if (!image_key_path.empty()) {
                kf = read_key_file(image_key_path);
                source.emplace(kf->spec, kf->key);
            } else {
                Rng rng(derive_seed(cfg.seed, 0x1395));
                source.emplace(LfsrSpec::primitive(cfg.key_bits),
                               key_from_rng(rng, cfg.key_bits));
            }
            const auto report = run_image_pipeline(cfg, image_in, *source);
            if (kf && !image_keep_state)
                write_key_file(image_key_path, kf->spec, source->state_key());
            std::cout << "ciphertext=" << report.ciphertext_path.string()
                      << "\ndecrypted=" << report.decrypted_path.string()
                      << "\nencrypted_view=" << report.encrypted_view_path.string()
                      << "\ncsv=" << report.csv_path.string() << "\npsnr_db=";
            if (report.psnr.exact)
                std::cout << "exact";
            else
                std::cout << std::setprecision(12) << report.psnr.db;
            std::cout << "\nrelative_error=" << std::setprecision(12)
                      << report.relative_error << '\n';
        } else if (indist_cmd->parsed()) {
            const auto result = run_indistinguishability(cfg);
            std::cout << "gamma,q,empirical_pd,bound_pd\n" << std::setprecision(12);
            for (const auto& pt : result.points)
                std::cout << pt.gamma << ',' << pt.row_weight << ',' << pt.empirical
                          << ',' << pt.bound << '\n';
            std::cout << "csv=" << result.csv_path.string() << '\n';
        }
        return 0;
    } catch (const bound_error& e) {
        std::cerr << "bound-invalid: " << e.what() << '\n';
        return 3;
    } catch (const ciphertext_error& e) {
        std::cerr << "inconsistent-ciphertext: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
