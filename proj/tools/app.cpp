#include "app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"

#include "dtsim/core.hpp"
#include "dtsim/covariance.hpp"
#include "dtsim/multidim.hpp"
#include "dtsim/seed_io.hpp"
#include "dtsim/simulate.hpp"
#include "dtsim/spectral.hpp"
#include "dtsim/verify.hpp"

namespace dtsim::cli {

using json = nlohmann::json;

namespace {

// =============================================================================
// Tabular output
// =============================================================================

using Cell = std::variant<std::monostate, long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw IoError("cannot open " + path + " for writing");
        }
    }

    std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }
    bool is_stdout() const { return !file_.is_open(); }

    void finish() {
        stream().flush();
        if (!stream()) throw IoError("write failed");
    }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

std::string csv_cell(const Cell& c) {
    struct {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(long v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_real(v); }
        std::string operator()(const std::string& v) const { return v; }
    } visit;
    return std::visit(visit, c);
}

json json_cell(const Cell& c) {
    struct {
        json operator()(std::monostate) const { return nullptr; }
        json operator()(long v) const { return v; }
        json operator()(double v) const { return v; }
        json operator()(const std::string& v) const { return v; }
    } visit;
    return std::visit(visit, c);
}

void write_table(const Table& t, const std::string& format, std::ostream& out) {
    if (format == "json") {
        json records = json::array();
        for (const auto& row : t.rows) {
            json rec = json::object();
            for (std::size_t i = 0; i < t.columns.size(); ++i)
                rec[t.columns[i]] = json_cell(row[i]);
            records.push_back(std::move(rec));
        }
        out << records.dump(1) << '\n';
        return;
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_cell(row[i]);
        out << '\n';
    }
}

// =============================================================================
// Configuration
// =============================================================================

struct Range {
    long lo;
    long hi;
};

Range parse_range(const std::string& text, Range fallback) {
    if (text.empty()) return fallback;
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const long v = std::stol(text);
            return {v, v};
        }
        const Range r{std::stol(text.substr(0, colon)), std::stol(text.substr(colon + 1))};
        if (r.lo > r.hi) throw DomainError("range '" + text + "' is empty");
        return r;
    } catch (const std::invalid_argument&) {
        throw DomainError("cannot parse range '" + text + "' (expected lo:hi)");
    }
}

struct Invocation {
    RunConfig cfg;
    std::string config_file;
    std::string n_range;
    std::string tau_range;
    std::string methods = "closed";
    std::string process = "simple";
    double perturb = 0.0;
    bool json_flag = false;
    bool mc = false;
    long truncation = -1;
    std::map<CLI::App*, std::map<std::string, CLI::Option*>> options;
};

void add_params(CLI::App* sub, Invocation& inv) {
    auto& o = inv.options[sub];
    o["H"] = sub->add_option("--H", inv.cfg.H, "self-similarity index H > 0");
    o["alpha"] = sub->add_option("--alpha", inv.cfg.alpha, "grid base alpha > 1");
    o["T"] = sub->add_option("--T", inv.cfg.T, "samples per scale");
    o["format"] = sub->add_option("--format", inv.cfg.output.format, "csv or json")
                      ->check(CLI::IsMember({"csv", "json"}));
    o["out"] = sub->add_option("--out", inv.cfg.output.path, "output file, - for stdout");
    sub->add_option("--config", inv.config_file, "JSON config; flags win on conflict");
}

void add_seed(CLI::App* sub, Invocation& inv) {
    auto& o = inv.options[sub];
    o["seed_file"] = sub->add_option("--seed-file", inv.cfg.seed_file,
                                     "covariance seed CSV (j,r0,r1)");
    o["builtin"] = sub->add_flag("--builtin", inv.cfg.builtin,
                                 "use the simple Brownian motion seed (default)");
}

void add_mc(CLI::App* sub, Invocation& inv) {
    auto& o = inv.options[sub];
    o["paths"] = sub->add_option("--paths", inv.cfg.mc.n_paths, "Monte Carlo paths");
    o["kmax"] = sub->add_option("--kmax", inv.cfg.mc.k_max, "last grid index");
    o["seed"] = sub->add_option("--seed", inv.cfg.mc.rng_seed, "RNG seed");
}

template <typename T>
void take(const json& j, const char* key, const std::map<std::string, CLI::Option*>& o,
          T& target) {
    const auto it = o.find(key);
    if (!j.contains(key) || it == o.end() || it->second->count() > 0) return;
    target = j.at(key).get<T>();
}

void apply_config_file(Invocation& inv, CLI::App* sub) {
    if (inv.config_file.empty()) return;
    std::ifstream in(inv.config_file);
    if (!in) throw IoError("cannot open config " + inv.config_file);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw DomainError(std::string("config is not valid JSON: ") + ex.what());
    }
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    const auto& o = inv.options[sub];
    try {
        take(j, "H", o, inv.cfg.H);
        take(j, "alpha", o, inv.cfg.alpha);
        take(j, "T", o, inv.cfg.T);
        take(j, "format", o, inv.cfg.output.format);
        take(j, "out", o, inv.cfg.output.path);
        take(j, "builtin", o, inv.cfg.builtin);
        take(j, "paths", o, inv.cfg.mc.n_paths);
        take(j, "kmax", o, inv.cfg.mc.k_max);
        take(j, "seed", o, inv.cfg.mc.rng_seed);
        take(j, "n_omega", o, inv.cfg.spectra.n_omega);
        take(j, "n_range", o, inv.n_range);
        take(j, "tau_range", o, inv.tau_range);
        take(j, "methods", o, inv.methods);
        take(j, "perturb", o, inv.perturb);
        take(j, "mc", o, inv.mc);
        take(j, "process", o, inv.process);
        if (j.contains("seed_file") && o.count("seed_file") &&
            o.at("seed_file")->count() == 0)
            inv.cfg.seed_file = j.at("seed_file").get<std::string>();
        if (j.contains("truncation") && o.count("truncation") &&
            o.at("truncation")->count() == 0)
            inv.truncation = j.at("truncation").get<long>();
    } catch (const json::exception& ex) {
        throw DomainError(std::string("bad config value: ") + ex.what());
    }
    if (inv.cfg.output.format != "csv" && inv.cfg.output.format != "json")
        throw DomainError("format must be csv or json");
}

struct Source {
    HChain<double> chain;
    bool builtin;
};

Source load_chain(const RunConfig& cfg, double perturb = 0.0) {
    const auto params = make_params(cfg.H, cfg.alpha, cfg.T);
    if (cfg.seed_file && cfg.builtin)
        throw DomainError("--seed-file and --builtin are mutually exclusive");
    CovarianceSeed<double> seed;
    const bool builtin = !cfg.seed_file;
    if (cfg.seed_file) {
        seed = read_seed_csv(*cfg.seed_file);
        if (seed.size() != cfg.T)
            throw DomainError("seed file has " + std::to_string(seed.size()) +
                              " rows but T = " + std::to_string(cfg.T));
    } else {
        seed = simple_bm_seed(params);
    }
    if (perturb != 0.0) {
        std::mt19937_64 rng(0x5eed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& r : seed.r1) r *= 1.0 + perturb * u(rng);
    }
    return {make_chain(params, seed), builtin};
}

// =============================================================================
// Subcommands
// =============================================================================

int cmd_simulate(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const auto& cfg = inv.cfg;
    const auto params = make_params(cfg.H, cfg.alpha, cfg.T);
    const bool simple = inv.process == "simple";
    const Ensemble e = simple ? simulate_simple_bm(params, cfg.mc.k_max, cfg.mc.n_paths,
                                                   cfg.mc.rng_seed)
                              : simulate_brownian(params, cfg.mc.k_max, cfg.mc.n_paths,
                                                  cfg.mc.rng_seed);
    Sink sink(cfg.output.path, out);
    if (cfg.output.format == "json") {
        const auto grid = make_grid(params, e.k_max);
        auto& s = sink.stream();
        s << "[";
        for (int i = 0; i < e.n_paths; ++i)
            for (int k = 0; k <= e.k_max; ++k) {
                const json rec{{"path", i}, {"k", k}, {"t", grid.times[k]},
                               {"value", e.paths(i, k)}};
                s << (i || k ? ",\n" : "\n") << rec.dump();
            }
        s << "\n]\n";
    } else {
        write_ensemble_csv(sink.stream(), e);
    }
    sink.finish();
    std::ostream& summary = sink.is_stdout() ? err : out;
    summary << "simulated " << e.n_paths << " paths of "
            << (simple ? "simple Brownian motion" : "Brownian motion")
            << " on alpha^0..alpha^" << e.k_max << " (alpha=" << format_real(cfg.alpha)
            << ", T=" << cfg.T << ", H=" << format_real(cfg.H)
            << "), seed=" << e.rng_seed << '\n';
    return kOk;
}

int cmd_cov(const Invocation& inv, std::ostream& out, std::ostream&) {
    const auto& cfg = inv.cfg;
    const auto src = load_chain(cfg);
    const auto& p = src.chain.params;
    const Range nr = parse_range(inv.n_range, {0, cfg.T - 1});
    const Range tr = parse_range(inv.tau_range, {0, 2L * cfg.T});
    if (nr.lo < 0) throw DomainError("n must be >= 0");

    std::optional<Ensemble> ensemble;
    if (inv.mc) {
        if (!src.builtin)
            throw DomainError("--mc simulates simple Brownian motion and needs the "
                              "builtin seed");
        ensemble = simulate_simple_bm(p, cfg.mc.k_max, cfg.mc.n_paths, cfg.mc.rng_seed);
    }

    Table t{{"n", "tau", "closed_form", "oracle", "mc_estimate", "mc_stderr"}, {}};
    for (long n = nr.lo; n <= nr.hi; ++n)
        for (long tau = tr.lo; tau <= tr.hi; ++tau) {
            std::vector<Cell> row{n, tau, dtsim_cov(src.chain, n, tau), {}, {}, {}};
            if (src.builtin && n + tau >= 0)
                row[3] = simple_bm_cov(std::pow(p.alpha, n + tau), std::pow(p.alpha, n),
                                       p.H, p.scale());
            if (ensemble) {
                if (n + tau < 0 || n + tau > cfg.mc.k_max || n > cfg.mc.k_max)
                    throw DomainError("lattice point (n=" + std::to_string(n) +
                                      ", tau=" + std::to_string(tau) +
                                      ") lies outside the simulated grid 0..kmax");
                const auto est = empirical_cov(*ensemble, n, tau);
                row[4] = est.value;
                row[5] = est.std_error;
            }
            t.rows.push_back(std::move(row));
        }
    Sink sink(cfg.output.path, out);
    write_table(t, cfg.output.format, sink.stream());
    sink.finish();
    return kOk;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) items.push_back(item);
    return items;
}

int cmd_spectra(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const auto& cfg = inv.cfg;
    const auto src = load_chain(cfg);
    const auto& chain = src.chain;
    const int T = cfg.T;
    const double rho = convergence_ratio(chain);
    require_convergent(rho);
    const long S = inv.truncation >= 0 ? inv.truncation : auto_truncation(rho);
    const auto grid = make_frequency_grid<double>(cfg.spectra.n_omega);

    static const std::map<std::string, SpectralMethod> known{
        {"closed", SpectralMethod::closed},
        {"sum", SpectralMethod::sum},
        {"example", SpectralMethod::example},
        {"diag", SpectralMethod::diag}};
    const auto methods = split_list(inv.methods);
    if (methods.empty()) throw DomainError("no spectral method selected");
    std::map<std::string, SpectralMatrix<double>> results;
    for (const auto& m : methods) {
        const auto it = known.find(m);
        if (it == known.end()) throw DomainError("unknown spectral method '" + m + "'");
        if (it->second == SpectralMethod::example && !src.builtin)
            throw DomainError("method 'example' needs the builtin seed");
        results.emplace(m, spectral_matrix(chain, grid, it->second, S));
    }

    Table t{{"omega", "j", "r", "re", "im", "method"}, {}};
    for (const auto& m : methods) {
        const auto& sm = results.at(m);
        for (int w = 0; w < grid.n_omega; ++w)
            for (long j = 0; j < T; ++j)
                for (long r = 0; r < T; ++r) {
                    if (m == "diag" && j != r) continue;
                    const auto v = sm.entries[w](j, r);
                    t.rows.push_back({grid.omegas[w], j, r, v.real(), v.imag(), m});
                }
    }
    Sink sink(cfg.output.path, out);
    write_table(t, cfg.output.format, sink.stream());
    sink.finish();

    if (results.count("closed") && results.count("sum")) {
        double worst = 0;
        for (int w = 0; w < grid.n_omega; ++w)
            worst = std::max(worst, (results.at("closed").entries[w] -
                                     results.at("sum").entries[w])
                                        .cwiseAbs()
                                        .maxCoeff());
        err << "max |closed - sum| = " << format_real(worst) << " (S = " << S << ")\n";
    }
    return kOk;
}

int cmd_embed(const Invocation& inv, std::ostream& out, std::ostream&) {
    const auto& cfg = inv.cfg;
    const auto src = load_chain(cfg);
    const auto q = make_qcov(src.chain);
    const Range nr = parse_range(inv.n_range, {0, 2});
    const Range tr = parse_range(inv.tau_range, {0, 3});
    if (nr.lo < 0) throw DomainError("n must be >= 0");
    Table t{{"n", "tau", "j", "k", "value"}, {}};
    for (long n = nr.lo; n <= nr.hi; ++n)
        for (long tau = tr.lo; tau <= tr.hi; ++tau) {
            const Mat<double> Q = q_cov(q, n, tau);
            for (long j = 0; j < cfg.T; ++j)
                for (long k = 0; k < cfg.T; ++k)
                    t.rows.push_back({n, tau, j, k, Q(j, k)});
        }
    Sink sink(cfg.output.path, out);
    write_table(t, cfg.output.format, sink.stream());
    sink.finish();
    return kOk;
}

int cmd_verify(const Invocation& inv, std::ostream& out, std::ostream&) {
    const auto& cfg = inv.cfg;
    const auto src = load_chain(cfg, inv.perturb);
    VerifyOptions opts;
    opts.oracle = src.builtin;
    const auto checks = run_verification(src.chain, opts);
    bool all = true;
    for (const auto& c : checks) all = all && c.passed;

    Sink sink(cfg.output.path, out);
    auto& s = sink.stream();
    if (inv.json_flag || cfg.output.format == "json") {
        json report{{"passed", all}, {"checks", json::array()}};
        for (const auto& c : checks)
            report["checks"].push_back({{"name", c.name},
                                        {"observed", std::isfinite(c.observed)
                                                         ? json(c.observed)
                                                         : json(nullptr)},
                                        {"tolerance", c.tolerance},
                                        {"passed", c.passed},
                                        {"detail", c.detail}});
        s << report.dump(2) << '\n';
    } else {
        char line[160];
        std::snprintf(line, sizeof line, "%-22s %-12s %-10s %s\n", "check", "observed",
                      "tolerance", "result");
        s << line;
        for (const auto& c : checks) {
            std::snprintf(line, sizeof line, "%-22s %-12.3e %-10.0e %s", c.name.c_str(),
                          c.observed, c.tolerance, c.passed ? "PASS" : "FAIL");
            s << line;
            if (!c.detail.empty()) s << "  (" << c.detail << ')';
            s << '\n';
        }
        s << (all ? "all checks passed" : "verification FAILED") << '\n';
    }
    sink.finish();
    return all ? kOk : kVerifyFailed;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Invocation inv;
    CLI::App app{"Discrete-time scale-invariant Markov processes: covariances, "
                 "embeddings and spectra"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo paths on the alpha^k grid");
    add_params(sim, inv);
    add_mc(sim, inv);
    inv.options[sim]["process"] =
        sim->add_option("--process", inv.process, "simple or brownian")
            ->check(CLI::IsMember({"simple", "brownian"}));

    auto* cov = app.add_subcommand("cov", "closed-form covariance lattice");
    add_params(cov, inv);
    add_seed(cov, inv);
    add_mc(cov, inv);
    inv.options[cov]["n_range"] = cov->add_option("--n-range", inv.n_range, "lo:hi");
    inv.options[cov]["tau_range"] = cov->add_option("--tau-range", inv.tau_range, "lo:hi");
    inv.options[cov]["mc"] = cov->add_flag("--mc", inv.mc, "add Monte Carlo columns");

    auto* spectra_cmd = app.add_subcommand("spectra", "spectral density matrices");
    add_params(spectra_cmd, inv);
    add_seed(spectra_cmd, inv);
    inv.options[spectra_cmd]["methods"] =
        spectra_cmd->add_option("--methods", inv.methods, "closed,sum,example,diag");
    inv.options[spectra_cmd]["n_omega"] =
        spectra_cmd->add_option("--n-omega", inv.cfg.spectra.n_omega, "frequency grid size");
    inv.options[spectra_cmd]["truncation"] =
        spectra_cmd->add_option("--truncation", inv.truncation, "series truncation S");

    auto* emb = app.add_subcommand("embed", "covariance matrices of the embedding");
    add_params(emb, inv);
    add_seed(emb, inv);
    inv.options[emb]["n_range"] = emb->add_option("--n-range", inv.n_range, "lo:hi");
    inv.options[emb]["tau_range"] = emb->add_option("--tau-range", inv.tau_range, "lo:hi");

    auto* ver = app.add_subcommand("verify", "run every invariant suite");
    add_params(ver, inv);
    add_seed(ver, inv);
    inv.options[ver]["perturb"] =
        ver->add_option("--perturb", inv.perturb, "relative noise added to r1");
    ver->add_flag("--json", inv.json_flag, "machine-readable report");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config_file(inv, sub);
        if (inv.truncation < -1) throw DomainError("truncation must be >= 0");
        if (sub == sim) return cmd_simulate(inv, out, err);
        if (sub == cov) return cmd_cov(inv, out, err);
        if (sub == spectra_cmd) return cmd_spectra(inv, out, err);
        if (sub == emb) return cmd_embed(inv, out, err);
        return cmd_verify(inv, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kConvergenceError;
    } catch (const PoleError& e) {
        err << "error: " << e.what() << '\n';
        return kConvergenceError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

} // namespace dtsim::cli
