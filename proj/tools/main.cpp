// Command-line front end: evaluates the phase diagram of a periodic
// copolymer at a selective interface and cross-checks the eigenvalue route
// against the exact finite-N oracle.  Emits CSV/JSON with 12 significant
// digits, locale independent, deterministic for identical inputs and seed.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "copoly/free_energy.hpp"
#include "copoly/oracle_sim.hpp"
#include "copoly/phase.hpp"

using namespace copoly;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::string fmt12(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

std::string json_num(double v) { return std::isfinite(v) ? fmt12(v) : "null"; }

struct RunConfig {
    std::string omega;
    double eig_tol = 1e-13;
    double root_tol = 1e-10;
    double tail_tol = 1e-10;  // bound on the lumped tail mass of reported measures
    std::size_t n_max_law = 200000;
    long long n_max_oracle = 30000;
    std::string out;
    int threads = 0;  // 0: COPOLY_THREADS or 1
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->set_help_flag("--help", "print help");  // frees -h / --h for the asymmetry
    cmd->add_option("--omega", cfg.omega,
                    "charge sequence: a '+/-' string or a path to a one-line file")
        ->required();
    cmd->add_option("--eig-tol", cfg.eig_tol, "relative eigenvalue tolerance")
        ->check(CLI::Range(1e-16, 1e-3));
    cmd->add_option("--root-tol", cfg.root_tol, "bisection interval tolerance")
        ->check(CLI::Range(1e-14, 1e-3));
    cmd->add_option("--tail-tol", cfg.tail_tol,
                    "bound on the lumped tail mass of reported excursion measures")
        ->check(CLI::Range(1e-14, 1e-3));
    cmd->add_option("--n-max", cfg.n_max_law, "return-law cache size (in units of eta/2)");
    cmd->add_option("--n-max-oracle", cfg.n_max_oracle, "largest N the oracle DP accepts");
    cmd->add_option("--out", cfg.out, "output file (default stdout)");
    cmd->add_option("--threads", cfg.threads,
                    "worker threads for sweeps (default env COPOLY_THREADS or 1)");
}

PeriodicSequence load_sequence(const std::string& omega) {
    const bool literal =
        !omega.empty() && omega.find_first_not_of("+- \t\r\n") == std::string::npos;
    if (literal) return PeriodicSequence::parse(omega);
    std::ifstream in(omega);
    if (!in) throw std::invalid_argument("cannot open omega file: " + omega);
    std::string line;
    std::getline(in, line);
    return PeriodicSequence::parse(line);
}

void write_output(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.out);
    if (!out) throw std::invalid_argument("cannot open output file: " + cfg.out);
    out << text;
}

int thread_count(const RunConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("COPOLY_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

// Deterministic chunked parallel map: out[i] = fn(i), any thread count.
// The first worker exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mx;
    std::size_t next = 0;
    const std::size_t chunk =
        (n + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
    for (int t = 0; t < threads && next < n; ++t) {
        const std::size_t lo = next, hi = std::min(n, next + chunk);
        next = hi;
        pool.emplace_back([lo, hi, &fn, &error, &error_mx] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mx);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Head cutoff for reported excursion measures: grown until the lumped tail
// is below tail_tol (tails stay exact either way; this only sets how much
// of the measure is spelled out pointwise).
long long head_cutoff_for(const System& sys, double b, const PhasePoint& p,
                          const RunConfig& cfg) {
    long long cutoff = 1024;
    const long long cap = 2 * static_cast<long long>(sys.law.cache_size());
    while (cutoff < cap) {
        const auto mu = mu_b(sys, b, p, cutoff, cfg.eig_tol);
        double tail = 0.0;
        for (double t : mu.tail_mass) tail += t;
        if (tail < cfg.tail_tol) return cutoff;
        cutoff *= 2;
    }
    return cap;
}

int cmd_eval(const RunConfig& cfg, double lambda, double h) {
    const System sys(load_sequence(cfg.omega), cfg.n_max_law);
    const PhasePoint p{lambda, h};
    const auto r = solve_b_tilde(sys, p, cfg.root_tol, cfg.eig_tol);
    const auto cls = classify(sys, p, 1e-9, cfg.eig_tol);
    // region label under the closed-delocalized convention: L is open
    const std::string region = r.z_at_zero > 1.0 + 1e-9 ? "Localized" : "Delocalized";

    std::string mean = "null";
    if (r.b_tilde > 1e-9)
        mean = json_num(mean_excursion(
            mu_b(sys, r.b_tilde, p, head_cutoff_for(sys, r.b_tilde, p, cfg), cfg.eig_tol)));

    std::ostringstream os;
    os << "{\n"
       << "  \"lambda\": " << fmt12(lambda) << ",\n"
       << "  \"h\": " << fmt12(h) << ",\n"
       << "  \"t_omega\": " << sys.xi.T << ",\n"
       << "  \"z_at_zero\": " << json_num(r.z_at_zero) << ",\n"
       << "  \"b_tilde\": " << fmt12(r.b_tilde) << ",\n"
       << "  \"free_energy\": " << fmt12(r.f) << ",\n"
       << "  \"phase\": \"" << region << "\",\n"
       << "  \"classification\": \"" << to_string(cls) << "\",\n"
       << "  \"mean_excursion\": " << mean << ",\n"
       << "  \"residual\": " << fmt12(r.residual) << "\n"
       << "}\n";
    write_output(cfg, os.str());
    return 0;
}

std::vector<double> linspace(double lo, double hi, int steps) {
    std::vector<double> g;
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (steps == 1) return {lo};
    g.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        g.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    return g;
}

int cmd_curve(const RunConfig& cfg, double lambda_min, double lambda_max, int steps,
              const std::string& format) {
    if (lambda_min < 0 || lambda_max < lambda_min)
        throw std::invalid_argument("need 0 <= lambda-min <= lambda-max");
    const System sys(load_sequence(cfg.omega), cfg.n_max_law);
    const auto grid = linspace(lambda_min, lambda_max, steps);
    std::vector<CriticalPoint> pts(grid.size());
    parallel_for(grid.size(), thread_count(cfg), [&](std::size_t i) {
        pts[i] = critical_h(sys, grid[i], cfg.root_tol, cfg.eig_tol);
    });

    std::ostringstream os;
    if (format == "json") {
        os << "[\n";
        for (std::size_t i = 0; i < pts.size(); ++i)
            os << "  {\"lambda\": " << fmt12(pts[i].lambda) << ", \"h_c\": " << fmt12(pts[i].h_c)
               << ", \"residual\": " << fmt12(pts[i].residual) << "}"
               << (i + 1 < pts.size() ? ",\n" : "\n");
        os << "]\n";
    } else {
        os << "lambda,h_c,residual\n";
        for (const auto& cp : pts)
            os << fmt12(cp.lambda) << ',' << fmt12(cp.h_c) << ',' << fmt12(cp.residual) << '\n';
    }
    write_output(cfg, os.str());

    // slope diagnostics: incremental ratios against the cone bound
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i - 1].lambda <= 0) continue;
        const double ratio = (pts[i].h_c - pts[i - 1].h_c) / (pts[i].lambda - pts[i - 1].lambda);
        const double bound = (1.0 - pts[i - 1].h_c) / pts[i - 1].lambda;
        worst = std::max(worst, ratio - bound);
    }
    if (std::isfinite(worst))
        std::cerr << "curve: max incremental-ratio excess over (1-h_c)/lambda = " << fmt12(worst)
                  << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg, double lambda_min, double lambda_max, int lambda_steps,
              double h_min, double h_max, int h_steps, const std::string& format) {
    const System sys(load_sequence(cfg.omega), cfg.n_max_law);
    const auto lg = linspace(lambda_min, lambda_max, lambda_steps);
    const auto hg = linspace(h_min, h_max, h_steps);
    struct Row {
        double lambda, h, b_tilde;
        Phase phase;
    };
    std::vector<Row> rows(lg.size() * hg.size());
    parallel_for(rows.size(), thread_count(cfg), [&](std::size_t i) {
        const double lambda = lg[i / hg.size()];
        const double h = hg[i % hg.size()];
        const PhasePoint p{lambda, h};
        rows[i] = {lambda, h, solve_b_tilde(sys, p, cfg.root_tol, cfg.eig_tol).b_tilde,
                   classify(sys, p, 1e-9, cfg.eig_tol)};
    });

    std::ostringstream os;
    if (format == "json") {
        os << "[\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            os << "  {\"lambda\": " << fmt12(rows[i].lambda) << ", \"h\": " << fmt12(rows[i].h)
               << ", \"phase\": \"" << to_string(rows[i].phase)
               << "\", \"b_tilde\": " << fmt12(rows[i].b_tilde) << "}"
               << (i + 1 < rows.size() ? ",\n" : "\n");
        os << "]\n";
    } else {
        os << "lambda,h,phase,b_tilde\n";
        for (const auto& row : rows)
            os << fmt12(row.lambda) << ',' << fmt12(row.h) << ',' << to_string(row.phase) << ','
               << fmt12(row.b_tilde) << '\n';
    }
    write_output(cfg, os.str());
    return 0;
}

int cmd_asym(const RunConfig& cfg) {
    const System sys(load_sequence(cfg.omega), cfg.n_max_law);
    std::ostringstream os;
    os << "{\n"
       << "  \"t_omega\": " << sys.xi.T << ",\n"
       << "  \"xi_star\": " << sys.xi.xi_star << ",\n"
       << "  \"m_omega\": " << fmt12(m_omega(sys)) << ",\n"
       << "  \"m_big_omega\": " << fmt12(m_big_omega(sys)) << ",\n"
       << "  \"z_hat_at_zero\": " << fmt12(z_hat(sys, 0.0)) << ",\n"
       << "  \"expansion_bracket_at_m_omega\": " << fmt12(small_lambda_bracket(sys, m_omega(sys)))
       << "\n}\n";
    write_output(cfg, os.str());
    return 0;
}

int cmd_oracle(const RunConfig& cfg, double lambda, double h, std::vector<long long> n_list) {
    const auto seq = load_sequence(cfg.omega);
    const System sys(seq, cfg.n_max_law);
    const PhasePoint p{lambda, h};
    if (n_list.empty()) n_list = {4000, 10000, 20000};
    const auto fit = free_energy_estimate(seq, p, n_list, cfg.n_max_oracle);
    const auto r = solve_b_tilde(sys, p, cfg.root_tol, cfg.eig_tol);

    std::ostringstream os;
    os << "{\n  \"lambda\": " << fmt12(lambda) << ",\n  \"h\": " << fmt12(h)
       << ",\n  \"points\": [";
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const double fn = log_partition_exact(seq, p, n_list[i], cfg.n_max_oracle);
        os << (i ? ", " : "") << "{\"n\": " << n_list[i] << ", \"f_n\": " << fmt12(fn) << "}";
    }
    os << "],\n"
       << "  \"f_est\": " << fmt12(fit.f_est) << ",\n"
       << "  \"err_est\": " << fmt12(fit.err_est) << ",\n"
       << "  \"fit_slope\": " << fmt12(fit.slope) << ",\n"
       << "  \"f_analytic\": " << fmt12(r.f) << ",\n"
       << "  \"b_tilde\": " << fmt12(r.b_tilde) << ",\n"
       << "  \"abs_diff\": " << fmt12(std::fabs(fit.f_est - r.f)) << "\n}\n";
    write_output(cfg, os.str());
    return 0;
}

int cmd_sample(const RunConfig& cfg, double lambda, double h, long long n, int count,
               std::uint64_t seed, const std::string& dump) {
    const auto seq = load_sequence(cfg.omega);
    const PhasePoint p{lambda, h};
    const auto samples = sample_paths(seq, p, n, count, seed, cfg.n_max_oracle);
    const auto st = excursion_stats(samples, seq.period());

    if (!dump.empty()) {
        std::ofstream out(dump);
        if (!out) throw std::invalid_argument("cannot open path dump file: " + dump);
        for (const auto& path : samples) {
            for (std::size_t i = 0; i < path.heights.size(); ++i)
                out << (i ? " " : "") << path.heights[i];
            out << '\n';
        }
    }

    std::ostringstream os;
    os << "{\n  \"lambda\": " << fmt12(lambda) << ",\n  \"h\": " << fmt12(h)
       << ",\n  \"n\": " << n << ",\n  \"count\": " << count << ",\n  \"seed\": " << seed
       << ",\n  \"returns_per_site\": " << fmt12(st.returns_per_site)
       << ",\n  \"mean_excursion\": " << json_num(st.mean_excursion)
       << ",\n  \"total_excursions\": " << st.excursion_lengths.size()
       << ",\n  \"frac_above\": {";
    bool first = true;
    for (const auto& [level, frac] : st.frac_above) {
        os << (first ? "" : ", ") << "\"" << level << "\": " << fmt12(frac);
        first = false;
    }
    os << "},\n  \"tail_decay_rate\": " << fmt12(tail_decay_rate(samples)) << "\n}\n";
    write_output(cfg, os.str());
    return 0;
}

struct Check {
    std::string name;
    double value;
    double tol;
    bool pass;
};

int cmd_verify(const RunConfig& cfg, std::vector<long long> n_list) {
    const auto seq = load_sequence(cfg.omega);
    const System sys(seq, cfg.n_max_law);
    std::vector<Check> checks;
    auto add = [&](const std::string& name, double value, double tol) {
        checks.push_back({name, value, tol, std::fabs(value) <= tol});
    };

    // closed-form eigenvalue of the freely tilted walk
    double worst = 0.0;
    for (double b : {0.01, 0.1, 0.5, 1.0, 5.0}) {
        const double z = std::exp(log_perron_z(sys, b, {0.0, 0.0}, cfg.eig_tol));
        worst = std::max(worst, std::fabs(z - (1.0 - std::sqrt(1.0 - std::exp(-2.0 * b)))));
    }
    add("closed_form_z_free", worst, 1e-12);

    // derivative identity d/db log Z = -mean excursion
    const PhasePoint pd{0.7, 0.1};
    worst = 0.0;
    for (double b : {0.1, 0.5, 1.0}) {
        const double step = 1e-5;
        const double diff = (log_perron_z(sys, b + step, pd, cfg.eig_tol) -
                             log_perron_z(sys, b - step, pd, cfg.eig_tol)) /
                            (2.0 * step);
        const double mean = mean_excursion(mu_b(sys, b, pd, 10000, cfg.eig_tol));
        worst = std::max(worst, std::fabs(diff + mean) / mean);
    }
    add("derivative_identity_rel", worst, 1e-6);

    // energy-entropy functional at the tilted optimizer
    {
        const double b = 0.5;
        const auto mu = mu_b(sys, b, pd, 10000, cfg.eig_tol);
        const double q = functional_Q(sys, mu, pd);
        add("q_identity", q - (b * mean_excursion(mu) + log_perron_z(sys, b, pd, cfg.eig_tol)),
            1e-8);
    }

    // bistochasticity of the class-mass matrix
    worst = 0.0;
    for (int a = 0; a < sys.xi.T; ++a) {
        double row = 0.0;
        for (int b = 0; b < sys.xi.T; ++b)
            row += sys.law.class_mass(((b - a) % sys.xi.T + sys.xi.T) % sys.xi.T);
        worst = std::max(worst, std::fabs(row - 1.0));
    }
    add("bistochastic_rows", worst, 1e-12);

    // the two small-coupling routes agree
    add("m_omega_bracket", small_lambda_bracket(sys, m_omega(sys)), 1e-10);

    // admissibility of mu_b
    {
        const auto mu = mu_b(sys, 0.5, pd, 10000, cfg.eig_tol);
        const auto m1 = mu.marginal_first();
        const auto m2 = mu.marginal_second();
        double dev = std::fabs(mu.total_mass() - 1.0);
        for (int a = 0; a < sys.xi.T; ++a)
            dev = std::max(dev, std::fabs(m1[static_cast<std::size_t>(a)] -
                                          m2[static_cast<std::size_t>(a)]));
        add("mu_b_admissible", dev, 1e-10);
    }

    // large-coupling critical asymptote
    {
        const double M = m_big_omega(sys);
        const auto cp = critical_h(sys, 10.0, cfg.root_tol, cfg.eig_tol);
        add("large_lambda_asymptote", 10.0 * (1.0 - cp.h_c) - M, 1e-4);
    }

    // oracle cross-check of the free energy
    {
        if (n_list.empty()) n_list = {4000, 10000, 20000};
        const PhasePoint p{1.0, 0.0};
        const auto fit = free_energy_estimate(seq, p, n_list, cfg.n_max_oracle);
        const auto r = solve_b_tilde(sys, p, cfg.root_tol, cfg.eig_tol);
        add("oracle_agreement", fit.f_est - r.f, 5e-3);
    }

    std::ostringstream os;
    bool all = true;
    for (const auto& c : checks) {
        os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  value=" << fmt12(c.value)
           << "  tol=" << fmt12(c.tol) << "\n";
        all = all && c.pass;
    }
    os << (all ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    write_output(cfg, os.str());
    return all ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic copolymer at a selective interface: free energy, "
                 "phase diagram, and exact finite-N cross-checks"};
    app.require_subcommand(1);

    RunConfig cfg;
    double lambda = 0.0, h = 0.0;
    double lambda_min = 0.1, lambda_max = 2.0, h_min = 0.0, h_max = 1.0;
    int steps = 20, lambda_steps = 20, h_steps = 20;
    long long n = 1000;
    int count = 1;
    std::uint64_t seed = 0;
    std::string dump, format = "csv";
    std::vector<long long> n_list;

    auto* eval = app.add_subcommand("eval", "free energy and phase at one (lambda, h)");
    add_common(eval, cfg);
    eval->add_option("--lambda", lambda)->required();
    eval->add_option("--h", h)->required();

    auto* curve = app.add_subcommand("curve", "critical curve h_c(lambda) as CSV");
    add_common(curve, cfg);
    curve->add_option("--lambda-min", lambda_min)->required();
    curve->add_option("--lambda-max", lambda_max)->required();
    curve->add_option("--steps", steps)->required();
    curve->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    auto* sweep = app.add_subcommand("sweep", "2-D phase grid as CSV");
    add_common(sweep, cfg);
    sweep->add_option("--lambda-min", lambda_min)->required();
    sweep->add_option("--lambda-max", lambda_max)->required();
    sweep->add_option("--lambda-steps", lambda_steps)->required();
    sweep->add_option("--h-min", h_min)->required();
    sweep->add_option("--h-max", h_max)->required();
    sweep->add_option("--h-steps", h_steps)->required();
    sweep->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    auto* asym = app.add_subcommand("asym", "small- and large-coupling constants");
    add_common(asym, cfg);

    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    add_common(verify, cfg);
    verify->add_option("--n-oracle", n_list, "N values for the oracle cross-check");

    auto* oracle = app.add_subcommand("oracle", "finite-N free-energy estimate");
    add_common(oracle, cfg);
    oracle->add_option("--lambda", lambda)->required();
    oracle->add_option("--h", h)->required();
    oracle->add_option("--n-list", n_list, "increasing N values (default 4000 10000 20000)");

    auto* sample = app.add_subcommand("sample", "exact path samples and their statistics");
    add_common(sample, cfg);
    sample->add_option("--lambda", lambda)->required();
    sample->add_option("--h", h)->required();
    sample->add_option("--n", n)->required();
    sample->add_option("--count", count)->required();
    sample->add_option("--seed", seed)->required();
    sample->add_option("--dump", dump, "write one line of heights per path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    try {
        if (eval->parsed()) return cmd_eval(cfg, lambda, h);
        if (curve->parsed()) return cmd_curve(cfg, lambda_min, lambda_max, steps, format);
        if (sweep->parsed())
            return cmd_sweep(cfg, lambda_min, lambda_max, lambda_steps, h_min, h_max, h_steps,
                             format);
        if (asym->parsed()) return cmd_asym(cfg);
        if (verify->parsed()) return cmd_verify(cfg, n_list);
        if (oracle->parsed()) return cmd_oracle(cfg, lambda, h, n_list);
        if (sample->parsed()) return cmd_sample(cfg, lambda, h, n, count, seed, dump);
    } catch (const SequenceError& e) {
        const char* kind = "Invalid";
        switch (e.kind()) {
            case SequenceError::Kind::OddLength: kind = "OddLength"; break;
            case SequenceError::Kind::NotCentered: kind = "NotCentered"; break;
            case SequenceError::Kind::Trivial: kind = "Trivial"; break;
        }
        std::cerr << "error: " << kind << ": " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
