#include "grushin/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "grushin/bounds.hpp"
#include "grushin/carleman.hpp"
#include "grushin/control.hpp"
#include "grushin/observability.hpp"
#include "grushin/spectral.hpp"
#include "json.hpp"

namespace grushin {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kKeys = {"gamma", "a", "b", "a_prime", "b_prime", "T", "nx", "nt", "n_max"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw Error("cli", "key '" + key + "': expected a real, got '" + v + "'");
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long x = 0;
    try {
        x = std::stol(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw Error("cli", "key '" + key + "': expected an integer, got '" + v + "'");
    return static_cast<int>(x);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw Error("cli", "cannot open " + p.string() + " for writing");
    return out;
}

void write_json(const std::filesystem::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

// 1, 2, 4, ... up to n_max, starting at `from` when n_max allows two samples.
std::vector<int> doubling_list(int n_max, int from) {
    std::vector<int> ns;
    int start = from;
    while (start > 1 && start * 2 > n_max) start /= 2;
    for (int n = start; n <= n_max; n *= 2) ns.push_back(n);
    return ns;
}

struct Context {
    const RunManifest& m;
    ProblemConfig cfg;
    std::filesystem::path dir;
    std::ostream& out;
};

int cmd_eigen(Context& c) {
    const int n = c.m.n > 0 ? c.m.n : c.cfg.n_max;
    const int nx = std::max(c.cfg.nx, required_nx(c.cfg.gamma, n));
    const Grid1D grid = make_grid(nx);
    const EigenPair p = ground_eigenpair(assemble_mode_operator(n, c.cfg.gamma, grid));
    auto csv = open_out(c.dir / ("eigen_n" + std::to_string(n) + ".csv"));
    csv << "x,v\n";
    const auto v = with_boundary(p.v);
    for (std::size_t i = 0; i < v.size(); ++i) csv << num(grid.nodes[i]) << ',' << num(v[i]) << '\n';
    write_json(c.dir / "eigen.json", json{{"gamma", c.cfg.gamma},
                                          {"n", n},
                                          {"nx", nx},
                                          {"lambda", p.lambda},
                                          {"lambda_lo", p.lambda_lo},
                                          {"lambda_hi", p.lambda_hi},
                                          {"residual", p.residual}});
    c.out << "lambda = " << num(p.lambda) << "  (gamma " << c.cfg.gamma << ", n " << n << ", nx " << nx << ")\n";
    return 0;
}

int cmd_scaling(Context& c) {
    const auto ns = doubling_list(c.cfg.n_max, 16);
    if (ns.size() < 2) throw Error("cli", "scaling needs n_max >= 2");
    const int nx = std::max(c.cfg.nx, required_nx(c.cfg.gamma, ns.back()));
    const ScalingFit fit = eigen_scaling_sweep(c.cfg.gamma, ns, make_grid(nx));
    const double p = 2.0 / (1.0 + c.cfg.gamma);
    auto csv = open_out(c.dir / "scaling.csv");
    csv << "n,lambda,lambda_over_power\n";
    for (const auto& [n, lam] : fit.samples) csv << n << ',' << num(lam) << ',' << num(lam / std::pow(n, p)) << '\n';
    write_json(c.dir / "scaling.json", json{{"gamma", c.cfg.gamma},
                                            {"nx", nx},
                                            {"exponent_hat", fit.exponent_hat},
                                            {"exponent_theory", p},
                                            {"c_lower_hat", fit.c_lower_hat},
                                            {"c_upper_hat", fit.c_upper_hat}});
    c.out << "exponent_hat = " << num(fit.exponent_hat) << "  (2/(1+gamma) = " << num(p) << ")\n";
    return 0;
}

int cmd_bounds(Context& c) {
    const double g = c.cfg.gamma;
    const auto ns = doubling_list(c.cfg.n_max, 4);
    struct Row {
        int n = 0, nx = 0;
        EigenPair pair;
        HatBound hat;
        RhoSample rho;
        ComparisonReport cmp;
    };
    std::vector<Row> rows(ns.size());
    for_each_index(static_cast<long>(ns.size()), Execution::parallel, [&](long j) {
        Row& r = rows[j];
        r.n = ns[j];
        r.nx = std::max(c.cfg.nx, required_nx(g, r.n));
        if (g >= 1.0) r.nx = std::max(r.nx, comparison_nx(r.n));
        const Grid1D grid = make_grid(r.nx);
        r.pair = ground_eigenpair(assemble_mode_operator(r.n, g, grid));
        r.hat = hat_bound(r.n, g);
        r.rho = rho_functional(r.pair, grid, c.cfg);
        if (g >= 1.0) r.cmp = comparison_check(r.pair, supersolution_params(r.pair), grid, c.cfg.a);
    });
    auto csv = open_out(c.dir / "bounds.csv");
    csv << "n,nx,lambda,hat_bound,log_rho,log_cost_lower,comparison_applicable,comparison_holds,derivative_check\n";
    bool hat_ok = true, cmp_ok = true;
    int n_star = 0;
    for (const Row& r : rows) {
        hat_ok = hat_ok && r.pair.lambda <= r.hat.bound;
        csv << r.n << ',' << r.nx << ',' << num(r.pair.lambda) << ',' << num(r.hat.bound) << ',' << num(r.rho.log_rho)
            << ',' << num(r.rho.log_cost_lower) << ',' << r.cmp.applicable << ',' << r.cmp.holds << ','
            << r.cmp.derivative_check << '\n';
        if (r.cmp.applicable && !(r.cmp.holds && r.cmp.derivative_check)) cmp_ok = false;
        if (r.cmp.applicable && n_star == 0) n_star = r.n;
    }
    json j{{"gamma", g}, {"a", c.cfg.a}, {"b", c.cfg.b}, {"T", c.cfg.T}, {"hat_bound_holds", hat_ok}};
    if (g >= 1.0) {
        j["n_star"] = n_star;
        j["comparison_holds"] = cmp_ok;
    }
    j["log_cost_lower_growth"] = rows.back().rho.log_cost_lower - rows.front().rho.log_cost_lower;
    write_json(c.dir / "bounds.json", j);
    c.out << "hat bound " << (hat_ok ? "holds" : "FAILS");
    if (g >= 1.0) c.out << "; comparison " << (cmp_ok ? "holds" : "FAILS") << " from n_* = " << n_star;
    c.out << '\n';
    return hat_ok && cmp_ok ? 0 : 2;
}

int cmd_observability(Context& c) {
    const auto ns = doubling_list(c.cfg.n_max, 1);
    const SweepReport sw = uniform_sweep(c.cfg, ns);
    write_sweep_csv((c.dir / "sweep.csv").string(), sw);
    bool conv = true;
    for (const auto& r : sw.reports) conv = conv && r.converged;
    write_json(c.dir / "observability.json", json{{"gamma", c.cfg.gamma},
                                                  {"T", c.cfg.T},
                                                  {"sup_cost", sw.sup_cost},
                                                  {"argmax_n", sw.argmax_n},
                                                  {"all_converged", conv}});
    c.out << "sup cost = " << num(sw.sup_cost) << " at n = " << sw.argmax_n << (conv ? "" : "  (not converged)")
          << '\n';
    return conv ? 0 : 2;
}

std::vector<int> crossover_list(int n_max) {
    std::vector<int> ns;
    for (int n = 32; n <= n_max; n += 16) ns.push_back(n);
    return ns;
}

// Resolves both the ground-state width and the tail decay (rate at most n pi) on the strip.
int strip_nx(double gamma, int n) { return std::max(required_nx(gamma, n), comparison_nx(n)); }

int cmd_crossover(Context& c) {
    const auto ns = crossover_list(c.cfg.n_max);
    if (ns.size() < 4) throw Error("cli", "crossover needs n_max >= 80");
    const int nx = std::max(c.cfg.nx, strip_nx(1.0, ns.back()));
    const CrossoverReport r = crossover_estimate(c.cfg, ns, make_grid(nx));
    auto csv = open_out(c.dir / "crossover.csv");
    csv << "n,log_mass_over_n\n";
    for (const auto& [n, v] : r.samples) csv << n << ',' << num(v) << '\n';
    write_json(c.dir / "crossover.json", json{{"gamma", r.gamma},
                                              {"a", r.a},
                                              {"nx", nx},
                                              {"t_hat", r.t_hat},
                                              {"t_asymptotic", r.t_asymptotic},
                                              {"slope_hat", r.slope_hat},
                                              {"lambda_ratio", r.lambda_ratio},
                                              {"slope_spread", r.slope_spread},
                                              {"flagged", r.flagged},
                                              {"interpretation", r.interpretation}});
    c.out << "t_hat = " << num(r.t_hat) << "  (a^2/2 = " << num(r.t_asymptotic) << ")\n" << r.interpretation << '\n';
    return r.flagged ? 2 : 0;
}

int cmd_control(Context& c) {
    const Grid1D grid = make_grid(c.cfg.nx);
    const auto f0 = random_initial_modes(grid, c.m.modes, c.m.seed);
    const ControlResult res = control_full(c.cfg, f0, c.m.epsilon);
    const TimeGrid tg = make_time_grid(c.cfg.T, c.cfg.nt);
    write_control_csv((c.dir / "control.csv").string(), res, grid, tg);
    json per = json::array();
    for (const auto& m : res.modes)
        per.push_back(json{{"n", m.n},
                           {"residual", m.residual},
                           {"control_energy", m.control_energy},
                           {"cg_iterations", m.cg_iters},
                           {"converged", m.converged}});
    write_json(c.dir / "control.json", json{{"gamma", c.cfg.gamma},
                                            {"T", c.cfg.T},
                                            {"epsilon", c.m.epsilon},
                                            {"seed", c.m.seed},
                                            {"total_residual", res.total_residual},
                                            {"total_energy", res.total_energy},
                                            {"per_mode", per}});
    c.out << "total residual = " << num(res.total_residual) << ", energy = " << num(res.total_energy)
          << (res.all_converged ? "" : "  (not converged)") << '\n';
    return res.all_converged ? 0 : 2;
}

int cmd_carleman(Context& c) {
    const int n = c.m.n > 0 ? c.m.n : 16;
    const Grid1D grid = make_grid(c.cfg.nx);
    const WeightProfile p = build_weight(c.cfg.gamma, c.cfg.a_prime, c.cfg.b_prime, grid);
    const CarlemanConstants k = extract_constants(p, c.cfg, n);
    const ModeOperator op = assemble_mode_operator(n, c.cfg.gamma, grid);
    const EigenPair pair = ground_eigenpair(op);
    const TimeGrid tg = make_time_grid(c.cfg.T, c.cfg.nt);
    const CarlemanCheckReport r = integrated_check(p, k, op, pair.v, c.cfg, tg);
    const CaccioppoliReport cc = caccioppoli_check(op, pair.v, c.cfg, tg);
    open_out(c.dir / "carleman.json") << carleman_report_json(p, k, r, cc) << '\n';
    auto csv = open_out(c.dir / "weight.csv");
    csv << "x,beta,beta1,beta2\n";
    for (std::size_t i = 0; i < p.x.size(); ++i)
        csv << num(p.x[i]) << ',' << num(p.beta[i]) << ',' << num(p.beta1[i]) << ',' << num(p.beta2[i]) << '\n';
    const bool ok = r.pointwise_pass && r.integrated_pass && cc.holds;
    c.out << "pointwise " << (r.pointwise_pass ? "pass" : "FAIL") << ", integrated "
          << (r.integrated_pass ? "pass" : "FAIL") << " (log margin " << num(r.log_margin) << "), Caccioppoli "
          << (cc.holds ? "pass" : "FAIL") << '\n';
    if (!r.failure.empty()) c.out << r.failure << '\n';
    return ok ? 0 : 2;
}

int cmd_trichotomy(Context& c) {
    const double T = c.cfg.T;
    const auto ns = doubling_list(c.cfg.n_max, 16);
    if (ns.size() < 2) throw Error("cli", "trichotomy needs n_max >= 32");
    auto csv = open_out(c.dir / "trichotomy.csv");
    csv << "gamma,T,n_first,n_last,log_cost_lower_first,log_cost_lower_last,log10_envelope_growth,verdict\n";
    json rows = json::array();
    double t_hat = 0.0;
    const auto cross = crossover_list(c.cfg.n_max);
    if (cross.size() >= 4) {
        ProblemConfig one = c.cfg;
        one.gamma = 1.0;
        t_hat = crossover_estimate(one, cross, make_grid(strip_nx(1.0, cross.back()))).t_hat;
    }
    c.out << "gamma  T       log10 growth of the lower bound  verdict\n";
    for (double g : {0.5, 1.0, 2.0}) {
        ProblemConfig cfg = c.cfg;
        cfg.gamma = g;
        const Grid1D grid = make_grid(strip_nx(g, ns.back()));
        const auto pairs = ground_eigenpairs(g, ns, grid);
        std::vector<double> lc;
        for (const auto& p : pairs) lc.push_back(rho_functional(p, grid, cfg).log_cost_lower);
        const double env = *std::max_element(lc.begin(), lc.end());
        const double growth = (env - lc.front()) / std::log(10.0);
        std::string verdict;
        if (g < 1.0) {
            verdict = growth <= 1.0 ? "bounded lower bound (observable for every T)" : "lower bound grows";
        } else if (g == 1.0) {
            if (t_hat > 0.0)
                verdict = T < t_hat ? "T below crossover: lower bound blows up" : "T above crossover: bounded";
            else
                verdict = growth >= 3.0 ? "lower bound blows up" : "bounded";
        } else {
            verdict = growth >= 3.0 ? "lower bound blows up (not observable)" : "growth below 10^3 over this n range";
        }
        csv << num(g) << ',' << num(T) << ',' << ns.front() << ',' << ns.back() << ',' << num(lc.front()) << ','
            << num(lc.back()) << ',' << num(growth) << ',' << verdict << '\n';
        rows.push_back(json{{"gamma", g},
                            {"n_first", ns.front()},
                            {"n_last", ns.back()},
                            {"log_cost_lower_first", lc.front()},
                            {"log_cost_lower_last", lc.back()},
                            {"log10_envelope_growth", growth},
                            {"verdict", verdict}});
        char line[200];
        std::snprintf(line, sizeof line, "%-6g %-7g %-32.4g %s\n", g, T, growth, verdict.c_str());
        c.out << line;
    }
    if (t_hat > 0.0) c.out << "gamma = 1 crossover estimate t_hat = " << num(t_hat) << " (brackets the minimal time, does not reproduce it)\n";
    write_json(c.dir / "trichotomy.json", json{{"T", T}, {"t_hat", t_hat}, {"rows", rows}});
    return 0;
}

}  // namespace

ConfigPairs parse_config_pairs(const std::string& text, const std::string& source) {
    ConfigPairs pairs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw Error("cli", where + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
            throw Error("cli", where + ": unknown key '" + key + "'");
        if (pairs.count(key)) throw Error("cli", where + ": duplicate key '" + key + "'");
        pairs[key] = value;
    }
    return pairs;
}

ProblemConfig config_from_pairs(const ConfigPairs& pairs) {
    ProblemConfig cfg;
    for (const auto& [k, v] : pairs) {
        if (k == "gamma") cfg.gamma = to_real(k, v);
        else if (k == "a") cfg.a = to_real(k, v);
        else if (k == "b") cfg.b = to_real(k, v);
        else if (k == "a_prime") cfg.a_prime = to_real(k, v);
        else if (k == "b_prime") cfg.b_prime = to_real(k, v);
        else if (k == "T") cfg.T = to_real(k, v);
        else if (k == "nx") cfg.nx = to_int(k, v);
        else if (k == "nt") cfg.nt = to_int(k, v);
        else if (k == "n_max") cfg.n_max = to_int(k, v);
        else throw Error("cli", "unknown key '" + k + "'");
    }
    const ProblemConfig trisected = ProblemConfig::with_default_strip(cfg);
    if (!pairs.count("a_prime")) cfg.a_prime = trisected.a_prime;
    if (!pairs.count("b_prime")) cfg.b_prime = trisected.b_prime;
    cfg.validate();
    return cfg;
}

ProblemConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli", "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_pairs(parse_config_pairs(ss.str(), path));
}

int run(const RunManifest& m, std::ostream& out, std::ostream& err) {
    try {
        if (std::find(kCommands.begin(), kCommands.end(), m.command) == kCommands.end())
            throw Error("cli", "unknown command '" + m.command + "'");
        ConfigPairs pairs;
        if (!m.config_path.empty()) {
            std::ifstream in(m.config_path);
            if (!in) throw Error("cli", "cannot read config file '" + m.config_path + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            pairs = parse_config_pairs(ss.str(), m.config_path);
        }
        for (const auto& [k, v] : m.overrides) {
            if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end())
                throw Error("cli", "unknown key '" + k + "'");
            pairs[k] = v;
        }
        if (m.modes < 1) throw Error("cli", "require modes >= 1");
        if (!(m.epsilon > 0.0)) throw Error("cli", "require epsilon > 0");
        int threads = m.threads;
        if (threads <= 0)
            if (const char* env = std::getenv("GRUSHIN_THREADS")) threads = to_int("GRUSHIN_THREADS", env);
        if (threads > 0) omp_set_num_threads(threads);

        Context c{m, config_from_pairs(pairs), m.output_dir, out};
        std::filesystem::create_directories(c.dir);
        if (m.command == "eigen") return cmd_eigen(c);
        if (m.command == "scaling") return cmd_scaling(c);
        if (m.command == "bounds") return cmd_bounds(c);
        if (m.command == "observability") return cmd_observability(c);
        if (m.command == "crossover") return cmd_crossover(c);
        if (m.command == "control") return cmd_control(c);
        if (m.command == "carleman") return cmd_carleman(c);
        return cmd_trichotomy(c);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Spectral control analysis of the Grushin equation"};
    RunManifest m;
    std::string threads_text;
    app.add_option("command", m.command, "eigen|scaling|bounds|observability|crossover|control|carleman|trichotomy")
        ->required();
    app.add_option("--config", m.config_path, "key=value config file");
    app.add_option("--output-dir", m.output_dir, "directory for CSV/JSON artifacts");
    app.add_option("--seed", m.seed, "seed for random initial data");
    app.add_option("--threads", m.threads, "worker threads (fallback: GRUSHIN_THREADS)");
    app.add_option("--n", m.n, "mode index for eigen and carleman");
    app.add_option("--modes", m.modes, "number of y-modes for control");
    app.add_option("--epsilon", m.epsilon, "HUM penalty for control");
    std::map<std::string, std::string> given;
    for (const auto& key : kKeys) {
        std::string flag = "--" + key;
        std::replace(flag.begin() + 2, flag.end(), '_', '-');
        app.add_option(flag, given[key], "override config key " + key);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    for (const auto& key : kKeys) {
        std::string flag = "--" + key;
        std::replace(flag.begin() + 2, flag.end(), '_', '-');
        if (app.count(flag) > 0) m.overrides[key] = given[key];
    }
    return run(m, std::cout, std::cerr);
}

}  // namespace grushin
