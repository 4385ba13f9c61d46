#include "deflab/cdefinetti.hpp"
#include "deflab/gibbs.hpp"
#include "deflab/hartree.hpp"
#include "deflab/io.hpp"
#include "deflab/localization.hpp"
#include "deflab/loggas.hpp"
#include "deflab/parallel.hpp"
#include "deflab/qdefinetti.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef DEFLAB_VERSION
#define DEFLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace deflab;

namespace {

// configuration problems, exit 2
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return os.str();
}

// Schema: required keys, and optional keys with their defaults.
struct Schema {
    std::vector<std::string> required;
    json defaults = json::object();
};

json resolve(const json& config, const Schema& schema, const std::string& command)
{
    if (!config.is_object()) {
        throw ConfigError(command + ": configuration must be a JSON object");
    }
    std::set<std::string> known(schema.required.begin(), schema.required.end());
    for (const auto& [k, v] : schema.defaults.items()) {
        known.insert(k);
    }
    known.insert("threads");
    std::vector<std::string> unknown, missing;
    for (const auto& [k, v] : config.items()) {
        if (!known.count(k)) {
            unknown.push_back(k);
        }
    }
    for (const auto& k : schema.required) {
        if (!config.contains(k)) {
            missing.push_back(k);
        }
    }
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) {
            s += (s.empty() ? "'" : ", '") + x + "'";
        }
        return s;
    };
    if (!unknown.empty()) {
        throw ConfigError(command + ": unknown configuration keys: " + join(unknown));
    }
    if (!missing.empty()) {
        throw ConfigError(command + ": missing required configuration keys: " + join(missing));
    }
    json out = schema.defaults;
    for (const auto& [k, v] : config.items()) {
        out[k] = v;
    }
    return out;
}

int get_int(const json& cfg, const std::string& key, int min_value)
{
    const json& v = cfg.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError("config field '" + key + "': expected an integer");
    }
    const int x = v.get<int>();
    if (x < min_value) {
        throw ConfigError("config field '" + key + "': must be at least " + std::to_string(min_value) + ", got "
                          + std::to_string(x));
    }
    return x;
}

double get_double(const json& cfg, const std::string& key)
{
    const json& v = cfg.at(key);
    if (!v.is_number()) {
        throw ConfigError("config field '" + key + "': expected a number");
    }
    return v.get<double>();
}

// an integer or an array of integers
std::vector<int> get_int_list(const json& cfg, const std::string& key, int min_value)
{
    const json& v = cfg.at(key);
    std::vector<int> out;
    auto take = [&](const json& x) {
        if (!x.is_number_integer()) {
            throw ConfigError("config field '" + key + "': expected integers");
        }
        const int i = x.get<int>();
        if (i < min_value) {
            throw ConfigError("config field '" + key + "': entries must be at least " + std::to_string(min_value)
                              + ", got " + std::to_string(i));
        }
        out.push_back(i);
    };
    if (v.is_array()) {
        for (const auto& x : v) {
            take(x);
        }
    } else {
        take(v);
    }
    if (out.empty()) {
        throw ConfigError("config field '" + key + "': must not be empty");
    }
    return out;
}

Matrix get_matrix(const json& cfg, const std::string& key, Eigen::Index rows)
{
    Matrix m;
    try {
        m = matrix_from_json(cfg.at(key));
    } catch (const std::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
    if (m.rows() != rows || m.cols() != rows) {
        throw ConfigError("config field '" + key + "': expected a " + std::to_string(rows) + "x"
                          + std::to_string(rows) + " matrix");
    }
    return m;
}

struct Outputs {
    fs::path dir;
    std::vector<std::pair<std::string, std::string>> files;  // name, sha256

    void write(const std::string& name, const std::string& contents)
    {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
        f << contents;
        files.emplace_back(name, sha256_hex(contents));
    }
};

struct RunResult {
    bool violated = false;
    std::string note;
};

std::string fmt(double x) { return format_double(x); }

RunResult run_definetti_gap(const json& cfg, Outputs& out)
{
    const int d = get_int(cfg, "d", 1);
    const auto Ns = get_int_list(cfg, "N", 1);
    const auto seeds = get_int_list(cfg, "seeds", 0);
    const auto ns = get_int_list(cfg, "n", 1);
    const int rank = get_int(cfg, "rank", 0);

    struct Task {
        int N, seed;
    };
    std::vector<Task> tasks;
    for (int N : Ns) {
        for (int s : seeds) {
            tasks.push_back({N, s});
        }
    }
    const auto rows = parallel_map(tasks.size(), [&](std::size_t i) {
        const SymSector sector(d, tasks[i].N);
        const int r = rank == 0 ? static_cast<int>(sector.dim()) : std::min<int>(rank, sector.dim());
        const DensityOp state = random_density(static_cast<std::uint64_t>(tasks[i].seed), sector, r);
        std::vector<std::pair<int, DeFinettiGap>> gaps;
        for (int n : ns) {
            if (n <= tasks[i].N) {
                gaps.emplace_back(n, definetti_gap(state, n));
            }
        }
        return gaps;
    });

    std::ostringstream csv;
    csv << "d,N,n,seed,distance,bound,bound_sharp,violated\n";
    int violations = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (const auto& [n, g] : rows[i]) {
            csv << d << ',' << tasks[i].N << ',' << n << ',' << tasks[i].seed << ',' << fmt(g.distance) << ','
                << fmt(g.bound) << ',' << fmt(g.bound_sharp) << ',' << (g.violated ? 1 : 0) << '\n';
            violations += g.violated;
            worst = std::max(worst, g.distance / g.bound);
        }
    }
    out.write("definetti_gap.csv", csv.str());
    out.write("summary.json", json{{"violations", violations}, {"max_distance_over_bound", worst}}.dump(2) + "\n");
    return {violations > 0, std::to_string(violations) + " violations"};
}

RunResult run_df_classical(const json& cfg, Outputs& out)
{
    const int K = get_int(cfg, "K", 1);
    const auto Ns = get_int_list(cfg, "N", 1);
    const auto seeds = get_int_list(cfg, "seeds", 0);
    const auto ns = get_int_list(cfg, "n", 1);

    struct Task {
        int N, seed;
    };
    std::vector<Task> tasks;
    for (int N : Ns) {
        for (int s : seeds) {
            tasks.push_back({N, s});
        }
    }
    struct Row {
        DfIdentityReport identities;
        std::vector<std::pair<int, DfBoundRow>> bounds;
    };
    const auto rows = parallel_map(tasks.size(), [&](std::size_t i) {
        const SymMeasure mu = random_sym_measure(K, tasks[i].N, static_cast<std::uint64_t>(tasks[i].seed));
        const SymMeasure df = df_state(mu);
        Row row{df_marginal_identities(mu), {}};
        for (int n : ns) {
            if (n <= tasks[i].N) {
                row.bounds.emplace_back(n, df_bounds(mu, df, n));
            }
        }
        return row;
    });

    std::ostringstream csv;
    csv << "K,N,n,seed,tv,bound,refined_bound,first_residual,second_residual,min_remainder\n";
    int violations = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Row& r = rows[i];
        violations += !r.identities.passed;
        for (const auto& [n, b] : r.bounds) {
            csv << K << ',' << tasks[i].N << ',' << n << ',' << tasks[i].seed << ',' << fmt(b.tv) << ','
                << fmt(b.bound) << ',' << fmt(b.refined_bound) << ',' << fmt(r.identities.first_residual) << ','
                << fmt(r.identities.second_residual) << ',' << fmt(r.identities.min_remainder) << '\n';
            violations += b.tv > b.bound + 1e-12;
        }
    }
    out.write("df_classical.csv", csv.str());
    out.write("summary.json", json{{"violations", violations}}.dump(2) + "\n");
    return {violations > 0, std::to_string(violations) + " violations"};
}

HartreeProblem problem_from(const json& cfg)
{
    const int d = get_int(cfg, "d", 1);
    const Matrix h = get_matrix(cfg, "h", d);
    const auto d2 = static_cast<Eigen::Index>(sector_dimension(d, 2));
    const Matrix w = cfg.at("w").is_null() ? Matrix::Zero(d2, d2) : get_matrix(cfg, "w", d2);
    try {
        return make_hartree_problem(h, w);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config fields 'h'/'w': ") + e.what());
    }
}

RunResult run_hartree_sweep(const json& cfg, Outputs& out)
{
    const HartreeProblem p = problem_from(cfg);
    const auto Ns = get_int_list(cfg, "N", 1);
    HartreeOptions opts;
    opts.restarts = get_int(cfg, "restarts", 1);
    const SweepResult r = convergence_sweep(p, Ns, opts);
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    out.write("hartree_sweep.csv", csv.str());
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"N", row.N}, {"E", row.E}, {"gap", row.gap}, {"rdm_distance", row.rdm_distance}});
    }
    const json summary{{"problem", to_json(p)},
                       {"e_H", r.rows.empty() ? 0.0 : r.rows.front().eH},
                       {"fit_C", r.fit_C},
                       {"fit_residual", r.fit_residual},
                       {"upper_bound_violations", r.upper_bound_violations},
                       {"monotonicity_violations", r.monotonicity_violations},
                       {"rows", rows}};
    out.write("summary.json", summary.dump(2) + "\n");
    const int v = r.upper_bound_violations + r.monotonicity_violations;
    return {v > 0, std::to_string(v) + " violations"};
}

RunResult run_gibbs_sweep(const json& cfg, Outputs& out)
{
    const HartreeProblem p = problem_from(cfg);
    const auto Ns = get_int_list(cfg, "N", 1);
    const double t = get_double(cfg, "t");
    if (!(t > 0.0)) {
        throw ConfigError("config field 't': must be positive");
    }
    MonteCarloOptions mc;
    mc.samples = static_cast<std::size_t>(get_int(cfg, "samples", 1000));
    mc.seed = static_cast<std::uint64_t>(get_int(cfg, "seed", 0));
    const GapSweep sweep = gap_sweep(p, t, Ns, mc);

    // the Gibbs state of the classical symbol must satisfy the upper-symbol inequality
    int violations = 0;
    json bl = json::array();
    if (p.modes() <= 3) {
        for (int N : Ns) {
            const BerezinLiebResult r = berezin_lieb_second(classical_gibbs_symbol(p, t, N), N);
            violations += !r.passed;
            bl.push_back({{"N", N}, {"slack", r.slack}, {"passed", r.passed}});
        }
    }
    std::ostringstream csv;
    write_gap_csv(csv, sweep);
    out.write("gibbs_sweep.csv", csv.str());
    json summary = to_json(sweep);
    summary["berezin_lieb_second"] = bl;
    out.write("summary.json", summary.dump(2) + "\n");
    return {violations > 0, std::to_string(violations) + " Berezin-Lieb failures"};
}

RunResult run_localize_check(const json& cfg, Outputs& out)
{
    const int d = get_int(cfg, "d", 1);
    const int N = get_int(cfg, "N", 1);
    const int rank = get_int(cfg, "rank", 0);
    if (rank > d) {
        throw ConfigError("config field 'rank': must not exceed d");
    }
    const auto seeds = get_int_list(cfg, "seeds", 0);
    const auto ns = get_int_list(cfg, "n", 1);

    struct Row {
        double duality = 0.0, consistency = 0.0, trace = 0.0;
    };
    const auto rows = parallel_map(seeds.size(), [&](std::size_t i) {
        const SymSector sector(d, N);
        const auto seed = static_cast<std::uint64_t>(seeds[i]);
        const DensityOp state = random_density(seed, sector, static_cast<int>(sector.dim()));
        std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
        std::normal_distribution<double> g(0.0, 1.0);
        Matrix a(d, d);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                const double re = g(rng);
                a(r, c) = Complex(re, g(rng));
            }
        }
        Eigen::HouseholderQR<Matrix> qr(a);
        const Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
        const Projector P = Projector::onto(Q.leftCols(rank));
        Row row;
        row.duality = check_duality(state, P);
        for (int n : ns) {
            if (n <= N) {
                row.consistency = std::max(row.consistency, check_consistency(state, P, n));
            }
        }
        row.trace = localize(state, P).total_trace();
        return row;
    });

    std::ostringstream csv;
    csv << "d,N,rank,seed,duality,consistency,total_trace\n";
    int violations = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const Row& r = rows[i];
        csv << d << ',' << N << ',' << rank << ',' << seeds[i] << ',' << fmt(r.duality) << ',' << fmt(r.consistency)
            << ',' << fmt(r.trace) << '\n';
        violations += r.duality >= 1e-12 || r.consistency >= 1e-10;
    }
    out.write("localize_check.csv", csv.str());
    out.write("summary.json", json{{"violations", violations}}.dump(2) + "\n");
    return {violations > 0, std::to_string(violations) + " violations"};
}

RunResult run_loggas(const json& cfg, Outputs& out)
{
    json gas = json::object();
    for (const char* k : {"N", "beta", "coupling", "v_coeff", "v_power", "alpha", "grid", "grid_radius"}) {
        gas[k] = cfg.at(k);
    }
    LogGasConfig c;
    try {
        c = loggas_config_from_json(gas);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    MetropolisOptions mc;
    mc.burn_in = static_cast<std::size_t>(get_int(cfg, "burn_in", 0));
    mc.sweeps = static_cast<std::size_t>(get_int(cfg, "sweeps", 1));
    mc.thin = static_cast<std::size_t>(get_int(cfg, "thin", 1));
    mc.seed = static_cast<std::uint64_t>(get_int(cfg, "seed", 0));
    if (mc.sweeps < mc.burn_in) {
        throw ConfigError("config field 'sweeps': must be at least 'burn_in'");
    }
    const int chains = get_int(cfg, "chains", 2);
    const int lambda_points = get_int(cfg, "lambda_points", 2);

    const auto runs = metropolis_chains(c, mc, chains);
    const MeanFieldResult mf = mf_minimize(c);
    std::vector<std::vector<double>> series;
    json chain_json = json::array();
    for (const auto& r : runs) {
        series.push_back(r.mean_sq_radius);
        const MonteCarloEstimate m = batch_mean(r.mean_sq_radius);
        chain_json.push_back({{"acceptance", r.acceptance},
                              {"step", r.step},
                              {"acceptance_warning", r.acceptance_warning},
                              {"mean_sq_radius", m.mean},
                              {"mean_sq_radius_error", m.std_error}});
    }
    const RadialComparison w1 = compare_radial(runs.front(), mf.density);
    json summary{{"config", to_json(c)},
                 {"chains", chain_json},
                 {"e_MF", mf.e_MF},
                 {"alpha", mf.alpha},
                 {"kernel_min_eigenvalue", mf.kernel_min_eigenvalue},
                 {"w1", w1.w1},
                 {"w1_error", w1.error}};
    if (chains >= 2) {
        summary["gelman_rubin"] = gelman_rubin(series);
    }
    const FreeEnergyEstimate fe = free_energy_estimate(c, uniform_lambda_grid(lambda_points), mc);
    summary["free_energy"] = {{"F_N", fe.F_N},
                              {"error", fe.error},
                              {"per_particle", fe.per_particle},
                              {"per_particle_error", fe.per_particle_error},
                              {"reference", fe.reference},
                              {"offset_from_e_MF", fe.per_particle - mf.e_MF}};

    std::ostringstream csv;
    write_chain_csv(csv, runs.front());
    out.write("loggas_chain.csv", csv.str());
    std::ostringstream dens;
    dens << "r,weight\n";
    for (std::size_t i = 0; i < mf.density.radii.size(); ++i) {
        dens << fmt(mf.density.radii[i]) << ',' << fmt(mf.density.weights[i]) << '\n';
    }
    out.write("loggas_mf_density.csv", dens.str());
    out.write("summary.json", summary.dump(2) + "\n");
    return {false, ""};
}

const std::map<std::string, Schema>& schemas()
{
    static const std::map<std::string, Schema> s{
        {"definetti-gap", {{"d", "N", "seeds"}, {{"n", json::array({1})}, {"rank", 0}}}},
        {"df-classical", {{"K", "N", "seeds"}, {{"n", json::array({1, 2})}}}},
        {"hartree-sweep", {{"d", "h", "N"}, {{"w", nullptr}, {"restarts", 16}}}},
        {"gibbs-sweep", {{"d", "h", "N", "t"}, {{"w", nullptr}, {"samples", 200000}, {"seed", 0}}}},
        {"localize-check", {{"d", "N", "seeds"}, {{"n", json::array({1})}, {"rank", 1}}}},
        {"loggas",
         {{"N"},
          {{"beta", 1.0},
           {"coupling", 1.0},
           {"v_coeff", 1.0},
           {"v_power", 2.0},
           {"alpha", 0.0},
           {"grid", 256},
           {"grid_radius", 2.0},
           {"burn_in", 10000},
           {"sweeps", 50000},
           {"thin", 10},
           {"seed", 0},
           {"chains", 2},
           {"lambda_points", 11}}}},
    };
    return s;
}

struct RunArgs {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<int> n, seed, grid;
    std::optional<double> beta, alpha;
    std::optional<long long> steps;
};

int do_run(const RunArgs& a)
{
    const auto it = schemas().find(a.command);
    if (it == schemas().end()) {
        throw ConfigError("unknown command '" + a.command + "'");
    }
    json config = json::object();
    if (!a.config_path.empty()) {
        std::ifstream f(a.config_path);
        if (!f) {
            throw ConfigError("cannot read config " + a.config_path);
        }
        try {
            config = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    const bool has_flags = a.n || a.seed || a.grid || a.beta || a.alpha || a.steps;
    if (has_flags && a.command != "loggas") {
        throw ConfigError("flags --n, --beta, --steps, --seed, --grid, --alpha apply to 'loggas' only");
    }
    if (a.n) config["N"] = *a.n;
    if (a.beta) config["beta"] = *a.beta;
    if (a.steps) config["sweeps"] = *a.steps;
    if (a.seed) config["seed"] = *a.seed;
    if (a.grid) config["grid"] = *a.grid;
    if (a.alpha) config["alpha"] = *a.alpha;

    const json resolved = resolve(config, it->second, a.command);
    if (resolved.contains("threads") && !std::getenv("DEFLAB_THREADS")) {
        setenv("DEFLAB_THREADS", std::to_string(get_int(resolved, "threads", 1)).c_str(), 1);
    }

    Outputs out{fs::path(a.out_dir), {}};
    std::error_code ec;
    fs::create_directories(out.dir, ec);
    if (!fs::is_directory(out.dir)) {
        throw ConfigError("output directory " + a.out_dir + " is not writable");
    }

    const std::string started = utc_now();
    RunResult result;
    try {
        if (a.command == "definetti-gap") result = run_definetti_gap(resolved, out);
        else if (a.command == "df-classical") result = run_df_classical(resolved, out);
        else if (a.command == "hartree-sweep") result = run_hartree_sweep(resolved, out);
        else if (a.command == "gibbs-sweep") result = run_gibbs_sweep(resolved, out);
        else if (a.command == "localize-check") result = run_localize_check(resolved, out);
        else result = run_loggas(resolved, out);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
    }

    json files = json::array();
    for (const auto& [name, digest] : out.files) {
        files.push_back({{"file", name}, {"sha256", digest}});
    }
    const json manifest{{"command", a.command},
                        {"config", resolved},
                        {"seed", resolved.contains("seed") ? resolved["seed"] : (resolved.contains("seeds") ? resolved["seeds"] : json())},
                        {"version", DEFLAB_VERSION},
                        {"started", started},
                        {"finished", utc_now()},
                        {"exit_status", result.violated ? 1 : 0},
                        {"outputs", files}};
    std::ofstream(out.dir / "manifest.json") << manifest.dump(2) << '\n';
    if (result.violated) {
        std::cerr << a.command << ": bound violated: " << result.note << '\n';
        return 1;
    }
    return 0;
}

// plotdata ------------------------------------------------------------------

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

struct PlotArgs {
    std::string input;
    std::string output;
    std::vector<std::string> select;
    std::vector<std::string> group_by;
    std::vector<std::string> mean;
};

int do_plotdata(const PlotArgs& a)
{
    std::ifstream in(a.input);
    if (!in) {
        throw ConfigError("cannot read " + a.input);
    }
    std::string header_line;
    std::vector<std::string> header;
    if (std::getline(in, header_line)) {
        header = split(header_line, ',');
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        index[header[i]] = i;
    }
    auto col = [&](const std::string& name) {
        if (header.empty()) {
            return std::size_t{0};  // no rows to read
        }
        const auto it = index.find(name);
        if (it == index.end()) {
            throw ConfigError("plotdata: unknown column '" + name + "'");
        }
        return it->second;
    };
    if (!a.mean.empty() && !a.select.empty()) {
        throw ConfigError("plotdata: use either --select or --group-by/--mean");
    }
    if (!a.mean.empty() && a.group_by.empty()) {
        throw ConfigError("plotdata: --mean needs --group-by");
    }

    std::ostringstream os;
    if (a.mean.empty()) {
        const std::vector<std::string> cols = a.select.empty() ? header : a.select;
        std::vector<std::size_t> idx;
        for (const auto& c : cols) {
            idx.push_back(col(c));
        }
        for (std::size_t i = 0; i < cols.size(); ++i) {
            os << (i ? "," : "") << cols[i];
        }
        os << '\n';
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const auto cells = split(line, ',');
            for (std::size_t i = 0; i < idx.size(); ++i) {
                os << (i ? "," : "") << cells.at(idx[i]);
            }
            os << '\n';
        }
    } else {
        std::vector<std::size_t> gidx, midx;
        for (const auto& c : a.group_by) {
            gidx.push_back(col(c));
        }
        for (const auto& c : a.mean) {
            midx.push_back(col(c));
        }
        // groups in order of first appearance
        std::vector<std::vector<std::string>> keys;
        std::map<std::vector<std::string>, std::pair<std::vector<double>, std::size_t>> acc;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const auto cells = split(line, ',');
            std::vector<std::string> key;
            for (auto i : gidx) {
                key.push_back(cells.at(i));
            }
            auto [slot, inserted] = acc.try_emplace(key, std::vector<double>(midx.size(), 0.0), 0);
            if (inserted) {
                keys.push_back(key);
            }
            for (std::size_t j = 0; j < midx.size(); ++j) {
                try {
                    slot->second.first[j] += std::stod(cells.at(midx[j]));
                } catch (const std::invalid_argument&) {
                    throw ConfigError("plotdata: column '" + a.mean[j] + "' is not numeric");
                }
            }
            ++slot->second.second;
        }
        std::vector<std::string> cols = a.group_by;
        for (const auto& m : a.mean) {
            cols.push_back("mean_" + m);
        }
        cols.push_back("count");
        for (std::size_t i = 0; i < cols.size(); ++i) {
            os << (i ? "," : "") << cols[i];
        }
        os << '\n';
        for (const auto& key : keys) {
            const auto& [sums, count] = acc.at(key);
            for (std::size_t i = 0; i < key.size(); ++i) {
                os << (i ? "," : "") << key[i];
            }
            for (double s : sums) {
                os << ',' << format_double(s / count);
            }
            os << ',' << count << '\n';
        }
    }
    if (a.output.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(a.output, std::ios::binary);
        if (!f) {
            throw ConfigError("cannot write " + a.output);
        }
        f << os.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"deflab: de Finetti and mean-field numerical laboratory"};
    app.set_version_flag("--version", DEFLAB_VERSION);
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write results plus a manifest");
    run_cmd->add_option("command", run.command,
                        "definetti-gap | df-classical | hartree-sweep | gibbs-sweep | localize-check | loggas")
        ->required();
    run_cmd->add_option("--config", run.config_path, "JSON configuration");
    run_cmd->add_option("--out", run.out_dir, "Output directory");
    run_cmd->add_option("--n", run.n, "loggas: particle number");
    run_cmd->add_option("--beta", run.beta, "loggas: inverse temperature");
    run_cmd->add_option("--steps", run.steps, "loggas: recorded sweeps");
    run_cmd->add_option("--seed", run.seed, "loggas: seed");
    run_cmd->add_option("--grid", run.grid, "loggas: radial grid points");
    run_cmd->add_option("--alpha", run.alpha, "loggas: kernel regularization radius");

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plotdata", "Select or aggregate columns of a results CSV");
    plot_cmd->add_option("input", plot.input, "Results CSV")->required();
    plot_cmd->add_option("--out", plot.output, "Output CSV (default stdout)");
    plot_cmd->add_option("--select", plot.select, "Columns to keep")->delimiter(',');
    plot_cmd->add_option("--group-by", plot.group_by, "Grouping columns")->delimiter(',');
    plot_cmd->add_option("--mean", plot.mean, "Columns averaged within groups")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) {
            return do_run(run);
        }
        return do_plotdata(plot);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
