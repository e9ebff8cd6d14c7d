#include "m2spec/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "m2spec/config.hpp"
#include "m2spec/error.hpp"
#include "m2spec/field_io.hpp"

namespace m2spec {

namespace {

using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::size_t default_workers() {
    if (const char* env = std::getenv("M2SPEC_WORKERS")) {
        std::size_t v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && ptr == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

json plan_json(const ExperimentConfig& cfg) {
    json plan = json::array();
    const auto ests = cfg.resolved_estimators();
    for (const std::size_t big_n : cfg.n_list) {
        json row{{"N", big_n}};
        json per = json::array();
        for (const auto& e : ests) {
            json item{{"label", e.label}, {"method", e.method}};
            if (e.is_truncated()) {
                const auto r = policy_eval(e.policy(), big_n);
                item["n"] = r.n;
                item["consistent"] = r.consistent;
            }
            per.push_back(item);
        }
        row["estimators"] = per;
        plan.push_back(row);
    }
    return plan;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

struct RunOptions {
    std::string config;
    std::size_t workers = 0;
    bool dry_run = false;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    json raw;
    ExperimentConfig cfg;
    try {
        raw = read_json_file(opt.config);
        cfg = parse_config(raw);
        if (opt.seed) cfg.base_seed = *opt.seed;
        if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    }
    const std::size_t workers = opt.workers ? opt.workers : default_workers();
    const json plan = plan_json(cfg);
    if (opt.dry_run) {
        out << "experiment " << to_string(cfg.experiment) << ", " << cfg.trials << " trials, base_seed "
            << cfg.base_seed << ", grid " << cfg.resolved_grid_points() << " per dimension\n";
        for (const auto& row : plan) {
            out << "N=" << row["N"].get<std::size_t>() << ':';
            for (const auto& e : row["estimators"]) {
                out << ' ' << e["label"].get<std::string>();
                if (e.contains("n"))
                    out << " n=" << e["n"].get<std::size_t>() << (e["consistent"].get<bool>() ? " (consistent)" : " (not consistent)");
                else
                    out << " (" << e["method"].get<std::string>() << ')';
                out << ';';
            }
            out << '\n';
        }
        return exit_ok;
    }

    const auto start = std::chrono::steady_clock::now();
    SweepResult result;
    std::vector<std::filesystem::path> files;
    try {
        result = run_sweep(cfg, workers);
        files = write_sweep(cfg.output_dir, result);
    } catch (const Error& e) {
        err << "experiment '" << to_string(cfg.experiment) << "' failed: " << e.what() << '\n';
        return exit_failure;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest{{"version", M2SPEC_VERSION},
                  {"experiment", to_string(cfg.experiment)},
                  {"config", raw},
                  {"config_hash", hex64(fnv1a64(raw.dump()))},
                  {"base_seed", cfg.base_seed},
                  {"workers", workers},
                  {"wall_time_seconds", wall},
                  {"plan", plan},
                  {"sweep_failed", result.failed}};
    json outputs = json::array();
    for (const auto& f : files) outputs.push_back(f.filename().string());
    manifest["outputs"] = outputs;
    try {
        write_text(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const Error& e) {
        err << e.what() << '\n';
        return exit_failure;
    }

    for (const auto& a : result.aggregates)
        out << a.metric << " N=" << a.sample_size << " mean=" << format_double(a.mean) << " ok=" << a.n_success
            << '/' << cfg.trials << '\n';
    if (result.failed) {
        err << "sweep failed: more than half of the trials failed for some metric and N\n";
        return exit_failure;
    }
    return exit_ok;
}

struct EstimateOptions {
    std::string input;
    std::string policy = "cube-root";
    std::string kind = "biased";
    std::size_t grid = 0;
    std::string out_dir = ".";
};

int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err) {
    EstimatorKind kind;
    TruncationPolicy policy;
    if (opt.kind == "biased")
        kind = EstimatorKind::biased;
    else if (opt.kind == "unbiased")
        kind = EstimatorKind::unbiased;
    else {
        err << "--kind must be biased or unbiased\n";
        return exit_usage;
    }
    try {
        policy = TruncationPolicy::parse(opt.policy);
    } catch (const Error& e) {
        err << "--policy: " << e.what() << '\n';
        return exit_usage;
    }
    try {
        const FieldSample field = load_field_csv(opt.input);
        const BlockShape& shape = field.shape();
        if (!shape.hypercubic()) throw InvalidParameter("estimate needs a hypercubic block");
        const std::size_t big_n = shape.extent(0);
        const auto r = policy_eval(policy, big_n);
        const std::size_t g = opt.grid ? opt.grid : (shape.dim() == 1 ? 512 : 64);
        const FrequencyGrid grid(shape.dim(), g);
        const auto spec = periodogram(sample_autocov(field, r.n, kind), grid);
        const std::filesystem::path dir = opt.out_dir;
        std::ostringstream csv;
        write_spectrum_csv(csv, spec);
        write_text(dir / "spectrum.csv", csv.str());
        json manifest{{"version", M2SPEC_VERSION},
                      {"input", opt.input},
                      {"N", big_n},
                      {"d", shape.dim()},
                      {"m", field.channels()},
                      {"policy", policy.describe()},
                      {"n", r.n},
                      {"consistent", r.consistent},
                      {"covariance", to_string(kind)},
                      {"grid", g},
                      {"min_eigenvalue", min_eigenvalue(spec)}};
        write_text(dir / "manifest.json", manifest.dump(2) + "\n");
        out << "N=" << big_n << " n=" << r.n << " wrote " << (dir / "spectrum.csv").string() << '\n';
    } catch (const Error& e) {
        err << "estimate failed: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_ok;
}

struct SimulateOptions {
    std::string config;
    std::size_t length = 0;
    std::optional<std::uint64_t> seed;
    std::string out = "field.csv";
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(opt.config);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    }
    const std::size_t big_n = opt.length ? opt.length : cfg.n_list.front();
    const std::uint64_t seed = opt.seed.value_or(cfg.base_seed);
    try {
        FieldSample field;
        switch (cfg.experiment) {
            case Experiment::consistency:
                field = gen_ma_field(cfg.kernel, BlockShape::cube(big_n, cfg.kernel.dim()), cfg.noise, seed);
                break;
            case Experiment::graph: field = gen_graphical_field(cfg.graph_model, big_n, seed, cfg.burn_in); break;
            case Experiment::radar: field = gen_radar_field(cfg.radar, big_n, seed); break;
            case Experiment::etfe: {
                const auto data = gen_etfe_dataset(runge_impulse(cfg.impulse_taps), cfg.input_filter, big_n,
                                                   cfg.noise_ratio, seed);
                std::vector<double> z(2 * big_n);
                for (std::size_t t = 0; t < big_n; ++t) {
                    z[2 * t] = data.y[t];
                    z[2 * t + 1] = data.u[t];
                }
                field = FieldSample(BlockShape({big_n}), 2, std::move(z));
                break;
            }
        }
        const std::filesystem::path path = opt.out;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        save_field_csv(opt.out, field);
        out << "wrote " << opt.out << '\n';
    } catch (const Error& e) {
        err << "simulate failed: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_ok;
}

int cmd_policy_check(const std::string& policy_text, const std::vector<std::size_t>& sizes, std::ostream& out,
                     std::ostream& err) {
    try {
        const auto policy = TruncationPolicy::parse(policy_text);
        out << "N,n,consistent\n";
        for (const std::size_t big_n : sizes) {
            const auto r = policy_eval(policy, big_n);
            out << big_n << ',' << r.n << ',' << (r.consistent ? "true" : "false") << '\n';
        }
    } catch (const Error& e) {
        err << "policy-check: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Truncated-periodogram spectral estimation toolkit", "m2spec"};
    app.require_subcommand(1);
    app.set_version_flag("--version", M2SPEC_VERSION);

    RunOptions run_opt;
    std::uint64_t run_seed = 0;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo sweep from a JSON config");
    run->add_option("--config", run_opt.config, "Experiment config (JSON)")->required();
    run->add_option("--workers", run_opt.workers, "Worker threads (default: $M2SPEC_WORKERS or all cores)");
    run->add_flag("--dry-run", run_opt.dry_run, "Validate and print the plan without writing anything");
    run->add_option("--out", run_opt.out_dir, "Output directory (overrides output_dir)");
    auto* seed_opt = run->add_option("--seed", run_seed, "Base seed (overrides base_seed)");

    EstimateOptions est_opt;
    auto* est = app.add_subcommand("estimate", "Truncated periodogram of a stored field");
    est->add_option("--input", est_opt.input, "FieldSample CSV")->required();
    est->add_option("--policy", est_opt.policy, "cube-root | fourth-root | power:a,b | linear:c | const:n");
    est->add_option("--kind", est_opt.kind, "biased | unbiased");
    est->add_option("--grid", est_opt.grid, "Grid points per dimension (default 512 for d=1, else 64)");
    est->add_option("--out", est_opt.out_dir, "Output directory");

    SimulateOptions sim_opt;
    std::uint64_t sim_seed = 0;
    auto* sim = app.add_subcommand("simulate", "Emit one realization of a config's model as a FieldSample CSV");
    sim->add_option("--config", sim_opt.config, "Experiment config (JSON)")->required();
    sim->add_option("--N", sim_opt.length, "Sample size per dimension (default: first of N_list)");
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Seed (default: base_seed)");
    sim->add_option("--out", sim_opt.out, "Output CSV path");

    std::string policy_text = "cube-root";
    std::vector<std::size_t> sizes;
    auto* pc = app.add_subcommand("policy-check", "Print n = f(N) and the consistency verdict");
    pc->add_option("--policy", policy_text, "Truncation policy");
    pc->add_option("--N", sizes, "Sample sizes")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << M2SPEC_VERSION << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return exit_usage;
    }

    if (*run) {
        if (*seed_opt) run_opt.seed = run_seed;
        return cmd_run(run_opt, out, err);
    }
    if (*est) return cmd_estimate(est_opt, out, err);
    if (*sim) {
        if (*sim_seed_opt) sim_opt.seed = sim_seed;
        return cmd_simulate(sim_opt, out, err);
    }
    if (*pc) return cmd_policy_check(policy_text, sizes, out, err);
    return exit_usage;
}

}  // namespace m2spec
