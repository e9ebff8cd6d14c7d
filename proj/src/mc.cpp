#include "m2spec/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "m2spec/error.hpp"
#include "m2spec/field_io.hpp"
#include "m2spec/rng.hpp"

namespace m2spec {

// ---------------------------------------------------------------- metrics

double metric_impulse_error(std::span<const double> g_true, std::span<const double> g_hat, std::size_t horizon) {
    if (g_true.size() <= horizon || g_hat.size() <= horizon)
        throw DimensionMismatch("impulse responses must cover t = 0.." + std::to_string(horizon));
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t <= horizon; ++t) {
        const double diff = g_true[t] - g_hat[t];
        num += diff * diff;
        den += g_true[t] * g_true[t];
    }
    if (den == 0.0) throw ZeroDenominator("true impulse response vanishes on the error window");
    return std::sqrt(num / den);
}

namespace {

void require_same_layout(const SpectrumGrid& a, const SpectrumGrid& b) {
    if (!(a.grid() == b.grid())) throw GridMismatch("spectra live on different grids");
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("spectra have different shapes");
}

double frobenius_sq(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& x : v) s += std::norm(x);
    return s;
}

}  // namespace

double metric_spectrum_error(const SpectrumGrid& exact, const SpectrumGrid& est) {
    require_same_layout(exact, est);
    const std::size_t block = exact.rows() * exact.cols();
    std::vector<cplx> diff(block);
    double num = 0.0, den = 0.0;
    for (std::size_t node = 0; node < exact.node_count(); ++node) {
        const auto e = exact.node_values(node);
        const auto h = est.node_values(node);
        for (std::size_t i = 0; i < block; ++i) diff[i] = e[i] - h[i];
        num += std::sqrt(frobenius_sq(diff));
        den += std::sqrt(frobenius_sq(e));
    }
    if (den == 0.0) throw ZeroDenominator("exact spectrum vanishes on the grid");
    return num / den;
}

double metric_mse(const SpectrumGrid& exact, const SpectrumGrid& est) {
    require_same_layout(exact, est);
    double sum = 0.0;
    const auto e = exact.data();
    const auto h = est.data();
    for (std::size_t i = 0; i < e.size(); ++i) sum += std::norm(e[i] - h[i]);
    return sum / static_cast<double>(exact.node_count());
}

std::size_t metric_edge_error(const GraphTopology& truth, const GraphTopology& est) {
    if (truth.size() != est.size()) throw DimensionMismatch("graphs have different node counts");
    std::size_t count = 0;
    for (const auto& e : truth.edges()) count += !est.edges().contains(e);
    for (const auto& e : est.edges()) count += !truth.edges().contains(e);
    return count;
}

double metric_peak_error(std::span<const double> omega_true, const PeakEstimate& peak, bool wrap) {
    if (omega_true.size() != peak.omega_hat.size()) throw DimensionMismatch("peak dimension mismatch");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double sum = 0.0;
    for (std::size_t j = 0; j < omega_true.size(); ++j) {
        double diff = peak.omega_hat[j] - omega_true[j];
        if (wrap) diff -= two_pi * std::floor((diff + std::numbers::pi) / two_pi);
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

// ------------------------------------------------------------ experiments

Experiment parse_experiment(std::string_view text) {
    if (text == "etfe") return Experiment::etfe;
    if (text == "graph") return Experiment::graph;
    if (text == "radar") return Experiment::radar;
    if (text == "consistency") return Experiment::consistency;
    throw InvalidParameter("unknown experiment '" + std::string(text) + "'");
}

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::etfe: return "etfe";
        case Experiment::graph: return "graph";
        case Experiment::radar: return "radar";
        case Experiment::consistency: return "consistency";
    }
    return "?";
}

MAKernel default_consistency_kernel() {
    MAKernel k(1, 1, 1);
    k.add_tap({0}, 1.0);
    k.add_tap({1}, 0.6);
    k.add_tap({2}, -0.3);
    return k;
}

std::size_t ExperimentConfig::lattice_dim() const {
    switch (experiment) {
        case Experiment::etfe:
        case Experiment::graph: return 1;
        case Experiment::radar: return 3;
        case Experiment::consistency: return kernel.dim();
    }
    return 1;
}

std::size_t ExperimentConfig::resolved_grid_points() const {
    if (grid_points != 0) return grid_points;
    return lattice_dim() == 1 ? 512 : 64;
}

std::vector<EstimatorSpec> ExperimentConfig::resolved_estimators() const {
    if (!estimators.empty()) return estimators;
    switch (experiment) {
        case Experiment::etfe: return {{"raw", "raw"}, {"smoothed", "cube-root"}};
        case Experiment::graph: return {{"truncated", "cube-root"}};
        case Experiment::radar: return {{"truncated", "cube-root"}, {"full", "full"}};
        case Experiment::consistency: return {{"cube_root", "cube-root"}, {"const10", "const:10"}};
    }
    return {};
}

void ExperimentConfig::validate() const {
    if (n_list.empty()) throw ConfigError("N_list", "must list at least one sample size");
    for (const std::size_t n : n_list)
        if (n < 2) throw ConfigError("N_list", "sample sizes must be >= 2");
    if (trials < 1) throw ConfigError("trials", "must be positive");
    const std::size_t g = resolved_grid_points();
    if (g < 1) throw ConfigError("grid", "must be positive");

    const auto ests = resolved_estimators();
    for (std::size_t i = 0; i < ests.size(); ++i) {
        const auto& e = ests[i];
        if (e.label.empty() || !std::all_of(e.label.begin(), e.label.end(), [](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
            }))
            throw ConfigError("estimators", "label '" + e.label + "' must be non-empty [A-Za-z0-9_-]");
        for (std::size_t j = 0; j < i; ++j)
            if (ests[j].label == e.label) throw ConfigError("estimators", "duplicate label '" + e.label + "'");
        if (e.method == "raw") {
            if (experiment != Experiment::etfe) throw ConfigError("estimators", "'raw' applies to etfe only");
        } else if (e.method == "full") {
            if (experiment == Experiment::etfe) throw ConfigError("estimators", "'full' does not apply to etfe");
        } else {
            try {
                (void)e.policy();
            } catch (const InvalidParameter& err) {
                throw ConfigError("estimators", err.what());
            }
        }
    }

    switch (experiment) {
        case Experiment::etfe:
            if (!(noise_ratio >= 0.0)) throw ConfigError("noise_ratio", "must be nonnegative");
            if (impulse_taps <= horizon) throw ConfigError("impulse_taps", "must exceed the error horizon");
            if (g < horizon + 1) throw ConfigError("grid", "needs at least horizon + 1 points");
            if (std::abs(input_filter.pole()) >= 1.0) throw ConfigError("input_filter", "pole must lie inside the unit disc");
            break;
        case Experiment::graph:
            if (!(threshold >= 0.0)) throw ConfigError("threshold", "must be nonnegative");
            try {
                graph_model.validate();
            } catch (const Error& err) {
                throw ConfigError("model", err.what());
            }
            break;
        case Experiment::radar:
            try {
                radar.validate();
            } catch (const Error& err) {
                throw ConfigError("radar", err.what());
            }
            break;
        case Experiment::consistency:
            if (kernel.empty()) throw ConfigError("kernel", "needs at least one tap");
            break;
    }
}

const MetricValue* TrialResult::find(std::string_view name) const {
    for (const auto& m : metrics)
        if (m.name == name) return &m;
    return nullptr;
}

const Aggregate& SweepResult::aggregate(std::string_view metric, std::size_t sample_size) const {
    for (const auto& a : aggregates)
        if (a.metric == metric && a.sample_size == sample_size) return a;
    throw InvalidParameter("no aggregate for metric '" + std::string(metric) + "' at N = " +
                           std::to_string(sample_size));
}

namespace {

std::vector<std::string> metric_names(const ExperimentConfig& config) {
    std::vector<std::string> names;
    const auto ests = config.resolved_estimators();
    switch (config.experiment) {
        case Experiment::etfe:
            for (const auto& e : ests) names.push_back("impulse_error_" + e.label);
            break;
        case Experiment::graph:
            for (const auto& e : ests) names.push_back("edges_" + e.label);
            for (const auto& e : ests) names.push_back("spectrum_error_" + e.label);
            break;
        case Experiment::radar:
            for (const auto& e : ests) names.push_back("peak_error_" + e.label);
            for (const auto& e : ests) names.push_back("spectrum_error_" + e.label);
            names.push_back("degenerate");
            break;
        case Experiment::consistency:
            for (const auto& e : ests) names.push_back("mse_" + e.label);
            for (const auto& e : ests) names.push_back("spectrum_error_" + e.label);
            break;
    }
    return names;
}

class MetricSink {
public:
    explicit MetricSink(TrialResult& result) : result_(result) {}

    template <class F>
    void record(const std::string& name, F&& compute) {
        auto* slot = find(name);
        try {
            slot->value = compute();
            slot->ok = true;
            slot->message.clear();
        } catch (const std::exception& err) {
            slot->ok = false;
            slot->value = std::numeric_limits<double>::quiet_NaN();
            slot->message = err.what();
        }
    }

private:
    MetricValue* find(const std::string& name) {
        for (auto& m : result_.metrics)
            if (m.name == name) return &m;
        throw InvalidParameter("unknown metric '" + name + "'");
    }
    TrialResult& result_;
};

// An estimate, or the reason it could not be formed (rethrown by get()).
struct Estimated {
    std::optional<SpectrumGrid> spec;
    std::string error;

    const SpectrumGrid& get() const {
        if (!spec) throw Error(error);
        return *spec;
    }
};

Estimated estimate(const FieldSample& field, const EstimatorSpec& est, std::size_t sample_size, EstimatorKind kind,
                   const FrequencyGrid& grid) {
    Estimated out;
    try {
        if (est.method == "full") {
            out.spec = dft_periodogram(field, grid);
        } else {
            const std::size_t n = policy_eval(est.policy(), sample_size).n;
            out.spec = periodogram(sample_autocov(field, n, kind), grid);
        }
    } catch (const Error& err) {
        out.error = err.what();
    }
    return out;
}

void etfe_trial(const ExperimentConfig& cfg, std::size_t sample_size, TrialResult& out) {
    MetricSink sink(out);
    const auto g = runge_impulse(cfg.impulse_taps);
    const auto data = gen_etfe_dataset(g, cfg.input_filter, sample_size, cfg.noise_ratio, out.seed);
    const FrequencyGrid grid(1, cfg.resolved_grid_points());
    for (const auto& est : cfg.resolved_estimators()) {
        sink.record("impulse_error_" + est.label, [&] {
            const auto tf = est.method == "raw" ? etfe_raw(data.u, data.y, grid)
                                                : etfe_smoothed(data.u, data.y, est.policy(), grid);
            return metric_impulse_error(g, impulse_from_tf(tf, cfg.horizon), cfg.horizon);
        });
    }
}

void graph_trial(const ExperimentConfig& cfg, std::size_t sample_size, TrialResult& out) {
    MetricSink sink(out);
    const FrequencyGrid grid(1, cfg.resolved_grid_points());
    const auto exact_inv = exact_inverse_spectrum(cfg.graph_model, grid);
    const auto exact = invert_spectrum(exact_inv);
    const auto norms = entry_norms(exact_inv, cfg.entry_norm);
    GraphTopology truth(cfg.graph_model.size());
    const double structural = 1e-9 * norms.maxCoeff();
    for (std::size_t i = 0; i < truth.size(); ++i)
        for (std::size_t j = i + 1; j < truth.size(); ++j)
            if (norms(i, j) > structural) truth.add_edge(i, j);

    const auto field = gen_graphical_field(cfg.graph_model, sample_size, out.seed, cfg.burn_in);
    for (const auto& est : cfg.resolved_estimators()) {
        const auto spec = estimate(field, est, sample_size, cfg.covariance, grid);
        sink.record("spectrum_error_" + est.label, [&] {
            return metric_spectrum_error(exact, spec.get());
        });
        sink.record("edges_" + est.label, [&] {
            const auto graph = topology_from_inverse(invert_spectrum(spec.get()), cfg.threshold, cfg.entry_norm);
            return static_cast<double>(metric_edge_error(truth, graph));
        });
    }
}

RadarModel trial_radar_model(const ExperimentConfig& cfg, std::uint64_t seed) {
    RadarModel model = cfg.radar;
    if (cfg.random_omega) {
        CounterRng rng(seed, 0x6f6d656761ULL);
        for (auto& w : model.omega)
            w = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    return model;
}

void radar_trial(const ExperimentConfig& cfg, std::size_t sample_size, TrialResult& out) {
    MetricSink sink(out);
    const RadarModel model = trial_radar_model(cfg, out.seed);
    const FrequencyGrid grid(3, cfg.resolved_grid_points());
    const auto exact = exact_spectrum(model, grid);
    sink.record("degenerate", [&] { return radar_peak(exact).degenerate ? 1.0 : 0.0; });
    const auto field = gen_radar_field(model, sample_size, out.seed);
    for (const auto& est : cfg.resolved_estimators()) {
        const auto spec = estimate(field, est, sample_size, cfg.covariance, grid);
        sink.record("peak_error_" + est.label, [&] {
            return metric_peak_error(model.omega, radar_peak(spec.get()), cfg.wrap_peak_error);
        });
        sink.record("spectrum_error_" + est.label, [&] {
            return metric_spectrum_error(exact, spec.get());
        });
    }
}

void consistency_trial(const ExperimentConfig& cfg, std::size_t sample_size, TrialResult& out) {
    MetricSink sink(out);
    const std::size_t d = cfg.kernel.dim();
    const FrequencyGrid grid(d, cfg.resolved_grid_points());
    const auto exact = exact_spectrum(cfg.kernel, grid);
    const auto field = gen_ma_field(cfg.kernel, BlockShape::cube(sample_size, d), cfg.noise, out.seed);
    for (const auto& est : cfg.resolved_estimators()) {
        const auto spec = estimate(field, est, sample_size, cfg.covariance, grid);
        sink.record("mse_" + est.label, [&] {
            return metric_mse(exact, spec.get());
        });
        sink.record("spectrum_error_" + est.label, [&] {
            return metric_spectrum_error(exact, spec.get());
        });
    }
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, std::size_t sample_size, std::size_t trial) {
    TrialResult out;
    out.trial_index = trial;
    out.seed = trial_seed(config.base_seed, sample_size, trial);
    for (const auto& name : metric_names(config))
        out.metrics.push_back({name, std::numeric_limits<double>::quiet_NaN(), false, "not computed"});
    try {
        switch (config.experiment) {
            case Experiment::etfe: etfe_trial(config, sample_size, out); break;
            case Experiment::graph: graph_trial(config, sample_size, out); break;
            case Experiment::radar: radar_trial(config, sample_size, out); break;
            case Experiment::consistency: consistency_trial(config, sample_size, out); break;
        }
    } catch (const std::exception& err) {
        for (auto& m : out.metrics) {
            if (m.ok) continue;
            m.message = err.what();
        }
    }
    return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

SweepResult run_sweep(const ExperimentConfig& config, std::size_t workers) {
    config.validate();
    SweepResult result;
    result.n_list = config.n_list;
    result.metric_names = metric_names(config);
    result.trials.assign(config.n_list.size(), std::vector<TrialResult>(config.trials));

    const std::size_t tasks = config.n_list.size() * config.trials;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t task; (task = next.fetch_add(1)) < tasks;) {
            const std::size_t ni = task / config.trials;
            const std::size_t trial = task % config.trials;
            result.trials[ni][trial] = run_trial(config, config.n_list[ni], trial);
        }
    };
    workers = std::clamp<std::size_t>(workers, 1, tasks);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    for (std::size_t mi = 0; mi < result.metric_names.size(); ++mi) {
        const auto& name = result.metric_names[mi];
        for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
            std::vector<double> ok;
            double sum = 0.0;
            for (const auto& t : result.trials[ni]) {
                const auto& m = t.metrics[mi];
                if (!m.ok) continue;
                ok.push_back(m.value);
                sum += m.value;
            }
            Aggregate agg;
            agg.metric = name;
            agg.sample_size = config.n_list[ni];
            agg.n_success = ok.size();
            const double nan = std::numeric_limits<double>::quiet_NaN();
            agg.mean = ok.empty() ? nan : sum / static_cast<double>(ok.size());
            std::sort(ok.begin(), ok.end());
            agg.median = quantile_sorted(ok, 0.5);
            agg.q1 = quantile_sorted(ok, 0.25);
            agg.q3 = quantile_sorted(ok, 0.75);
            if (2 * (config.trials - agg.n_success) > config.trials) result.failed = true;
            result.aggregates.push_back(agg);
        }
    }
    return result;
}

void write_metric_csv(std::ostream& out, const SweepResult& result, std::string_view metric) {
    const auto it = std::find(result.metric_names.begin(), result.metric_names.end(), metric);
    if (it == result.metric_names.end()) throw InvalidParameter("unknown metric '" + std::string(metric) + "'");
    const auto mi = static_cast<std::size_t>(it - result.metric_names.begin());
    out << "N,trial,value,seed,status\n";
    for (std::size_t ni = 0; ni < result.n_list.size(); ++ni)
        for (const auto& t : result.trials[ni]) {
            const auto& m = t.metrics[mi];
            out << result.n_list[ni] << ',' << t.trial_index << ',' << format_double(m.value) << ',' << t.seed
                << ',' << (m.ok ? "ok" : "failed") << '\n';
        }
}

void write_aggregate_csv(std::ostream& out, const SweepResult& result) {
    out << "metric,N,mean,median,q1,q3,n_success\n";
    for (const auto& a : result.aggregates)
        out << a.metric << ',' << a.sample_size << ',' << format_double(a.mean) << ',' << format_double(a.median)
            << ',' << format_double(a.q1) << ',' << format_double(a.q3) << ',' << a.n_success << '\n';
}

std::vector<std::filesystem::path> write_sweep(const std::filesystem::path& dir, const SweepResult& result) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw Error("cannot write " + p.string());
        return f;
    };
    for (const auto& name : result.metric_names) {
        const auto path = dir / (name + ".csv");
        auto f = open(path);
        write_metric_csv(f, result, name);
        written.push_back(path);
    }
    const auto path = dir / "aggregate.csv";
    auto f = open(path);
    write_aggregate_csv(f, result);
    written.push_back(path);
    return written;
}

}  // namespace m2spec
