#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "m2spec/apps.hpp"
#include "m2spec/spectrum.hpp"

namespace m2spec {

// ---------------------------------------------------------------- metrics

/// sqrt( sum_{t<=horizon} (g - g_hat)^2 / sum_{t<=horizon} g^2 ), horizon = 300 by default.
double metric_impulse_error(std::span<const double> g_true, std::span<const double> g_hat,
                            std::size_t horizon = 300);

/// Grid mean of ||exact - est||_F over grid mean of ||exact||_F.
double metric_spectrum_error(const SpectrumGrid& exact, const SpectrumGrid& est);

/// Grid mean of ||exact - est||_F^2.
double metric_mse(const SpectrumGrid& exact, const SpectrumGrid& est);

/// Size of the symmetric difference of the edge sets.
std::size_t metric_edge_error(const GraphTopology& truth, const GraphTopology& est);

/// ||omega_hat - omega||; with `wrap`, each component difference is taken modulo 2 pi
/// into [-pi, pi) first.
double metric_peak_error(std::span<const double> omega_true, const PeakEstimate& peak, bool wrap = false);

// ------------------------------------------------------------ experiments

enum class Experiment { etfe, graph, radar, consistency };

Experiment parse_experiment(std::string_view text);
const char* to_string(Experiment e);

/// One spectrum estimator inside an experiment. `method` is a truncation
/// policy string, or "raw" (ETFE) / "full" (full biased periodogram).
struct EstimatorSpec {
    std::string label;
    std::string method;

    bool is_truncated() const { return method != "raw" && method != "full"; }
    TruncationPolicy policy() const { return TruncationPolicy::parse(method); }
};

struct ExperimentConfig {
    Experiment experiment = Experiment::consistency;
    std::vector<std::size_t> n_list;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    std::size_t grid_points = 0;  ///< 0 picks 512 for d = 1 and 64 otherwise
    EstimatorKind covariance = EstimatorKind::biased;
    std::vector<EstimatorSpec> estimators;

    // etfe
    std::size_t impulse_taps = 2000;
    std::size_t horizon = 300;
    RationalSection1D input_filter = RationalSection1D::zero_pole_gain(-0.35, 0.45);
    double noise_ratio = 0.01;

    // graph
    GraphicalModel graph_model = five_node_benchmark_model();
    double threshold = 0.0994;
    EntryNorm entry_norm = EntryNorm::l1_mean;
    std::size_t burn_in = 1000;

    // radar
    RadarModel radar{{0.3, 0.3, 0.3}, {0.0, 0.0, 0.0}, 2.0};
    bool random_omega = true;
    bool wrap_peak_error = false;

    // consistency
    MAKernel kernel = MAKernel(1, 1, 1);
    NoiseKind noise = NoiseKind::real_gaussian;

    std::filesystem::path output_dir = "out";

    /// Dimension of the sampled lattice.
    std::size_t lattice_dim() const;
    std::size_t resolved_grid_points() const;
    /// Experiment defaults when `estimators` is empty.
    std::vector<EstimatorSpec> resolved_estimators() const;
    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Scalar MA(2) kernel used as the default consistency truth: 1 + 0.6 z^-1 - 0.3 z^-2.
MAKernel default_consistency_kernel();

struct MetricValue {
    std::string name;
    double value = 0.0;
    bool ok = false;
    std::string message;
};

struct TrialResult {
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    std::vector<MetricValue> metrics;

    const MetricValue* find(std::string_view name) const;
};

struct Aggregate {
    std::string metric;
    std::size_t sample_size = 0;
    double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0;
    std::size_t n_success = 0;
};

struct SweepResult {
    std::vector<std::size_t> n_list;
    std::vector<std::vector<TrialResult>> trials;  ///< per N, in trial order
    std::vector<std::string> metric_names;
    std::vector<Aggregate> aggregates;  ///< metric-major, then N
    bool failed = false;                ///< more than half the trials failed some metric at some N

    const Aggregate& aggregate(std::string_view metric, std::size_t sample_size) const;
};

/// Runs one trial of the experiment; metric failures are recorded, not thrown.
TrialResult run_trial(const ExperimentConfig& config, std::size_t sample_size, std::size_t trial);

/// All trials over n_list on `workers` threads; output does not depend on `workers`.
SweepResult run_sweep(const ExperimentConfig& config, std::size_t workers = 1);

/// Linear-interpolation quantile (type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Per-metric CSV: N,trial,value,seed,status.
void write_metric_csv(std::ostream& out, const SweepResult& result, std::string_view metric);
/// metric,N,mean,median,q1,q3,n_success.
void write_aggregate_csv(std::ostream& out, const SweepResult& result);
/// Writes `<metric>.csv` per metric plus aggregate.csv; returns the written paths.
std::vector<std::filesystem::path> write_sweep(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace m2spec
