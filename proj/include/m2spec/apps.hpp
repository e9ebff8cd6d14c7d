#pragma once

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "m2spec/spectrum.hpp"

namespace m2spec {

/// Scalar frequency response on a 1-D grid; undefined nodes carry no value.
struct TransferFunctionEstimate {
    FrequencyGrid grid{1, 1};
    std::vector<cplx> values;
    std::vector<unsigned char> defined;
    std::string method;

    std::size_t defined_count() const;
};

/// G(theta) = Y_N(theta) / U_N(theta) with X_N(theta) = sum_{t=1..N} x(t) e^{-i theta t}.
/// Nodes with |U_N| below 1e-12 * max|U_N| are undefined.
TransferFunctionEstimate etfe_raw(std::span<const double> u, std::span<const double> y, const FrequencyGrid& grid);

/// Phi_yu / Phi_u from the truncated periodogram of z = (y, u) with biased
/// covariances up to n = policy(N).
TransferFunctionEstimate etfe_smoothed(std::span<const double> u, std::span<const double> y,
                                       const TruncationPolicy& policy, const FrequencyGrid& grid);

/// g(t) = (1/G) sum_g G(theta_g) e^{i theta_g t}, t = 0..horizon. Undefined
/// nodes are filled by circular linear interpolation between defined neighbours.
std::vector<double> impulse_from_tf(const TransferFunctionEstimate& tf, std::size_t horizon,
                                    bool check_real = true);

void write_transfer_csv(std::ostream& out, const TransferFunctionEstimate& tf);

/// Undirected graph on nodes 0..m-1 (exported 1-based).
class GraphTopology {
public:
    explicit GraphTopology(std::size_t m = 0) : m_(m) {}

    std::size_t size() const noexcept { return m_; }
    void add_edge(std::size_t i, std::size_t j);
    bool has_edge(std::size_t i, std::size_t j) const;
    /// Pairs (i, j) with i < j.
    const std::set<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }

    friend bool operator==(const GraphTopology&, const GraphTopology&) = default;

private:
    std::size_t m_;
    std::set<std::pair<std::size_t, std::size_t>> edges_;
};

/// Function norms of one spectrum entry over the grid.
enum class EntryNorm {
    l1_mean,  ///< (1/G^d) sum |h|
    l1,       ///< (2 pi / G)^d sum |h|
    sup,      ///< max |h|
};

EntryNorm parse_entry_norm(std::string_view text);
const char* to_string(EntryNorm norm);

/// m x m matrix of entry norms.
Eigen::MatrixXd entry_norms(const SpectrumGrid& spec, EntryNorm norm);

/// Edges {i, j} with ||Phi^{-1}_ij|| >= c, computed from an already inverted spectrum.
GraphTopology topology_from_inverse(const SpectrumGrid& inverse, double c, EntryNorm norm = EntryNorm::l1_mean);

/// Inverts `spec` nodewise, then thresholds as above.
GraphTopology graph_topology(const SpectrumGrid& spec, double c, EntryNorm norm = EntryNorm::l1_mean);

/// Edge list "i j" per line, 1-based.
void write_edge_list(std::ostream& out, const GraphTopology& graph);

struct PeakEstimate {
    std::vector<double> omega_hat;
    double value = 0.0;
    std::size_t node = 0;
    bool degenerate = false;
};

/// Grid argmax of Re Phi; the lowest node wins ties. A constant spectrum is
/// flagged degenerate.
PeakEstimate radar_peak(const SpectrumGrid& spec);

}  // namespace m2spec
