#include <doctest.h>

#include <sstream>

#include "m2spec/apps.hpp"
#include "m2spec/error.hpp"
#include "oracles.hpp"

using namespace m2spec;

namespace {

std::vector<double> white(std::size_t n, std::uint64_t seed) {
    const auto f = gen_noise(BlockShape({n}), 1, NoiseKind::real_gaussian, seed);
    return {f.real_data().begin(), f.real_data().end()};
}

TransferFunctionEstimate constant_tf(std::size_t g_count, cplx value) {
    return {FrequencyGrid(1, g_count), std::vector<cplx>(g_count, value), std::vector<unsigned char>(g_count, 1),
            "test"};
}

}  // namespace

TEST_SUITE("apps") {
    TEST_CASE("raw ETFE of an identity system is one") {
        const auto u = white(1000, 1);
        const auto tf = etfe_raw(u, u, FrequencyGrid(1, 128));
        for (std::size_t g = 0; g < 128; ++g)
            if (tf.defined[g]) CHECK(std::abs(tf.values[g] - 1.0) < 1e-12);
    }

    TEST_CASE("raw ETFE of a one-sample delay has unit modulus") {
        const auto u = white(4000, 2);
        std::vector<double> y(u.size(), 0.0);
        for (std::size_t t = 1; t < u.size(); ++t) y[t] = u[t - 1];
        const auto tf = etfe_raw(u, y, FrequencyGrid(1, 64));
        std::size_t close = 0;
        for (std::size_t g = 0; g < 64; ++g) close += tf.defined[g] && std::abs(std::abs(tf.values[g]) - 1.0) < 0.1;
        CHECK(close >= 55);
    }

    TEST_CASE("raw ETFE of zero input is an error") {
        const std::vector<double> zero(100, 0.0), y(100, 1.0);
        CHECK_THROWS_AS(etfe_raw(zero, y, FrequencyGrid(1, 32)), UndefinedTransfer);
        CHECK_THROWS_AS(etfe_raw(zero, std::vector<double>(5, 0.0), FrequencyGrid(1, 32)), DimensionMismatch);
    }

    TEST_CASE("smoothed ETFE of an identity system is exactly one") {
        const auto u = white(2000, 3);
        const auto tf = etfe_smoothed(u, u, TruncationPolicy::cube_root(), FrequencyGrid(1, 64));
        for (std::size_t g = 0; g < 64; ++g) {
            REQUIRE(tf.defined[g]);
            CHECK(tf.values[g] == cplx(1.0));
        }
    }

    TEST_CASE("smoothed ETFE recovers a static gain") {
        const auto u = white(100000, 4);
        std::vector<double> y(u.size());
        for (std::size_t t = 0; t < u.size(); ++t) y[t] = 2.0 * u[t];
        const auto tf = etfe_smoothed(u, y, TruncationPolicy::cube_root(), FrequencyGrid(1, 128));
        for (std::size_t g = 0; g < 128; ++g) CHECK(std::abs(tf.values[g] - 2.0) <= 0.1);
    }

    TEST_CASE("smoothed ETFE with a full window matches the DFT cross periodogram") {
        const auto u = white(50, 5);
        const auto e = white(50, 6);
        std::vector<double> y(50);
        for (std::size_t t = 0; t < 50; ++t) y[t] = 0.7 * u[t] + (t ? 0.3 * u[t - 1] : 0.0) + 0.1 * e[t];
        const FrequencyGrid grid(1, 32);
        const auto tf = etfe_smoothed(u, y, TruncationPolicy::constant(49), grid);
        for (std::size_t g = 0; g < 32; ++g) {
            cplx yn{}, un{};
            for (std::size_t t = 0; t < 50; ++t) {
                const cplx w = std::polar(1.0, -grid.angle(g) * double(t + 1));
                yn += y[t] * w;
                un += u[t] * w;
            }
            const cplx ref = (yn * std::conj(un)) / std::norm(un);
            CHECK(std::abs(tf.values[g] - ref) <= 1e-9 * std::abs(ref));
        }
    }

    TEST_CASE("impulse from transfer function") {
        const auto one = impulse_from_tf(constant_tf(16, 1.0), 5);
        CHECK(one[0] == doctest::Approx(1.0));
        for (std::size_t t = 1; t <= 5; ++t) CHECK(std::abs(one[t]) < 1e-15);

        auto delay = constant_tf(16, 1.0);
        for (std::size_t g = 0; g < 16; ++g) delay.values[g] = std::polar(1.0, -delay.grid.angle(g));
        const auto d = impulse_from_tf(delay, 4);
        CHECK(d[1] == doctest::Approx(1.0));
        CHECK(std::abs(d[0]) < 1e-14);
        CHECK(std::abs(d[2]) < 1e-14);

        const std::size_t g_count = 64;
        const auto seq = white(g_count, 7);
        auto tf = constant_tf(g_count, 0.0);
        for (std::size_t g = 0; g < g_count; ++g) {
            cplx acc{};
            for (std::size_t t = 0; t < g_count; ++t) acc += seq[t] * std::polar(1.0, -tf.grid.angle(g) * double(t));
            tf.values[g] = acc;
        }
        const auto back = impulse_from_tf(tf, g_count - 1);
        for (std::size_t t = 0; t < g_count; ++t) CHECK(std::abs(back[t] - seq[t]) < 1e-9);
    }

    TEST_CASE("undefined nodes are interpolated, too many are an error") {
        auto tf = constant_tf(20, 1.0);
        tf.defined[3] = 0;
        tf.values[3] = 0.0;
        const auto g = impulse_from_tf(tf, 3);
        CHECK(g[0] == doctest::Approx(1.0));
        tf.defined[17] = 0;
        CHECK_THROWS_AS(impulse_from_tf(tf, 3), UndefinedTransfer);
        CHECK_THROWS_AS(impulse_from_tf(constant_tf(8, 1.0), 8), InvalidParameter);
    }

    TEST_CASE("topology from spectra") {
        SpectrumGrid diag(FrequencyGrid(1, 16), 3, 3, Provenance::exact);
        for (std::size_t node = 0; node < 16; ++node)
            diag.set(node, Eigen::Vector3cd(1.0, 2.0, 3.0 + std::cos(diag.grid().angle(node))).asDiagonal());
        CHECK(graph_topology(diag, 1e-6).edges().empty());
        CHECK(graph_topology(diag, 0.0).edges().size() == 3);

        const auto w = five_node_benchmark_model();
        const FrequencyGrid grid(1, 512);
        const auto graph = graph_topology(exact_spectrum(w, grid), 0.0994);
        GraphTopology expected(5);
        expected.add_edge(0, 3);
        expected.add_edge(1, 2);
        expected.add_edge(2, 4);
        CHECK(graph == expected);
        std::ostringstream os;
        write_edge_list(os, graph);
        CHECK(os.str() == "1 4\n2 3\n3 5\n");
    }

    TEST_CASE("topology is monotone in the threshold") {
        const auto y = gen_graphical_field(five_node_benchmark_model(), 3000, 12);
        const auto spec = periodogram(sample_autocov(y, 14, EstimatorKind::biased), FrequencyGrid(1, 128));
        const auto inv = invert_spectrum(spec);
        for (double c1 : {0.0, 0.01, 0.05, 0.1, 0.5})
            for (double c2 : {0.0, 0.01, 0.05, 0.1, 0.5, 2.0}) {
                if (c1 > c2) continue;
                const auto big = topology_from_inverse(inv, c1);
                const auto small = topology_from_inverse(inv, c2);
                for (const auto& e : small.edges()) CHECK(big.edges().contains(e));
            }
    }

    TEST_CASE("entry norms") {
        SpectrumGrid s(FrequencyGrid(1, 4), 1, 1, Provenance::exact);
        const cplx v[4] = {1.0, -2.0, cplx(0, 3), 0.0};
        for (std::size_t i = 0; i < 4; ++i) s.data()[i] = v[i];
        CHECK(entry_norms(s, EntryNorm::l1_mean)(0, 0) == doctest::Approx(1.5));
        CHECK(entry_norms(s, EntryNorm::l1)(0, 0) == doctest::Approx(1.5 * 2 * std::numbers::pi));
        CHECK(entry_norms(s, EntryNorm::sup)(0, 0) == doctest::Approx(3.0));
    }

    TEST_CASE("radar peak") {
        const RadarModel paper{{0.3, 0.3, 0.3}, {2.58, 1.07, 2.88}, 2.0};
        const FrequencyGrid grid(3, 64);
        const auto peak = radar_peak(exact_spectrum(paper, grid));
        CHECK_FALSE(peak.degenerate);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(std::abs(peak.omega_hat[j] - paper.omega[j]) <= std::numbers::pi / 64 + 1e-12);

        SpectrumGrid flat(FrequencyGrid(3, 4), 1, 1, Provenance::exact);
        for (auto& v : flat.data()) v = 3.0;
        const auto p0 = radar_peak(flat);
        CHECK(p0.degenerate);
        CHECK(p0.node == 0);

        SpectrumGrid spike(FrequencyGrid(3, 4), 1, 1, Provenance::exact);
        spike.data()[37] = 1.0;
        CHECK(radar_peak(spike).node == 37);
    }

    TEST_CASE("peak is invariant under positive scaling") {
        CounterRng rng(3);
        for (int rep = 0; rep < 20; ++rep) {
            SpectrumGrid s(FrequencyGrid(3, 5), 1, 1, Provenance::estimated);
            for (auto& v : s.data()) v = oracle::uniform01(rng);
            SpectrumGrid scaled = s;
            const double a = 0.01 + 100.0 * oracle::uniform01(rng);
            for (auto& v : scaled.data()) v *= a;
            CHECK(radar_peak(s).node == radar_peak(scaled).node);
        }
    }

    TEST_CASE("transfer CSV") {
        auto tf = constant_tf(2, cplx(1.0, -0.5));
        tf.defined[1] = 0;
        std::ostringstream os;
        write_transfer_csv(os, tf);
        CHECK(os.str() == "node,re,im,defined\n0,1,-0.5,1\n1,,,0\n");
    }
}
