#include <doctest.h>

#include <sstream>

#include "m2spec/error.hpp"
#include "m2spec/spectrum.hpp"
#include "oracles.hpp"

using namespace m2spec;

namespace {

CovarianceSequence scalar_covs(std::size_t n, std::initializer_list<double> half) {
    CovarianceSequence covs(1, 1, n, EstimatorKind::exact, ScalarKind::real);
    Index k = 0;
    for (double v : half) covs.set(LagIndex{k++}, Eigen::MatrixXcd::Constant(1, 1, v));
    return covs;
}

}  // namespace

TEST_SUITE("spectrum") {
    TEST_CASE("policy examples and verdicts") {
        const auto a = policy_eval(TruncationPolicy::cube_root(), 1000);
        CHECK(a.n == 10);
        CHECK(a.consistent);
        const auto b = policy_eval(TruncationPolicy::linear_fraction(0.01), 1000);
        CHECK(b.n == 10);
        CHECK_FALSE(b.consistent);
        const auto c = policy_eval(TruncationPolicy::power(1.0, 0.48), 1000000);
        CHECK(c.n == 758);
        CHECK(c.consistent);
        CHECK_FALSE(policy_eval(TruncationPolicy::constant(10), 1000).consistent);
        CHECK(policy_eval(TruncationPolicy::cube_root(), 999).n == 9);
        CHECK(policy_eval(TruncationPolicy::cube_root(), 1000000).n == 100);
        CHECK(policy_eval(TruncationPolicy::cube_root(), 2).n == 1);
        CHECK(policy_eval(TruncationPolicy::constant(50), 10).n == 9);
        CHECK_FALSE(TruncationPolicy::power(1.0, 0.5).consistent());
        CHECK_FALSE(TruncationPolicy::power(1.0, 0.0).consistent());
        CHECK_THROWS_AS(TruncationPolicy::power(0.0, 0.3), InvalidParameter);
        CHECK_THROWS_AS(TruncationPolicy::linear_fraction(-1.0), InvalidParameter);
        CHECK_THROWS_AS(TruncationPolicy::constant(0), InvalidParameter);
        CHECK_THROWS_AS(policy_eval(TruncationPolicy::cube_root(), 1), InvalidParameter);
    }

    TEST_CASE("policy parsing") {
        CHECK(TruncationPolicy::parse("cube-root").family == TruncationPolicy::Family::cube_root);
        const auto p = TruncationPolicy::parse("power:2,0.25");
        CHECK(p.a == 2.0);
        CHECK(p.b == 0.25);
        CHECK(TruncationPolicy::parse("linear:0.001").c == 0.001);
        CHECK(TruncationPolicy::parse("const:10").n0 == 10);
        CHECK(policy_eval(TruncationPolicy::parse("fourth-root"), 10000).n == 10);
        CHECK(TruncationPolicy::parse(TruncationPolicy::parse("power:1,0.48").describe()).b == 0.48);
        CHECK_THROWS_AS(TruncationPolicy::parse("banana"), InvalidParameter);
        CHECK_THROWS_AS(TruncationPolicy::parse("const:2.5"), InvalidParameter);
    }

    TEST_CASE("frequency grid") {
        const FrequencyGrid g(2, 8);
        CHECK(g.node_count() == 64);
        const std::vector<std::size_t> idx{3, 5};
        const auto node = g.node(idx);
        CHECK(g.grid_index(node) == idx);
        CHECK(g.theta(node)[1] == doctest::Approx(2 * std::numbers::pi * 5 / 8));
        CHECK(g.grid_index(g.mirror(node)) == std::vector<std::size_t>{5, 3});
        const auto& w = g.twiddles();
        for (std::size_t r = 1; r < 8; ++r) CHECK(w[8 - r] == std::conj(w[r]));
        CHECK(std::abs(w[2] - cplx(0, -1)) < 1e-15);
    }

    TEST_CASE("periodogram examples") {
        CovarianceSequence ident(2, 2, 1, EstimatorKind::exact, ScalarKind::real);
        for (const auto& k : ident.lags())
            ident.set(k, k == LagIndex{0, 0} ? Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2)) : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(2, 2)));
        const auto flat = periodogram(ident, FrequencyGrid(2, 6));
        for (std::size_t node = 0; node < flat.node_count(); ++node)
            CHECK((flat.at(node) - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);

        const auto cosine = periodogram(scalar_covs(1, {1.25, 0.5}), FrequencyGrid(1, 16));
        for (std::size_t g = 0; g < 16; ++g) {
            const double th = 2 * std::numbers::pi * double(g) / 16;
            CHECK(cosine.data()[g].real() == doctest::Approx(1.25 + std::cos(th)).epsilon(1e-14));
        }
        CHECK(cosine.data()[0].real() == doctest::Approx(2.25));
        CHECK(cosine.data()[8].real() == doctest::Approx(0.25));

        const FieldSample y(BlockShape({3}), 1, std::vector<double>{1, 2, 3});
        const auto full = periodogram(sample_autocov(y, 2, EstimatorKind::biased), FrequencyGrid(1, 8));
        CHECK(full.data()[0].real() == doctest::Approx(12.0));
    }

    TEST_CASE("incomplete lag window is rejected") {
        CovarianceSequence covs(1, 1, 2, EstimatorKind::exact, ScalarKind::real);
        covs.set(LagIndex{0}, Eigen::MatrixXcd::Ones(1, 1));
        CHECK_THROWS_AS(periodogram(covs, FrequencyGrid(1, 8)), IncompleteLagWindow);
        CHECK_THROWS_AS(periodogram(scalar_covs(1, {1.0, 0.0}), FrequencyGrid(2, 8)), GridMismatch);
    }

    TEST_CASE("full periodogram identity, 1-D and 2-D") {
        CounterRng rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            const std::size_t big_n = 2 + rng() % 40;
            const auto f = oracle::random_field(BlockShape({big_n}), 1, false, rng());
            const std::vector<double> y(f.real_data().begin(), f.real_data().end());
            const FrequencyGrid grid(1, 64);
            const auto spec = periodogram(sample_autocov(f, big_n - 1, EstimatorKind::biased), grid);
            const auto dft = dft_periodogram(f, grid);
            double scale = 0.0;
            for (std::size_t g = 0; g < 64; ++g) scale = std::max(scale, oracle::periodogram_dft(y, grid.angle(g)));
            for (std::size_t g = 0; g < 64; ++g) {
                const double ref = oracle::periodogram_dft(y, grid.angle(g));
                CHECK(std::abs(spec.data()[g] - ref) <= 1e-9 * scale);
                CHECK(std::abs(dft.data()[g] - ref) <= 1e-9 * scale);
            }
        }
        const auto f2 = oracle::random_field(BlockShape::cube(5, 2), 1, false, 9);
        const FrequencyGrid grid(2, 8);
        const auto spec = periodogram(sample_autocov(f2, 4, EstimatorKind::biased), grid);
        const auto dft = dft_periodogram(f2, grid);
        for (std::size_t node = 0; node < grid.node_count(); ++node) {
            const auto th = grid.theta(node);
            cplx acc{};
            for (std::size_t p = 0; p < 25; ++p) {
                const double t1 = double(p / 5 + 1), t2 = double(p % 5 + 1);
                acc += f2.real_data()[p] * std::polar(1.0, -(th[0] * t1 + th[1] * t2));
            }
            const double ref = std::norm(acc) / 25.0;
            CHECK(std::abs(spec.data()[node] - ref) <= 1e-9 * (1.0 + ref));
            CHECK(std::abs(dft.data()[node] - ref) <= 1e-9 * (1.0 + ref));
        }
    }

    TEST_CASE("Hermitian and real-field symmetries") {
        const auto y = oracle::random_field(BlockShape::cube(6, 2), 2, false, 31);
        const FrequencyGrid grid(2, 8);
        const auto spec = periodogram(sample_autocov(y, 2, EstimatorKind::unbiased), grid);
        const auto raw = periodogram(sample_autocov(y, 2, EstimatorKind::unbiased), grid, false);
        for (std::size_t node = 0; node < grid.node_count(); ++node) {
            const auto v = spec.at(node);
            CHECK(v == v.adjoint());
            const auto r = raw.at(node);
            CHECK((r - r.adjoint()).norm() <= 1e-12 * r.norm());
            CHECK(spec.at(grid.mirror(node)) == v.conjugate());
        }
        const auto at0 = raw.at(0);
        CHECK(at0.imag().norm() <= 1e-12 * at0.norm());
    }

    TEST_CASE("cross-spectrum blocks partition and reassemble") {
        const auto y = oracle::random_field(BlockShape({40}), 3, true, 8);
        const auto spec = periodogram(sample_autocov(y, 3, EstimatorKind::biased), FrequencyGrid(1, 16));
        const auto blocks = cross_spectrum_blocks(spec, 2, 1);
        CHECK(blocks.y.rows() == 2);
        CHECK(blocks.y.cols() == 2);
        CHECK(blocks.yu.rows() == 2);
        CHECK(blocks.yu.cols() == 1);
        CHECK(blocks.u.rows() == 1);
        const auto back = reassemble_blocks(blocks);
        for (std::size_t node = 0; node < spec.node_count(); ++node) CHECK(back.at(node) == spec.at(node));
        CHECK_THROWS_AS(cross_spectrum_blocks(spec, 2, 2), DimensionMismatch);
    }

    TEST_CASE("independent halves give vanishing cross spectrum") {
        MAKernel k(1, 2, 2);
        Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Identity(2, 2), m1 = Eigen::MatrixXcd::Zero(2, 2);
        m1(0, 0) = 0.6;
        m1(1, 1) = -0.4;
        k.add_tap({0}, m0);
        k.add_tap({1}, m1);
        auto mean_cross = [&](std::size_t big_n) {
            double total = 0.0;
            for (std::uint64_t s = 0; s < 10; ++s) {
                const auto y = gen_ma_field(k, BlockShape({big_n}), NoiseKind::real_gaussian, 100 + s);
                const auto n = policy_eval(TruncationPolicy::cube_root(), big_n).n;
                const auto b = cross_spectrum_blocks(periodogram(sample_autocov(y, n, EstimatorKind::biased),
                                                                 FrequencyGrid(1, 64)),
                                                     1, 1);
                for (cplx v : b.yu.data()) total += std::abs(v);
            }
            return total / (10.0 * 64.0);
        };
        const double small = mean_cross(1000), large = mean_cross(100000);
        CHECK(large < small);
        CHECK(large < 0.05);
    }

    TEST_CASE("inversion examples") {
        SpectrumGrid twos(FrequencyGrid(1, 8), 2, 2, Provenance::exact);
        for (std::size_t node = 0; node < 8; ++node) twos.set(node, 2.0 * Eigen::MatrixXcd::Identity(2, 2));
        const auto half = invert_spectrum(twos);
        for (std::size_t node = 0; node < 8; ++node)
            CHECK((half.at(node) - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);

        SpectrumGrid diag(FrequencyGrid(1, 8), 2, 2, Provenance::exact);
        for (std::size_t node = 0; node < 8; ++node) {
            Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2, 2);
            v(0, 0) = 1.25 + std::cos(diag.grid().angle(node));
            v(1, 1) = 2.0;
            diag.set(node, v);
        }
        const auto inv = invert_spectrum(diag);
        for (std::size_t node = 0; node < 8; ++node) {
            CHECK(inv.at(node)(0, 0).real() == doctest::Approx(1.0 / (1.25 + std::cos(diag.grid().angle(node)))));
            CHECK(inv.at(node)(1, 1).real() == doctest::Approx(0.5));
            CHECK(std::abs(inv.at(node)(0, 1)) < 1e-15);
        }

        const auto y = oracle::random_field(BlockShape({64}), 3, false, 3);
        const auto full = dft_periodogram(y, FrequencyGrid(1, 16));
        try {
            (void)invert_spectrum(full);
            FAIL("rank-one periodogram must not invert");
        } catch (const NearSingularNode& e) {
            CHECK(e.theta().size() == 1);
            CHECK(e.condition() > 1e12);
        }
        CHECK(min_eigenvalue(full) < 1e-10);
    }

    TEST_CASE("exact spectra") {
        MAKernel ident(1, 2, 2);
        ident.add_tap({0}, Eigen::MatrixXcd::Identity(2, 2));
        const auto flat = exact_spectrum(ident, FrequencyGrid(1, 8));
        for (std::size_t node = 0; node < 8; ++node) CHECK(flat.at(node) == Eigen::MatrixXcd::Identity(2, 2));

        MAKernel ma1(1, 1, 1);
        ma1.add_tap({0}, 1.0);
        ma1.add_tap({1}, 0.5);
        const FrequencyGrid grid(1, 32);
        const auto viaker = exact_spectrum(ma1, grid);
        const auto viacov = periodogram(exact_ma_autocov(ma1, 1), grid);
        for (std::size_t node = 0; node < 32; ++node)
            CHECK(std::abs(viaker.data()[node] - viacov.data()[node]) < 1e-14);

        const auto white = exact_spectrum(RadarModel{{0, 0, 0}, {0, 0, 0}, 2.0}, FrequencyGrid(3, 4));
        for (cplx v : white.data()) CHECK(v == cplx(3.0));

        const RadarModel paper{{0.3, 0.3, 0.3}, {2.58, 1.07, 2.88}, 2.0};
        const FrequencyGrid g64(3, 64);
        const auto spec = exact_spectrum(paper, g64);
        std::size_t best = 0;
        for (std::size_t node = 1; node < spec.node_count(); ++node)
            if (spec.data()[node].real() > spec.data()[best].real()) best = node;
        std::vector<std::size_t> nearest(3);
        for (std::size_t j = 0; j < 3; ++j) nearest[j] = std::size_t(std::lround(paper.omega[j] * 64 / (2 * std::numbers::pi)));
        CHECK(g64.grid_index(best) == nearest);
    }

    TEST_CASE("graphical exact spectrum inverts W^-H W^-1") {
        const auto w = five_node_benchmark_model();
        const FrequencyGrid grid(1, 64);
        const auto inv = exact_inverse_spectrum(w, grid);
        const auto spec = exact_spectrum(w, grid);
        for (std::size_t node = 0; node < 64; ++node)
            CHECK((spec.at(node) * inv.at(node) - Eigen::MatrixXcd::Identity(5, 5)).norm() < 1e-10);
    }

    TEST_CASE("spectrum CSV layout") {
        const auto spec = periodogram(scalar_covs(1, {1.25, 0.5}), FrequencyGrid(1, 4));
        std::ostringstream os;
        write_spectrum_csv(os, spec);
        std::istringstream is(os.str());
        std::string header, row;
        std::getline(is, header);
        std::getline(is, row);
        CHECK(header == "theta1,re1_1,im1_1");
        CHECK(row == "0,2.25,0");
    }
}
