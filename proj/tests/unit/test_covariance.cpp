#include <doctest.h>

#include <sstream>

#include "m2spec/covariance.hpp"
#include "m2spec/error.hpp"
#include "oracles.hpp"

using namespace m2spec;

TEST_SUITE("covariance") {
    TEST_CASE("worked examples on y = [1, 2, 3]") {
        const FieldSample y(BlockShape({3}), 1, std::vector<double>{1, 2, 3});
        const auto unb = sample_autocov(y, 1, EstimatorKind::unbiased);
        const auto bia = sample_autocov(y, 1, EstimatorKind::biased);
        CHECK(unb.at(LagIndex{1})(0, 0) == cplx(4.0));
        CHECK(bia.at(LagIndex{1})(0, 0).real() == doctest::Approx(8.0 / 3.0));
        CHECK(unb.at(LagIndex{0}) == bia.at(LagIndex{0}));
        CHECK(unb.at(LagIndex{0})(0, 0).real() == doctest::Approx(14.0 / 3.0));
        CHECK(unb.at(LagIndex{-1}) == unb.at(LagIndex{1}));
    }

    TEST_CASE("truncation beyond N - 1 is rejected") {
        const FieldSample y(BlockShape({3}), 1, std::vector<double>{1, 2, 3});
        CHECK_NOTHROW(sample_autocov(y, 2, EstimatorKind::biased));
        CHECK_THROWS_AS(sample_autocov(y, 3, EstimatorKind::biased), TruncationTooLarge);
    }

    TEST_CASE("agrees bit-exactly with the brute-force oracle") {
        CounterRng rng(1234);
        for (int rep = 0; rep < 40; ++rep) {
            const std::size_t d = 1 + rng() % 2, m = 1 + rng() % 2, big_n = 2 + rng() % 5;
            const bool complex = rng() % 2;
            const auto y = oracle::random_field(BlockShape::cube(big_n, d), m, complex, rng());
            for (const auto kind : {EstimatorKind::unbiased, EstimatorKind::biased}) {
                const auto covs = sample_autocov(y, big_n - 1, kind);
                CHECK(covs.complete());
                for (const auto& k : covs.lags()) {
                    const auto ref = oracle::autocov(y, k.components(), kind == EstimatorKind::biased);
                    CHECK(covs.at(k) == ref);
                }
            }
        }
    }

    TEST_CASE("mirror identity holds exactly") {
        const auto y = oracle::random_field(BlockShape::cube(5, 2), 2, true, 77);
        const auto covs = sample_autocov(y, 3, EstimatorKind::unbiased);
        for (const auto& k : covs.lags()) CHECK(covs.at(k.neg()) == covs.at(k).adjoint());
        const auto yr = oracle::random_field(BlockShape::cube(6, 1), 3, false, 78);
        const auto cr = sample_autocov(yr, 4, EstimatorKind::biased);
        for (const auto& k : cr.lags()) CHECK(cr.at(k.neg()) == cr.at(k).transpose());
    }

    TEST_CASE("exact MA covariances") {
        MAKernel white(1, 2, 2);
        white.add_tap({0}, Eigen::MatrixXcd::Identity(2, 2));
        const auto r = exact_ma_autocov(white, 2);
        for (const auto& k : r.lags())
            CHECK(r.at(k) == (k == LagIndex{0} ? Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2)) : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(2, 2))));

        MAKernel ma1(1, 1, 1);
        ma1.add_tap({0}, 1.0);
        ma1.add_tap({1}, 0.5);
        const auto r1 = exact_ma_autocov(ma1, 3);
        CHECK(r1.at(LagIndex{0})(0, 0) == cplx(1.25));
        CHECK(r1.at(LagIndex{1})(0, 0) == cplx(0.5));
        CHECK(r1.at(LagIndex{-1})(0, 0) == cplx(0.5));
        CHECK(r1.at(LagIndex{2})(0, 0) == cplx(0.0));
        CHECK(r1.estimator() == EstimatorKind::exact);
    }

    TEST_CASE("separable 2-D kernel factorizes") {
        const std::vector<double> a{1.0, -0.4, 0.3}, b{0.5, 0.8};
        MAKernel k(2, 1, 1);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) k.add_tap({Index(i), Index(j)}, a[i] * b[j]);
        auto r1d = [](const std::vector<double>& v, Index lag) {
            double s = 0.0;
            for (Index t = 0; t < Index(v.size()); ++t)
                if (t + lag >= 0 && t + lag < Index(v.size())) s += v[t + lag] * v[t];
            return s;
        };
        const auto r = exact_ma_autocov(k, 3);
        for (const auto& lag : r.lags())
            CHECK(r.at(lag)(0, 0).real() == doctest::Approx(r1d(a, lag[0]) * r1d(b, lag[1])).epsilon(1e-14));
    }

    TEST_CASE("CSV export") {
        const FieldSample y(BlockShape({3}), 1, std::vector<double>{1, 2, 3});
        std::ostringstream os;
        write_covariance_csv(os, sample_autocov(y, 1, EstimatorKind::unbiased));
        std::istringstream is(os.str());
        std::string header, first;
        std::getline(is, header);
        std::getline(is, first);
        CHECK(header == "k1,r1_1");
        CHECK(first == "-1,4");
    }
}
