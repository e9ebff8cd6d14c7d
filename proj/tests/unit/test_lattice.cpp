#include <doctest.h>

#include <set>
#include <sstream>

#include "m2spec/error.hpp"
#include "m2spec/field_io.hpp"
#include "m2spec/lattice.hpp"
#include "m2spec/rng.hpp"
#include "oracles.hpp"

using namespace m2spec;

TEST_SUITE("lattice") {
    TEST_CASE("lag window sizes and order") {
        const auto w = lag_window(1, 2);
        REQUIRE(w.size() == 9);
        CHECK(w.front() == LagIndex{-1, -1});
        CHECK(w.back() == LagIndex{1, 1});
        CHECK(std::is_sorted(w.begin(), w.end()));

        const auto single = lag_window(0, 3);
        REQUIRE(single.size() == 1);
        CHECK(single[0] == LagIndex{0, 0, 0});

        const auto line = lag_window(2, 1);
        REQUIRE(line.size() == 5);
        for (Index i = 0; i < 5; ++i) CHECK(line[static_cast<std::size_t>(i)] == LagIndex{i - 2});
    }

    TEST_CASE("lag window is closed under negation and positions match") {
        for (std::size_t d = 1; d <= 3; ++d)
            for (std::size_t n = 0; n <= 3; ++n) {
                const auto w = lag_window(n, d);
                CHECK(w.size() == lag_window_size(n, d));
                const std::set<LagIndex> all(w.begin(), w.end());
                for (std::size_t pos = 0; pos < w.size(); ++pos) {
                    CHECK(all.contains(w[pos].neg()));
                    CHECK(lag_position(w[pos], n) == pos);
                    CHECK(lag_position(w[pos].neg(), n) == w.size() - 1 - pos);
                }
            }
    }

    TEST_CASE("lag window overflow is reported") {
        CHECK_THROWS_AS(lag_window_size(1000000, 8), OverflowError);
    }

    TEST_CASE("index set examples") {
        const auto a = index_set(4, LagIndex{-2});
        CHECK(a.cardinality() == 2);
        CHECK(a.points() == std::vector<std::vector<Index>>{{3}, {4}});

        CHECK(index_set(5, LagIndex{0, 0}).cardinality() == 25);

        const auto b = index_set(4, LagIndex{1, -2});
        CHECK(b.cardinality() == 6);
        CHECK(b.lower(0) == 1);
        CHECK(b.upper(0) == 3);
        CHECK(b.lower(1) == 3);
        CHECK(b.upper(1) == 4);

        CHECK_THROWS_AS(index_set(3, LagIndex{3}), EmptyIndexSet);
        CHECK_THROWS_AS(index_set(3, LagIndex{0, -4}), EmptyIndexSet);
    }

    TEST_CASE("index set cardinality matches enumeration and is symmetric") {
        for (std::size_t d = 1; d <= 3; ++d)
            for (std::size_t big_n = 1; big_n <= 4; ++big_n)
                for (const auto& k : lag_window(big_n - 1, d)) {
                    const IndexSet s(BlockShape::cube(big_n, d), k);
                    std::size_t visited = 0;
                    s.for_each([&](std::span<const Index> t) {
                        for (std::size_t j = 0; j < d; ++j) {
                            CHECK(t[j] >= 1);
                            CHECK(t[j] + k[j] <= static_cast<Index>(big_n));
                            CHECK(t[j] + k[j] >= 1);
                        }
                        ++visited;
                    });
                    std::size_t expected = 1;
                    for (std::size_t j = 0; j < d; ++j) expected *= big_n - static_cast<std::size_t>(std::abs(k[j]));
                    CHECK(visited == s.cardinality());
                    CHECK(s.cardinality() == expected);
                    CHECK(IndexSet(BlockShape::cube(big_n, d), k.neg()).cardinality() == expected);
                }
    }

    TEST_CASE("block shape and field sample") {
        const BlockShape s({2, 3, 4});
        CHECK(s.cell_count() == 24);
        CHECK(s.strides() == std::vector<std::size_t>{12, 4, 1});
        CHECK_FALSE(s.hypercubic());
        CHECK(BlockShape::cube(3, 2).hypercubic());
        CHECK_THROWS_AS(BlockShape({2, 0}), InvalidParameter);

        FieldSample f(BlockShape({2}), 2, std::vector<double>{1, 2, 3, 4});
        CHECK(f.value(1, 0) == cplx(3, 0));
        CHECK_THROWS_AS(f.complex_data(), InvalidParameter);
        CHECK_THROWS_AS(FieldSample(BlockShape({2}), 2, std::vector<double>{1, 2, 3}), DimensionMismatch);
        const auto c = f.to_complex();
        CHECK_FALSE(c.is_real());
        CHECK(c.complex_data()[3] == cplx(4, 0));
    }

    TEST_CASE("field CSV round trip is bit exact") {
        for (const bool complex : {false, true}) {
            const auto f = oracle::random_field(BlockShape({3, 4}), 2, complex, 99);
            std::stringstream ss;
            write_field_csv(ss, f);
            const auto back = read_field_csv(ss);
            CHECK(back == f);
        }
        const FieldSample odd(BlockShape({3}), 1, std::vector<double>{0.1, -1e-300, 5e300});
        std::stringstream ss;
        write_field_csv(ss, odd);
        CHECK(read_field_csv(ss) == odd);
    }

    TEST_CASE("field CSV errors carry line numbers") {
        std::stringstream bad("1,1,3,real\n1\nx\n3\n");
        try {
            (void)read_field_csv(bad);
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 3);
        }
        std::stringstream short_file("1,1,3,real\n1\n2\n");
        CHECK_THROWS_AS(read_field_csv(short_file), FormatError);
        std::stringstream bad_header("1,1,3,quaternion\n");
        CHECK_THROWS_AS(read_field_csv(bad_header), FormatError);
    }

    TEST_CASE("counter rng is deterministic and order independent") {
        CounterRng a(42), b(42);
        for (int i = 0; i < 100; ++i) CHECK(a() == b());
        CounterRng c(42);
        const auto first = c();
        CHECK(first == CounterRng(42)());
        CHECK(CounterRng(1).split(3)() == CounterRng(1).split(3)());
        CHECK(CounterRng(1).split(3)() != CounterRng(1).split(4)());
        CHECK(trial_seed(7, 1000, 3) == trial_seed(7, 1000, 3));
        CHECK(trial_seed(7, 1000, 3) != trial_seed(7, 1000, 4));
        CHECK(trial_seed(7, 1000, 3) != trial_seed(7, 10000, 3));
    }
}
