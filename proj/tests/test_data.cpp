#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "amkm/dataset.hpp"

using namespace amkm;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = "amkm_test_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_dataset parses plain numeric csv") {
    TempFile f("1,2\n3,4\n5,6\n");
    Dataset ds = load_dataset(f.path, false);
    CHECK(ds.n() == 3);
    CHECK(ds.d() == 2);
    CHECK(ds.instances(2, 1) == 6.0);
    CHECK(ds.feature_names.empty());
}

TEST_CASE("load_dataset consumes a header row") {
    TempFile f("a,b\n1,2\n");
    Dataset ds = load_dataset(f.path, true);
    CHECK(ds.n() == 1);
    CHECK(ds.d() == 2);
    REQUIRE(ds.feature_names.size() == 2);
    CHECK(ds.feature_names[0] == "a");
    CHECK(ds.feature_names[1] == "b");
}

TEST_CASE("load_dataset reports bad fields with their position") {
    TempFile f("1,x\n");
    CHECK_THROWS_WITH_AS(load_dataset(f.path, false),
                         doctest::Contains("row 1, column 2"), std::runtime_error);
}

TEST_CASE("load_dataset rejects ragged rows, empty files and non-finite values") {
    TempFile ragged("1,2\n3\n");
    CHECK_THROWS_WITH_AS(load_dataset(ragged.path, false), doctest::Contains("ragged"),
                         std::runtime_error);
    TempFile empty("");
    CHECK_THROWS_AS(load_dataset(empty.path, false), std::runtime_error);
    TempFile inf_field("1,inf\n");
    CHECK_THROWS_AS(load_dataset(inf_field.path, false), std::runtime_error);
    CHECK_THROWS_AS(load_dataset("does_not_exist.csv", false), std::runtime_error);
}

TEST_CASE("standardize uses the population divisor") {
    Dataset ds{Matrix::from_rows({{1.0}, {3.0}}), {}, "t"};
    Dataset out = standardize(ds);
    CHECK(out.instances(0, 0) == -1.0);
    CHECK(out.instances(1, 0) == 1.0);
}

TEST_CASE("standardize maps constant columns to zero") {
    Dataset ds{Matrix::from_rows({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}}), {}, "t"};
    Dataset out = standardize(ds);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.instances(i, 0) == 0.0);
}

TEST_CASE("standardize is idempotent within 1e-12") {
    Dataset ds{Matrix::from_rows({{1.0, -2.0}, {4.0, 0.5}, {-3.0, 7.0}, {2.0, 2.0}}), {}, "t"};
    Dataset once = standardize(ds);
    Dataset twice = standardize(once);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.d(); ++j) {
            CHECK(std::abs(once.instances(i, j) - twice.instances(i, j)) <= 1e-12);
        }
    }
}

TEST_CASE("standardize requires two instances") {
    Dataset ds{Matrix::from_rows({{1.0}}), {}, "t"};
    CHECK_THROWS_AS(standardize(ds), std::invalid_argument);
}

TEST_CASE("split cardinalities and disjointness") {
    Matrix m(10, 1);
    for (std::size_t i = 0; i < 10; ++i) m(i, 0) = static_cast<double>(i);
    Dataset ds{std::move(m), {}, "t"};
    auto [matching, reference] = split_match_reference(ds, {3, 7, 1});
    CHECK(matching.n() == 3);
    CHECK(reference.n() == 7);

    // Partition: together they cover all ten distinct values exactly once.
    std::vector<double> seen;
    for (std::size_t i = 0; i < matching.n(); ++i) seen.push_back(matching.instances(i, 0));
    for (std::size_t i = 0; i < reference.n(); ++i) seen.push_back(reference.instances(i, 0));
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(seen[i] == static_cast<double>(i));
}

TEST_CASE("split is deterministic in the seed") {
    Dataset ds{Matrix(20, 2), {}, "t"};
    for (std::size_t i = 0; i < 20; ++i) {
        ds.instances(i, 0) = static_cast<double>(i);
        ds.instances(i, 1) = static_cast<double>(i * i);
    }
    auto [m1, r1] = split_match_reference(ds, {5, 10, 42});
    auto [m2, r2] = split_match_reference(ds, {5, 10, 42});
    CHECK(m1.instances.values() == m2.instances.values());
    CHECK(r1.instances.values() == r2.instances.values());

    auto [m3, r3] = split_match_reference(ds, {5, 10, 43});
    CHECK(m1.instances.values() != m3.instances.values());
}

TEST_CASE("split rejects oversized specs") {
    Dataset ds{Matrix(10, 1), {}, "t"};
    CHECK_THROWS_AS(split_match_reference(ds, {6, 7, 0}), std::invalid_argument);
    CHECK_THROWS_AS(split_match_reference(ds, {0, 5, 0}), std::invalid_argument);
}

TEST_CASE("append_batch counts and validates dimensionality") {
    ReferencePool pool;
    pool = append_batch(std::move(pool), Dataset{Matrix(500, 54), {}, "b0"});
    CHECK(pool.total() == 500);
    ReferencePool grown = append_batch(std::move(pool), Dataset{Matrix(3000, 54), {}, "b1"});
    grown = append_batch(std::move(grown), Dataset{Matrix(500, 54), {}, "b2"});
    CHECK(grown.total() == 4000);
    CHECK(grown.batches().size() == 3);

    ReferencePool narrow = append_batch({}, Dataset{Matrix(4, 16), {}, "n"});
    CHECK_THROWS_AS(append_batch(std::move(narrow), Dataset{Matrix(4, 54), {}, "w"}),
                    std::invalid_argument);
}

TEST_CASE("flattening a pool reproduces insertion order") {
    ReferencePool pool;
    double v = 0.0;
    for (int b = 0; b < 3; ++b) {
        Matrix m(4, 2);
        for (std::size_t i = 0; i < 4; ++i) {
            m(i, 0) = v;
            m(i, 1) = -v;
            v += 1.0;
        }
        pool = append_batch(std::move(pool), Dataset{std::move(m), {}, "b"});
    }
    Dataset flat = pool.flatten();
    REQUIRE(flat.n() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(flat.instances(i, 0) == static_cast<double>(i));
        CHECK(flat.instances(i, 1) == -static_cast<double>(i));
    }
}
