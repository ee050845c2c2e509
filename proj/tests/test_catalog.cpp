#include <cmath>

#include "doctest.h"
#include "ordmeas/catalog.hpp"
#include "ordmeas/numeric.hpp"

using namespace ordmeas;

namespace {

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

std::vector<std::pair<std::string, MeasureParams>> catalog_entries(int n) {
    std::vector<std::pair<std::string, MeasureParams>> out;
    for (const auto& name : linear_catalog_names()) {
        MeasureParams p;
        if (name == "trim-mean" || name == "win-mean" || name == "mid-mean") {
            p.r = std::max(1, n / 10);
            p.s = std::max(1, n / 10);
        }
        out.push_back({name, p});
    }
    MeasureParams none;
    out.push_back({"max", none});
    out.push_back({"min", none});
    out.push_back({"midrange", none});
    out.push_back({"trimean", none});
    return out;
}

}  // namespace

TEST_CASE("tabulated weight vectors") {
    auto mean3 = lambda_for("mean", 3);
    CHECK(mean3.lambda() == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});

    auto med4 = lambda_for("median", 4);
    CHECK(med4.lambda() == std::vector<double>{0.0, 0.5, 0.5, 0.0});

    auto med5 = lambda_for("median", 5);
    CHECK(med5.lambda() == std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.0});

    auto range5 = lambda_for("range", 5);
    CHECK(range5.lambda() == std::vector<double>{-1.0, 0.0, 0.0, 0.0, 1.0});

    for (int n : {4, 7, 10}) {
        auto gini = lambda_for("gini-difs", n);
        for (int i = 1; i <= n; ++i)
            CHECK(close(gini.lambda()[i - 1], 2.0 / (n * n) * (2 * i - n - 1)));
    }

    MeasureParams win;
    win.r = 1;
    win.s = 1;
    auto wm = lambda_for("win-mean", 5, win);
    CHECK(wm.lambda() == std::vector<double>{0.0, 0.4, 0.2, 0.4, 0.0});
}

TEST_CASE("weight vector errors") {
    CHECK_THROWS_AS(lambda_for("no-such-measure", 5), MeasureError);

    MeasureParams bad;
    bad.r = 3;
    bad.s = 2;
    CHECK_THROWS_AS(lambda_for("trim-mean", 5, bad), MeasureError);

    MeasureParams q;
    q.q = 6;
    CHECK_THROWS_AS(lambda_for("quantile", 5, q), MeasureError);

    MeasureParams w;
    w.weights = std::vector<double>{0.5, 0.4};  // sums to 0.9
    CHECK_THROWS_AS(lambda_for("weighted-mean", 2, w), MeasureError);
}

TEST_CASE("difference decomposition round trip") {
    for (int n : {1, 2, 3, 5, 8, 13, 40}) {
        for (const auto& [name, params] : catalog_entries(n)) {
            if (n < 4 && (name == "win-mean" || name == "mid-mean" || name == "iqr" ||
                          name == "trim-mean" || name == "range"))
                continue;
            auto w = lambda_for(name, n, params);
            double run = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                run += w.delta()[k];
                CHECK(close(run, w.lambda()[k]));
            }
            for (int k : w.delta_plus()) CHECK(w.delta()[k] > 0);
            for (int k : w.delta_minus()) CHECK(w.delta()[k] < 0);
        }
    }
}

TEST_CASE("weight sums by measure family") {
    for (int n : {4, 9, 20, 50}) {
        MeasureParams trim;
        trim.r = std::max(1, n / 10);
        trim.s = std::max(1, n / 10);
        for (const char* name : {"mean", "trim-mean", "win-mean", "mid-mean", "median",
                                 "1quartile", "3quartile", "trimean", "midrange"}) {
            auto w = lambda_for(name, n, trim);
            CHECK_MESSAGE(close(w.lambda_sum(), 1.0), name << " n=" << n);
        }
        for (const char* name : {"range", "iqr", "gini-difs", "madev-median"}) {
            auto w = lambda_for(name, n, trim);
            CHECK_MESSAGE(close(w.lambda_sum(), 0.0), name << " n=" << n);
        }
    }
}

TEST_CASE("variance matrix entries and shape") {
    auto m = qo_matrix_for("variance", 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(close(m(i, j), (i == j ? (1.0 / 3) * (1 - 1.0 / 3) : (1.0 / 3) * (-1.0 / 3))));

    for (int n : {2, 3, 5, 8}) {
        auto v = qo_matrix_for("variance", n);
        double row_sum = 0;
        for (int i = 0; i < n; ++i) {
            row_sum = 0;
            for (int j = 0; j < n; ++j) {
                CHECK(close(v(i, j), v(j, i)));
                row_sum += v(i, j);
            }
            CHECK(close(row_sum, 0.0));
        }
        CHECK(min_eigenvalue(v.entries(), n) > -1e-12);
    }
}

TEST_CASE("squared-deviation matrix vs variance") {
    for (int n : {2, 4, 7}) {
        auto raw = msdev_from_lambda_matrix(lambda_for("mean", n));
        auto var = qo_matrix_for("variance", n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(close(raw(i, j) / n, var(i, j)));
    }
}

TEST_CASE("trimmed variance matrix") {
    MeasureParams p;
    p.r = 1;
    p.s = 1;
    auto m = qo_matrix_for("trim-variance", 5, p);
    // Middle 3x3 block of the deviation form, normalized by the window size.
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            bool inside = i >= 1 && i <= 3 && j >= 1 && j <= 3;
            double expect = 0.0;
            if (inside) expect = ((i == j ? 1.0 : 0.0) - 1.0 / 3) / 3.0;
            CHECK(close(m(i, j), expect));
        }
}

TEST_CASE("winsorized variance matrix matches its case table") {
    const int n = 7, r = 1, s = 2;
    MeasureParams p;
    p.r = r;
    p.s = s;
    auto m = qo_matrix_for("win-variance", n, p);
    auto expect = [&](int i, int j) -> double {  // 1-based, before the 1/n scale
        int lo = r + 1, hi = n - s;
        if (i == j && i == lo) return 1.0 + r - double(r + 1) * (r + 1) / n;
        if (i == j && i == hi) return 1.0 + s - double(s + 1) * (s + 1) / n;
        if (i == j && i > lo && i < hi) return 1.0 - 1.0 / n;
        if ((i == lo && j == hi) || (i == hi && j == lo))
            return -double(r * s + r + s + 1) / n;
        if ((i == lo && j > lo && j < hi) || (j == lo && i > lo && i < hi))
            return -double(r + 1) / n;
        if ((i == hi && j > lo && j < hi) || (j == hi && i > lo && i < hi))
            return -double(s + 1) / n;
        if (i > lo && i < hi && j > lo && j < hi && i != j) return -1.0 / n;
        return 0.0;
    };
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) CHECK(close(m(i - 1, j - 1), expect(i, j) / n));
}

TEST_CASE("measure spec grammar") {
    auto spec = parse_measure_spec("qo:trim-variance:r=1,s=1");
    CHECK(spec.cls == MeasureClass::Quadratic);
    CHECK(spec.name == "trim-variance");
    CHECK(*spec.params.r == 1);
    CHECK(*spec.params.s == 1);

    auto nested = parse_measure_spec("b:madev:lambda=median");
    CHECK(nested.cls == MeasureClass::Nested);
    CHECK(*nested.params.lambda_name == "median");
    auto resolved = resolve_measure(nested, 5);
    CHECK(resolved.nested.loss.kind == LossKind::Absolute);
    CHECK(resolved.nested.location.lambda()[2] == 1.0);

    CHECK(parse_measure_spec("l:mean").cls == MeasureClass::Linear);
    CHECK_THROWS_AS(parse_measure_spec("x:mean"), MeasureError);
    CHECK_THROWS_AS(parse_measure_spec("mean"), MeasureError);
    CHECK_THROWS_AS(parse_measure_spec("l:mean:oops"), MeasureError);

    CHECK(parse_measure_spec(spec.to_string()).name == "trim-variance");
}
