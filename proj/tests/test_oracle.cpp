#include <algorithm>
#include <numeric>
#include <cmath>

#include "doctest.h"
#include "ordmeas/catalog.hpp"
#include "ordmeas/numeric.hpp"
#include "ordmeas/oracle.hpp"

using namespace ordmeas;

namespace {

Sample random_sample(SplitMix64& rng, int n, double lo = 0.0, double hi = 100.0) {
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * rng.next_unit();
    return Sample(v);
}

Sample shuffled(const Sample& x, SplitMix64& rng) {
    std::vector<double> v = x.values();
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
        std::swap(v[i], v[rng.next_below(i + 1)]);
    return Sample(v);
}

}  // namespace

TEST_CASE("sorted view is a stable ascending sort") {
    Sample x({3.0, 1.0, 2.0, 1.0});
    SortedView view(x);
    CHECK(view.sorted == std::vector<double>{1.0, 1.0, 2.0, 3.0});
    CHECK(view.order == std::vector<int>{1, 3, 2, 0});
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(x[view.order[k]] == view.sorted[k]);
}

TEST_CASE("weighted sorted sums") {
    Sample x({3.0, 1.0, 2.0});
    CHECK(eval_l(x, lambda_for("mean", 3)) == doctest::Approx(2.0));
    CHECK(eval_l(x, lambda_for("max", 3)) == doctest::Approx(3.0));

    MeasureParams p;
    p.r = 1;
    p.s = 1;
    Sample y({1.0, 2.0, 3.0, 4.0, 10.0});
    CHECK(eval_l(y, lambda_for("win-mean", 5, p)) == doctest::Approx(3.0));

    SplitMix64 rng(12345);
    for (int rep = 0; rep < 5; ++rep) {
        Sample z = random_sample(rng, 10);
        double pairwise = 0.0;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) pairwise += std::abs(z[i] - z[j]);
        pairwise /= 100.0;
        CHECK(eval_l(z, lambda_for("gini-difs", 10)) == doctest::Approx(pairwise).epsilon(1e-9));
    }

    CHECK_THROWS_AS(eval_l(x, lambda_for("mean", 4)), InvalidInput);
}

TEST_CASE("partial sorted sums") {
    Sample x({3.0, 1.0, 2.0});
    CHECK(eval_ksum(x, 2) == doctest::Approx(5.0));
    CHECK(eval_ksum(x, 1) == doctest::Approx(6.0));
    CHECK(eval_ksum(x, 3) == doctest::Approx(3.0));
    CHECK_THROWS_AS(eval_ksum(x, 0), InvalidInput);
    CHECK_THROWS_AS(eval_ksum(x, 4), InvalidInput);

    SplitMix64 rng(7);
    Sample y = random_sample(rng, 12);
    CHECK(eval_ksum(y, 1) ==
          doctest::Approx(std::accumulate(y.values().begin(), y.values().end(), 0.0)));
    CHECK(eval_ksum(y, 12) ==
          doctest::Approx(*std::max_element(y.values().begin(), y.values().end())));
    for (int k = 1; k < 12; ++k) CHECK(eval_ksum(y, k) >= eval_ksum(y, k + 1) - 1e-12);
}

TEST_CASE("nested losses around a pinned location") {
    Sample x({1.0, 2.0, 9.0});
    CHECK(eval_nested(x, lambda_for("median", 3), {LossKind::Absolute}) ==
          doctest::Approx(8.0 / 3));

    Sample y({1.0, 2.0, 3.0});
    CHECK(eval_nested(y, lambda_for("mean", 3), {LossKind::Squared}) ==
          doctest::Approx(2.0 / 3));
    CHECK(eval_nested(y, lambda_for("mean", 3), {LossKind::Skewness}) ==
          doctest::Approx(0.0));
    CHECK(eval_nested(y, lambda_for("mean", 3), {LossKind::Kurtosis}) ==
          doctest::Approx(1.5));

    Sample flat({5.0, 5.0, 5.0});
    CHECK_THROWS_AS(eval_nested(flat, lambda_for("mean", 3), {LossKind::Skewness}),
                    InvalidInput);
}

TEST_CASE("quadratic sorted forms") {
    Sample x({1.0, 2.0, 3.0});
    CHECK(eval_qo(x, qo_matrix_for("variance", 3)) == doctest::Approx(2.0 / 3));

    Sample flat({5.0, 5.0, 5.0});
    MeasureParams p;
    p.r = 1;
    p.s = 1;
    CHECK(eval_qo(flat, qo_matrix_for("win-variance", 3, p)) == doctest::Approx(0.0));
    CHECK(eval_qo(flat, qo_matrix_for("variance", 3)) == doctest::Approx(0.0));

    Sample y({1.0, 2.0, 3.0, 4.0, 10.0});
    CHECK(eval_qo(y, qo_matrix_for("trim-variance", 5, p)) == doctest::Approx(2.0 / 3));

    // Extended form with a linear block appended.
    auto m = qo_matrix_for("variance", 3);
    m.set_linear_part(lambda_for("mean", 3).lambda());
    CHECK(eval_qo(x, m) == doctest::Approx(2.0 / 3 + 2.0));
}

TEST_CASE("permutation, scaling, and tie invariance") {
    SplitMix64 rng(99);
    for (int rep = 0; rep < 10; ++rep) {
        Sample x = random_sample(rng, 9);
        auto w = lambda_for("madev-median", 9);
        auto m = qo_matrix_for("variance", 9);
        double l0 = eval_l(x, w);
        double q0 = eval_qo(x, m);
        double n0 = eval_nested(x, lambda_for("median", 9), {LossKind::Absolute});
        for (int p = 0; p < 4; ++p) {
            Sample y = shuffled(x, rng);
            CHECK(eval_l(y, w) == doctest::Approx(l0).epsilon(1e-12));
            CHECK(eval_qo(y, m) == doctest::Approx(q0).epsilon(1e-12));
            CHECK(eval_nested(y, lambda_for("median", 9), {LossKind::Absolute}) ==
                  doctest::Approx(n0).epsilon(1e-12));
        }

        double a = 2.5, c = 7.0;
        std::vector<double> scaled, shifted;
        for (double v : x.values()) {
            scaled.push_back(a * v);
            shifted.push_back(v + c);
        }
        CHECK(eval_l(Sample(scaled), w) == doctest::Approx(a * l0).epsilon(1e-12));
        CHECK(eval_l(Sample(shifted), w) ==
              doctest::Approx(l0 + c * w.lambda_sum()).epsilon(1e-12));
    }

    // Repeated values: any tie order gives the same results.
    Sample ties({2.0, 1.0, 2.0, 1.0, 2.0});
    Sample ties2({1.0, 2.0, 2.0, 2.0, 1.0});
    auto w = lambda_for("gini-difs", 5);
    CHECK(eval_l(ties, w) == doctest::Approx(eval_l(ties2, w)));
}

TEST_CASE("difference-of-partial-sums identity") {
    SplitMix64 rng(4242);
    for (int n : {3, 6, 11, 20}) {
        for (int rep = 0; rep < 20; ++rep) {
            Sample x = random_sample(rng, n);
            MeasureParams p;
            p.r = std::max(1, n / 10);
            p.s = std::max(1, n / 10);
            for (const auto& name : linear_catalog_names()) {
                if (n < 4 && name != "mean" && name != "median" && name != "range") continue;
                auto w = lambda_for(name, n, p);
                double via_ksum = 0.0;
                for (std::size_t k = 0; k < w.size(); ++k)
                    if (w.delta()[k] != 0.0)
                        via_ksum += w.delta()[k] * eval_ksum(x, static_cast<int>(k) + 1);
                CHECK_MESSAGE(std::abs(eval_l(x, w) - via_ksum) <= 1e-9,
                              name << " n=" << n);
            }
        }
    }
}

TEST_CASE("squared nested loss equals its quadratic form") {
    SplitMix64 rng(31337);
    for (int n : {2, 3, 5, 8}) {
        for (const char* loc : {"mean", "median", "max", "3quartile"}) {
            Sample x = random_sample(rng, n);
            auto w = lambda_for(loc, n);
            double nested = eval_nested(x, w, {LossKind::Squared});
            double qo = eval_qo(x, msdev_from_lambda_matrix(w));
            CHECK(std::abs(nested * n - qo) <= 1e-9 * std::max(1.0, std::abs(qo)));
        }
    }
    // A constant vector has zero deviation under any location weights.
    for (int n : {2, 5, 9}) {
        Sample flat(std::vector<double>(n, 3.25));
        auto w = lambda_for("3quartile", n);
        CHECK(eval_qo(flat, msdev_from_lambda_matrix(w)) == doctest::Approx(0.0));
    }
}

TEST_CASE("linear and nested forms of the median deviation agree") {
    SplitMix64 rng(5150);
    for (int n : {4, 5, 9, 10, 17}) {
        for (int rep = 0; rep < 10; ++rep) {
            Sample x = random_sample(rng, n);
            double via_lambda = eval_l(x, lambda_for("madev-median", n));
            double via_nested =
                eval_nested(x, lambda_for("median", n), {LossKind::Absolute});
            CHECK(std::abs(via_lambda - via_nested) <= 1e-10);
        }
    }
}
