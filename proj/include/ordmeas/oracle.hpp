#pragma once

#include <cstddef>
#include <vector>

#include "ordmeas/catalog.hpp"
#include "ordmeas/types.hpp"

namespace ordmeas {

/// Stable ascending sort of a sample: `order[k]` is the 0-based index of
/// the value placed at sorted position k (ties keep the lower original
/// index first).
struct SortedView {
    std::vector<int> order;
    std::vector<double> sorted;

    explicit SortedView(const Sample& x);
};

/// Weighted sum of sorted values.
double eval_l(const Sample& x, const LambdaWeights& w);

/// Sum of the largest n-k+1 values (k is 1-based).
double eval_ksum(const Sample& x, int k);

/// Loss of the sample around its own weighted sorted aggregate. The
/// absolute and squared losses are averaged over n; skewness and kurtosis
/// are the standardized third and fourth moments and reject constant
/// samples.
double eval_nested(const Sample& x, const LambdaWeights& w, const LossSpec& loss);

/// Quadratic form over sorted values, plus the linear part if present.
double eval_qo(const Sample& x, const QOMatrix& m);

/// Evaluate any resolved measure on a plain vector of values.
double eval_measure(const Sample& x, const ResolvedMeasure& m);

}  // namespace ordmeas
