#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ordmeas/types.hpp"

namespace ordmeas {

/// Optional parameters accepted by catalog entries.
struct MeasureParams {
    std::optional<int> r;                    // lower trim/winsorize count
    std::optional<int> s;                    // upper trim/winsorize count
    std::optional<double> tau;               // quantile level in (0,1)
    std::optional<int> q;                    // explicit 1-based sorted position
    std::optional<std::vector<double>> weights;  // weighted mean
    std::optional<std::string> lambda_name;  // location measure for nested/QO forms
};

/// Weight vector for a named location or scale measure of a sample of
/// size n. Known names: mean, weighted-mean, max, min, median, quantile,
/// 1quartile, 3quartile, midrange, gen-midrange, trimean, trim-mean,
/// mid-mean, win-mean, range, iqr, madev-median, gini-difs.
LambdaWeights lambda_for(const std::string& name, int n,
                         const MeasureParams& params = {});

/// Coefficient matrix for a named quadratic measure. Known names:
/// variance, msdev-mean, msdev-median, msdev-max, msdev-min,
/// trim-variance, win-variance, and the unscaled squared-deviation form
/// msdev-from-L (requires params.lambda_name or a weight vector length n).
QOMatrix qo_matrix_for(const std::string& name, int n,
                       const MeasureParams& params = {});

/// Squared-deviation matrix for an arbitrary weight vector: entry (i,i)
/// is 1 + n*l_i^2 - 2*l_i and entry (i,j), i != j, is n*l_i*l_j - 2*l_j,
/// so that the quadratic measure equals the sum of squared deviations of
/// the sample from its weighted sorted aggregate.
QOMatrix msdev_from_lambda_matrix(const LambdaWeights& w);

/// Location measure plus loss behind a named nested measure. Known names:
/// variance, msdev-median, msdev-max, msdev-min, madev-mean, madev-median,
/// madev-max, madev-min, skewness, kurtosis; also the generic forms
/// "madev"/"msdev" with params.lambda_name.
struct NestedSpec {
    LambdaWeights location;
    LossSpec loss;
};
NestedSpec nested_for(const std::string& name, int n,
                      const MeasureParams& params = {});

/// How a measure name is evaluated by the sorting oracle.
enum class MeasureClass { Linear, Nested, Quadratic };

/// Fully resolved measure: exactly one of the members is populated,
/// according to cls.
struct ResolvedMeasure {
    MeasureClass cls = MeasureClass::Linear;
    std::string name;
    LambdaWeights lambda;  // cls == Linear
    NestedSpec nested;     // cls == Nested
    QOMatrix matrix;       // cls == Quadratic
};

/// Resolve a catalog name against its canonical class for a sample of
/// size n (linear names stay linear, variance and friends are nested,
/// trim/win-variance are quadratic).
ResolvedMeasure resolve_measure(const std::string& name, int n,
                                const MeasureParams& params = {});

/// Parsed form of the CLI measure grammar
/// "<class>:<name>[:k=v,...]" with class one of l | b | qo.
struct MeasureSpec {
    MeasureClass cls = MeasureClass::Linear;
    std::string name;
    MeasureParams params;

    std::string to_string() const;
};

/// Parse the grammar above. Throws MeasureError on malformed input.
MeasureSpec parse_measure_spec(const std::string& text);

/// Resolve a parsed spec for a sample of size n.
ResolvedMeasure resolve_measure(const MeasureSpec& spec, int n);

/// The 11 linear measure names exercised by the sweep tables.
const std::vector<std::string>& linear_catalog_names();
/// The 10 nested measure names.
const std::vector<std::string>& nested_catalog_names();
/// The 6 quadratic measure names.
const std::vector<std::string>& quadratic_catalog_names();

}  // namespace ordmeas
