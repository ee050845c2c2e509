#pragma once

#include <array>
#include <string>
#include <vector>

#include "ordmeas/catalog.hpp"
#include "ordmeas/mip.hpp"
#include "ordmeas/model.hpp"
#include "ordmeas/oracle.hpp"

namespace ordmeas {

/// A built optimization model plus the handles needed to interpret its
/// solution.
struct BuiltModel {
    Model model;

    // Ordering assignment variables, row-major (i * n + k), when present.
    std::vector<VarId> ordering;
    // Product variables of the quadratic linearization: (i, j, k, l) -> y.
    std::vector<std::pair<std::array<int, 4>, VarId>> products;

    // Nested builders: the pinned location variable, and whether the loss
    // is evaluated arithmetically after the solve.
    VarId theta = -1;
    bool post_evaluate = false;
    LossSpec loss;

    // Independent split of the objective into a minimization part, a
    // maximization part, and an additive constant (value = plus - minus +
    // constant), exposed by the pure-LP builders.
    bool has_split = false;
    Model plus;
    Model minus;
    double constant = 0.0;
};

/// Assignment-based integer model: ordering binaries place each value in
/// a sorted slot, monotonicity rows force the ascending order, and the
/// objective prices slot k at lambda_k.
BuiltModel build_l1(const Sample& x, const LambdaWeights& w);

/// Partial-sum LP: one covering block per positive difference and one
/// selection block per negative difference.
BuiltModel build_l2(const Sample& x, const LambdaWeights& w);

/// Pinball-loss LP: one quantile-regression block per positive
/// difference, one dual transport block per negative difference, plus a
/// data constant.
BuiltModel build_l3(const Sample& x, const LambdaWeights& w);

/// Location-pinning systems: theta is forced to the weighted sorted
/// aggregate by a primal/dual pair of equalities, then the loss is
/// attached (absolute via SOS1 residual pairs, squared via a convex
/// quadratic objective, shape losses via post-evaluation).
BuiltModel build_nested_b1(const Sample& x, const LambdaWeights& w, const LossSpec& loss);
BuiltModel build_nested_b2(const Sample& x, const LambdaWeights& w, const LossSpec& loss);

/// Linearized quadratic ordering model: binaries place values in slots
/// and product variables carry the slot-pair terms.
BuiltModel build_qo(const Sample& x, const QOMatrix& m);

enum class Method { L1, L2, L3, B1, B2, QO };
Method parse_method(const std::string& name);
const char* to_string(Method m);

struct ComputeResult {
    double value = 0.0;
    double seconds = 0.0;
    long nodes = 0;
    long lp_iterations = 0;
    std::string status;

    bool ok() const { return status == "optimal"; }
};

/// Build the model for (measure, method), solve it, and report the value.
/// Throws MeasureError when the measure has no representation for the
/// requested method.
ComputeResult compute(const Sample& x, const std::string& measure,
                      const MeasureParams& params, Method method,
                      const MIPOptions& options = {});

/// Convenience overload building from an already-built model.
ComputeResult solve_built(const Sample& x, const BuiltModel& built,
                          Method method, const MIPOptions& options = {});

struct SplitValue {
    double plus = 0.0;
    double minus = 0.0;
    double constant = 0.0;
    double total() const { return plus - minus + constant; }
};

/// Solves the two independent halves of a split LP builder.
SplitValue solve_split(const BuiltModel& built, const LPOptions& options = {});

/// Loss of a sample around a fixed location value (absolute and squared
/// losses averaged over n, shape losses standardized).
double loss_at(const Sample& x, double theta, const LossSpec& loss);

}  // namespace ordmeas
