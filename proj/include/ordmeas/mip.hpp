#pragma once

#include <iosfwd>

#include "ordmeas/simplex.hpp"

namespace ordmeas {

enum class MIPStatus { Optimal, Infeasible, NodeLimit, Unbounded, NumericalFailure };

const char* to_string(MIPStatus s);

/// Raised when outer approximation detects a non-convex quadratic
/// objective (a fresh tangent cut fails to separate the incumbent point).
struct NonconvexObjectiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MIPOptions {
    LPOptions lp;
    double int_tol = 1e-6;    // binary integrality tolerance
    double gap_abs = 1e-6;    // absolute optimality gap
    double gap_rel = 1e-8;    // relative optimality gap
    double oa_tol = 1e-6;     // tangent-cut violation tolerance
    long node_limit = 1000000;
    double time_limit_seconds = 0.0;  // 0 disables the limit
    bool dive_for_incumbent = true;   // rounding dive at the root
    bool sos_before_binaries = false; // branch violated SOS1 sets first
    std::ostream* log = nullptr;      // optional solve log
};

struct MIPSolution {
    MIPStatus status = MIPStatus::NumericalFailure;
    std::vector<double> values;  // per original model variable
    double objective = 0.0;      // incumbent objective (exact, not epigraph)
    double bound = 0.0;          // proven bound in the model's sense
    long nodes = 0;
    long lp_iterations = 0;

    bool optimal() const { return status == MIPStatus::Optimal; }
};

/// Branch-and-bound over binaries and SOS1 sets; convex quadratic
/// objectives are handled by epigraph outer approximation. Deterministic:
/// best-bound node selection with depth and creation-order tie-breaks,
/// most-fractional branching with lowest-id tie-break.
MIPSolution solve_mip(const Model& model, const MIPOptions& options = {});

/// Entry point for models whose objective carries a PSD quadratic part.
MIPSolution solve_convex_qp_mip(const Model& model, const MIPOptions& options = {});

}  // namespace ordmeas
