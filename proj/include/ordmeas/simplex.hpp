#pragma once

#include <memory>
#include <vector>

#include "ordmeas/model.hpp"

namespace ordmeas {

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

const char* to_string(LPStatus s);

/// Scratch counters for performance probes.
struct LPPerfCounters {
    double factor_seconds = 0;
    long factorizations = 0;
    long lu_nnz = 0;
};
extern LPPerfCounters g_lp_perf;

struct LPOptions {
    double feas_tol = 1e-7;     // primal feasibility tolerance
    double opt_tol = 1e-9;      // reduced-cost tolerance
    double pivot_tol = 1e-11;   // smallest acceptable pivot magnitude
    int refactor_interval = 50; // pivots between basis refactorizations
    bool use_devex = true;      // reference-weight pricing (Dantzig otherwise)
    long max_iterations = -1;   // -1 picks a size-based default
};

struct LPSolution {
    LPStatus status = LPStatus::NumericalFailure;
    std::vector<double> values;  // one entry per model variable
    std::vector<double> duals;   // one entry per constraint (cuts excluded)
    double objective = 0.0;
    double dual_objective = 0.0;
    long iterations = 0;

    bool optimal() const { return status == LPStatus::Optimal; }
};

/// Revised primal simplex over the columns of a fixed model. Bounds are
/// supplied per solve, so branch-and-bound nodes reuse one instance; extra
/// rows (cutting planes) may be appended per solve as well.
///
/// The basis is held as a sparse LU factorization with product-form
/// updates between refactorizations. Dantzig pricing is used until a
/// degeneracy threshold trips Bland's rule.
class LPCore {
  public:
    explicit LPCore(const Model& model, const LPOptions& options = {});
    ~LPCore();
    LPCore(const LPCore&) = delete;
    LPCore& operator=(const LPCore&) = delete;

    /// Solves min/max of the model objective subject to the model rows,
    /// the given variable bounds, and the extra rows.
    LPSolution solve(const std::vector<double>& lower, const std::vector<double>& upper,
                     const std::vector<Constraint>& extra_rows = {});

    const Model& model() const;

  private:
    LPStatus run_to_optimality();

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot solve of a continuous model (no binaries, no SOS1).
LPSolution solve_lp(const Model& model, const LPOptions& options = {});

}  // namespace ordmeas
