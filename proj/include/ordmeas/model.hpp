#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ordmeas/types.hpp"

namespace ordmeas {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when building or parsing a model fails.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using VarId = int;

enum class VarKind { Continuous, Binary };

struct Variable {
    double lower = -kInf;
    double upper = kInf;
    VarKind kind = VarKind::Continuous;
    std::string name;  // optional, kept through serialization
};

/// Sparse linear form: coefficient map plus a constant offset. Zero
/// coefficients are dropped on insertion.
class LinearExpression {
  public:
    LinearExpression() = default;
    explicit LinearExpression(double constant) : constant_(constant) {}

    void add_term(VarId v, double coef) {
        if (coef == 0.0) return;
        if (!std::isfinite(coef))
            throw ModelError("LinearExpression: coefficient must be finite");
        auto [it, inserted] = coef_.emplace(v, coef);
        if (!inserted) {
            it->second += coef;
            if (it->second == 0.0) coef_.erase(it);
        }
    }
    void add_constant(double c) { constant_ += c; }
    void add_scaled(const LinearExpression& other, double scale) {
        for (const auto& [v, c] : other.coef_) add_term(v, scale * c);
        constant_ += scale * other.constant_;
    }

    double constant() const { return constant_; }
    const std::map<VarId, double>& terms() const { return coef_; }
    bool empty() const { return coef_.empty(); }

    double value(const std::vector<double>& point) const {
        double s = constant_;
        for (const auto& [v, c] : coef_) s += c * point[static_cast<std::size_t>(v)];
        return s;
    }

  private:
    std::map<VarId, double> coef_;
    double constant_ = 0.0;
};

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Constraint {
    LinearExpression expr;  // constant folded into rhs on construction
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
    std::string name;
};

/// At most one member variable may be nonzero in a feasible solution.
struct SOS1Set {
    std::vector<VarId> members;
};

/// Symmetric sparse quadratic form: the map holds the full coefficient of
/// the product v_i * v_j keyed by (i,j) with i <= j.
using QuadraticTerms = std::map<std::pair<VarId, VarId>, double>;

enum class ObjSense { Minimize, Maximize };

struct Objective {
    ObjSense sense = ObjSense::Minimize;
    LinearExpression linear;
    QuadraticTerms quadratic;

    bool is_quadratic() const { return !quadratic.empty(); }
    void add_quadratic_term(VarId a, VarId b, double coef) {
        if (coef == 0.0) return;
        auto key = a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
        quadratic[key] += coef;
        if (quadratic[key] == 0.0) quadratic.erase(key);
    }
    /// Adds weight * (expr)^2 to the objective.
    void add_squared_expression(const LinearExpression& expr, double weight);

    double value(const std::vector<double>& point) const {
        double s = linear.value(point);
        for (const auto& [key, c] : quadratic)
            s += c * point[static_cast<std::size_t>(key.first)] *
                 point[static_cast<std::size_t>(key.second)];
        return s;
    }
};

/// Self-contained optimization model: variables with bounds and
/// integrality, linear constraints, SOS1 sets, and a linear or convex
/// quadratic objective.
class Model {
  public:
    VarId add_variable(double lower, double upper, VarKind kind = VarKind::Continuous,
                       std::string name = {});
    VarId add_continuous(double lower, double upper, std::string name = {}) {
        return add_variable(lower, upper, VarKind::Continuous, std::move(name));
    }
    VarId add_binary(std::string name = {}) {
        return add_variable(0.0, 1.0, VarKind::Binary, std::move(name));
    }

    int add_constraint(LinearExpression expr, Sense sense, double rhs,
                       std::string name = {});
    void add_sos1(std::vector<VarId> members);

    /// Adds a variable p equal to z * x at binary z, where x is a linear
    /// expression with certified finite bounds [lower, upper]. The four
    /// envelope constraints make the product exact for z in {0,1}.
    VarId add_mccormick_product(VarId z, const LinearExpression& x, double lower,
                                double upper, const std::string& name = {});

    std::size_t num_variables() const { return variables_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<SOS1Set>& sos1_sets() const { return sos1_; }
    const Variable& variable(VarId v) const { return variables_[static_cast<std::size_t>(v)]; }

    Objective& objective() { return objective_; }
    const Objective& objective() const { return objective_; }

    bool has_integer_variables() const;
    void check_var(VarId v) const;

  private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<SOS1Set> sos1_;
    Objective objective_;
};

/// Canonical line-oriented text format; 17 significant digits, lossless.
std::string serialize(const Model& model);
/// Inverse of serialize. Reports the line number of the first defect.
Model parse_model(const std::string& text);

/// Free-form MPS export (minimization; SOS and QUADOBJ sections included
/// when present) for cross-checks against external tools.
std::string to_mps(const Model& model, const std::string& name = "ORDMEAS");

bool models_equal(const Model& a, const Model& b);

}  // namespace ordmeas
