#include "ordmeas/model.hpp"

namespace ordmeas {

void Objective::add_squared_expression(const LinearExpression& expr, double weight) {
    if (weight == 0.0) return;
    const auto& terms = expr.terms();
    for (auto it = terms.begin(); it != terms.end(); ++it) {
        for (auto jt = it; jt != terms.end(); ++jt) {
            double c = it->second * jt->second * weight;
            if (it != jt) c *= 2.0;
            add_quadratic_term(it->first, jt->first, c);
        }
        linear.add_term(it->first, 2.0 * weight * expr.constant() * it->second);
    }
    linear.add_constant(weight * expr.constant() * expr.constant());
}

VarId Model::add_variable(double lower, double upper, VarKind kind, std::string name) {
    if (std::isnan(lower) || std::isnan(upper))
        throw ModelError("add_variable: bounds must not be NaN");
    if (lower > upper)
        throw ModelError("add_variable: lower bound exceeds upper bound");
    if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
        throw ModelError("add_variable: binary bounds must lie within [0,1]");
    Variable v;
    v.lower = lower;
    v.upper = upper;
    v.kind = kind;
    v.name = std::move(name);
    variables_.push_back(std::move(v));
    return static_cast<VarId>(variables_.size()) - 1;
}

void Model::check_var(VarId v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= variables_.size())
        throw ModelError("model references undeclared variable id " + std::to_string(v));
}

int Model::add_constraint(LinearExpression expr, Sense sense, double rhs, std::string name) {
    if (!std::isfinite(rhs)) throw ModelError("add_constraint: rhs must be finite");
    for (const auto& [v, c] : expr.terms()) check_var(v);
    // Fold the expression constant into the right-hand side.
    rhs -= expr.constant();
    LinearExpression folded;
    for (const auto& [v, c] : expr.terms()) folded.add_term(v, c);
    Constraint con;
    con.expr = std::move(folded);
    con.sense = sense;
    con.rhs = rhs;
    con.name = std::move(name);
    constraints_.push_back(std::move(con));
    return static_cast<int>(constraints_.size()) - 1;
}

void Model::add_sos1(std::vector<VarId> members) {
    if (members.size() < 2) throw ModelError("add_sos1: a set needs at least two members");
    for (VarId v : members) check_var(v);
    sos1_.push_back(SOS1Set{std::move(members)});
}

VarId Model::add_mccormick_product(VarId z, const LinearExpression& x, double lower,
                                   double upper, const std::string& name) {
    check_var(z);
    if (variable(z).kind != VarKind::Binary)
        throw ModelError("add_mccormick_product: z must be binary");
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper)
        throw ModelError("add_mccormick_product: x needs finite bounds");
    VarId p = add_continuous(std::min(0.0, lower), std::max(0.0, upper), name);

    LinearExpression c1;  // p - upper * z <= 0
    c1.add_term(p, 1.0);
    c1.add_term(z, -upper);
    add_constraint(std::move(c1), Sense::LessEqual, 0.0);

    LinearExpression c2;  // p - lower * z >= 0
    c2.add_term(p, 1.0);
    c2.add_term(z, -lower);
    add_constraint(std::move(c2), Sense::GreaterEqual, 0.0);

    LinearExpression c3;  // p - x - lower * z <= -lower
    c3.add_term(p, 1.0);
    c3.add_scaled(x, -1.0);
    c3.add_term(z, -lower);
    add_constraint(std::move(c3), Sense::LessEqual, -lower);

    LinearExpression c4;  // p - x - upper * z >= -upper
    c4.add_term(p, 1.0);
    c4.add_scaled(x, -1.0);
    c4.add_term(z, -upper);
    add_constraint(std::move(c4), Sense::GreaterEqual, -upper);
    return p;
}

bool Model::has_integer_variables() const {
    for (const auto& v : variables_)
        if (v.kind == VarKind::Binary) return true;
    return false;
}

bool models_equal(const Model& a, const Model& b) {
    return serialize(a) == serialize(b);
}

}  // namespace ordmeas
