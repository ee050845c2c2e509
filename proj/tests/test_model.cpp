#include <cmath>

#include "doctest.h"
#include "ordmeas/model.hpp"
#include "ordmeas/numeric.hpp"

using namespace ordmeas;

TEST_CASE("variable ids are a deterministic sequence") {
    Model m;
    CHECK(m.add_continuous(0.0, kInf) == 0);
    CHECK(m.add_binary() == 1);
    CHECK(m.add_continuous(-kInf, kInf) == 2);
    CHECK_THROWS_AS(m.add_continuous(3.0, 2.0), ModelError);
    CHECK_THROWS_AS(m.add_variable(-1.0, 2.0, VarKind::Binary), ModelError);
}

TEST_CASE("constraints reference declared variables only") {
    Model m;
    VarId x = m.add_continuous(0.0, 1.0);
    LinearExpression e;
    e.add_term(x, 1.0);
    m.add_constraint(e, Sense::LessEqual, 1.0);
    LinearExpression bad;
    bad.add_term(57, 1.0);
    CHECK_THROWS_AS(m.add_constraint(bad, Sense::Equal, 0.0), ModelError);
    CHECK_THROWS_AS(m.add_sos1({x}), ModelError);
}

TEST_CASE("binary product envelope") {
    Model m;
    VarId z = m.add_binary("z");
    VarId x = m.add_continuous(0.0, 10.0, "x");
    LinearExpression xe;
    xe.add_term(x, 1.0);
    VarId p = m.add_mccormick_product(z, xe, 0.0, 10.0, "p");

    auto feasible = [&](double zv, double xv, double pv) {
        std::vector<double> point(m.num_variables(), 0.0);
        point[z] = zv;
        point[x] = xv;
        point[p] = pv;
        for (const auto& c : m.constraints()) {
            double act = c.expr.value(point);
            if (c.sense == Sense::LessEqual && act > c.rhs + 1e-9) return false;
            if (c.sense == Sense::GreaterEqual && act < c.rhs - 1e-9) return false;
            if (c.sense == Sense::Equal && std::abs(act - c.rhs) > 1e-9) return false;
        }
        return true;
    };

    // Exact at binary z: the only feasible p is z*x.
    CHECK(feasible(1.0, 7.0, 7.0));
    CHECK(!feasible(1.0, 7.0, 6.5));
    CHECK(feasible(0.0, 7.0, 0.0));
    CHECK(!feasible(0.0, 7.0, 0.5));

    // Fractional z admits only points inside the envelope.
    SplitMix64 rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        double zv = rng.next_unit();
        double xv = 10.0 * rng.next_unit();
        double pv = 10.0 * rng.next_unit();
        bool inside = pv <= 10.0 * zv + 1e-9 && pv >= 0.0 - 1e-9 &&
                      pv <= xv + 1e-9 && pv >= xv - 10.0 * (1 - zv) - 1e-9;
        CHECK(feasible(zv, xv, pv) == inside);
    }

    LinearExpression unbounded_x;
    unbounded_x.add_term(m.add_continuous(-kInf, kInf), 1.0);
    CHECK_THROWS_AS(m.add_mccormick_product(z, unbounded_x, -kInf, 3.0), ModelError);
    CHECK_THROWS_AS(m.add_mccormick_product(x, xe, 0.0, 1.0), ModelError);
}

TEST_CASE("squared expression expansion") {
    Model m;
    VarId a = m.add_continuous(-kInf, kInf);
    VarId b = m.add_continuous(-kInf, kInf);
    LinearExpression e(1.5);  // 2a - b + 1.5
    e.add_term(a, 2.0);
    e.add_term(b, -1.0);
    m.objective().add_squared_expression(e, 0.5);

    SplitMix64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> point = {rng.next_unit() * 4 - 2, rng.next_unit() * 4 - 2};
        double want = 0.5 * std::pow(2 * point[0] - point[1] + 1.5, 2);
        CHECK(m.objective().value(point) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("serialize and parse round trip") {
    Model empty;
    Model back = parse_model(serialize(empty));
    CHECK(models_equal(empty, back));

    Model m;
    VarId x = m.add_continuous(0.0, kInf, "x");
    VarId z = m.add_binary("pick");
    VarId f = m.add_continuous(-kInf, kInf);
    LinearExpression e;
    e.add_term(x, 1.25);
    e.add_term(z, -3.0);
    m.add_constraint(e, Sense::LessEqual, 10.0, "cap");
    LinearExpression e2;
    e2.add_term(f, 1.0 / 3.0);
    m.add_constraint(e2, Sense::Equal, -1.0);
    m.add_sos1({x, f});
    m.objective().sense = ObjSense::Minimize;
    m.objective().linear.add_term(x, 1e-17);
    m.objective().linear.add_constant(2.5);
    m.objective().add_quadratic_term(x, f, 0.75);

    std::string text = serialize(m);
    Model parsed = parse_model(text);
    CHECK(models_equal(m, parsed));
    CHECK(serialize(parsed) == text);

    // Identical construction gives identical text.
    Model m2;
    m2.add_continuous(0.0, kInf, "x");
    m2.add_binary("pick");
    m2.add_continuous(-kInf, kInf);
    CHECK(serialize(m2) != text);
}

TEST_CASE("parse errors carry line positions") {
    std::string text = serialize(Model());
    std::string truncated = text.substr(0, text.size() - 4);
    CHECK_THROWS_WITH_AS(parse_model(truncated), doctest::Contains("line"), ModelError);

    CHECK_THROWS_AS(parse_model("not a model\n"), ModelError);
    CHECK_THROWS_AS(parse_model("ordmeas-model 1\nminimize\nvar 3 0 1 cont -\nend\n"),
                    ModelError);
    CHECK_THROWS_AS(parse_model("ordmeas-model 1\nminimize\ncon le zz 0 -\nend\n"),
                    ModelError);
}

TEST_CASE("mps export contains the main sections") {
    Model m;
    VarId x = m.add_continuous(0.0, 4.0, "x");
    VarId z = m.add_binary("z");
    LinearExpression e;
    e.add_term(x, 1.0);
    e.add_term(z, 2.0);
    m.add_constraint(e, Sense::LessEqual, 4.0);
    m.add_sos1({x, z});
    m.objective().linear.add_term(x, -1.0);
    std::string mps = to_mps(m);
    for (const char* section : {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "SOS", "ENDATA"})
        CHECK(mps.find(section) != std::string::npos);
    CHECK(mps.find("'INTORG'") != std::string::npos);
}
