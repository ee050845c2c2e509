#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ordmeas/mip.hpp"
#include "ordmeas/numeric.hpp"
#include "ordmeas/simplex.hpp"

using namespace ordmeas;

namespace {

LinearExpression term(VarId v, double c) {
    LinearExpression e;
    e.add_term(v, c);
    return e;
}

/// Enumeration oracle: try every binary assignment, solve the continuous
/// rest as an LP, keep the best.
struct EnumResult {
    bool feasible = false;
    double objective = 0.0;
};

EnumResult enumerate_binaries(const Model& model) {
    std::vector<VarId> bins;
    for (std::size_t j = 0; j < model.num_variables(); ++j)
        if (model.variables()[j].kind == VarKind::Binary)
            bins.push_back(static_cast<VarId>(j));
    EnumResult best;
    const bool maximize = model.objective().sense == ObjSense::Maximize;
    LPCore core(model, {});
    for (long mask = 0; mask < (1L << bins.size()); ++mask) {
        bool sos_ok = true;
        std::vector<double> lo(model.num_variables()), hi(model.num_variables());
        for (std::size_t j = 0; j < model.num_variables(); ++j) {
            lo[j] = model.variables()[j].lower;
            hi[j] = model.variables()[j].upper;
        }
        for (std::size_t b = 0; b < bins.size(); ++b)
            lo[bins[b]] = hi[bins[b]] = (mask >> b) & 1 ? 1.0 : 0.0;
        LPSolution lp = core.solve(lo, hi);
        if (lp.status != LPStatus::Optimal) continue;
        for (const auto& set : model.sos1_sets()) {
            int nz = 0;
            for (VarId m : set.members)
                if (std::abs(lp.values[m]) > 1e-6) ++nz;
            if (nz > 1) sos_ok = false;
        }
        if (!sos_ok) continue;
        if (!best.feasible || (maximize ? lp.objective > best.objective
                                        : lp.objective < best.objective)) {
            best.feasible = true;
            best.objective = lp.objective;
        }
    }
    return best;
}

Model random_milp(SplitMix64& rng, int n_bin, int n_cont, int n_rows) {
    Model m;
    for (int b = 0; b < n_bin; ++b) m.add_binary();
    for (int c = 0; c < n_cont; ++c) m.add_continuous(0.0, 10.0);
    const int nv = n_bin + n_cont;
    for (int r = 0; r < n_rows; ++r) {
        LinearExpression e;
        for (int j = 0; j < nv; ++j)
            if (rng.next_unit() < 0.6)
                e.add_term(j, std::round((rng.next_unit() * 10 - 4) * 100) / 100);
        if (e.empty()) e.add_term(rng.next_below(nv), 1.0);
        double rhs = std::round(rng.next_unit() * 1200) / 100;
        int s = rng.next_below(5);
        m.add_constraint(e, s == 0 ? Sense::GreaterEqual : Sense::LessEqual, rhs);
    }
    for (int j = 0; j < nv; ++j)
        m.objective().linear.add_term(j, std::round((rng.next_unit() * 10 - 5) * 100) / 100);
    return m;
}

}  // namespace

TEST_CASE("lp: epigraph of a maximum") {
    Model m;
    VarId g = m.add_continuous(-kInf, kInf, "gamma");
    for (double xi : {3.0, 1.0, 2.0}) {
        LinearExpression e;
        e.add_term(g, 1.0);
        m.add_constraint(e, Sense::GreaterEqual, xi);
    }
    m.objective().linear.add_term(g, 1.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.dual_objective == doctest::Approx(3.0));
}

TEST_CASE("lp: pinball loss picks the middle value") {
    // min 0.5*sum(u) + 0.5*sum(v), u_i - v_i + g = x_i
    Model m;
    const std::vector<double> x = {1.0, 2.0, 3.0};
    VarId g = m.add_continuous(-kInf, kInf, "gamma");
    for (double xi : x) {
        VarId u = m.add_continuous(0.0, kInf);
        VarId v = m.add_continuous(0.0, kInf);
        LinearExpression e;
        e.add_term(u, 1.0);
        e.add_term(v, -1.0);
        e.add_term(g, 1.0);
        m.add_constraint(e, Sense::Equal, xi);
        m.objective().linear.add_term(u, 0.5);
        m.objective().linear.add_term(v, 0.5);
    }
    auto sol = solve_lp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(1.0));
    CHECK(sol.values[g] == doctest::Approx(2.0));
}

TEST_CASE("lp: partial-sum pair is a strong-duality fixture") {
    const std::vector<double> x = {3.0, 1.0, 2.0};
    const int k = 2;
    // Selection form: max sum d_i x_i, sum d_i = n-k+1, 0 <= d <= 1.
    Model primal;
    LinearExpression sum;
    for (double xi : x) {
        VarId d = primal.add_continuous(0.0, 1.0);
        sum.add_term(d, 1.0);
        primal.objective().linear.add_term(d, xi);
    }
    primal.objective().sense = ObjSense::Maximize;
    primal.add_constraint(sum, Sense::Equal, 3.0 - k + 1.0);
    auto psol = solve_lp(primal);
    REQUIRE(psol.optimal());
    CHECK(psol.objective == doctest::Approx(5.0));
    CHECK(psol.dual_objective == doctest::Approx(psol.objective).epsilon(1e-9));

    // Covering form: min (n-k+1) t + sum v_i, t + v_i >= x_i.
    Model dual;
    VarId t = dual.add_continuous(-kInf, kInf);
    dual.objective().linear.add_term(t, 3.0 - k + 1.0);
    for (double xi : x) {
        VarId v = dual.add_continuous(0.0, kInf);
        LinearExpression e;
        e.add_term(t, 1.0);
        e.add_term(v, 1.0);
        dual.add_constraint(e, Sense::GreaterEqual, xi);
        dual.objective().linear.add_term(v, 1.0);
    }
    auto dsol = solve_lp(dual);
    REQUIRE(dsol.optimal());
    CHECK(dsol.objective == doctest::Approx(5.0));
    CHECK(dsol.dual_objective == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("lp: infeasible and unbounded detection") {
    Model m;
    VarId x = m.add_continuous(-kInf, kInf);
    m.add_constraint(term(x, 1.0), Sense::LessEqual, 0.0);
    m.add_constraint(term(x, 1.0), Sense::GreaterEqual, 1.0);
    m.objective().linear.add_term(x, 1.0);
    CHECK(solve_lp(m).status == LPStatus::Infeasible);

    Model u;
    VarId y = u.add_continuous(-kInf, kInf);
    u.add_constraint(term(y, 1.0), Sense::LessEqual, 5.0);
    u.objective().linear.add_term(y, 1.0);
    CHECK(solve_lp(u).status == LPStatus::Unbounded);
}

TEST_CASE("lp: degenerate covering problem still terminates") {
    // Many ties force degenerate pivots.
    Model m;
    VarId g = m.add_continuous(-kInf, kInf);
    for (int i = 0; i < 40; ++i)
        m.add_constraint(term(g, 1.0), Sense::GreaterEqual, 1.0);
    m.objective().linear.add_term(g, 1.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("mip: knapsack") {
    Model m;
    VarId a = m.add_binary("a");
    VarId b = m.add_binary("b");
    LinearExpression e;
    e.add_term(a, 2.0);
    e.add_term(b, 3.0);
    m.add_constraint(e, Sense::LessEqual, 3.0);
    m.objective().sense = ObjSense::Maximize;
    m.objective().linear.add_term(a, 3.0);
    m.objective().linear.add_term(b, 4.0);
    auto sol = solve_mip(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(4.0));
    CHECK(sol.values[b] == doctest::Approx(1.0));
}

TEST_CASE("mip: complementarity pair via sos1") {
    Model m;
    VarId rp = m.add_continuous(0.0, kInf, "rp");
    VarId rm = m.add_continuous(0.0, kInf, "rm");
    LinearExpression e;
    e.add_term(rp, 1.0);
    e.add_term(rm, -1.0);
    m.add_constraint(e, Sense::Equal, -2.0);
    m.add_sos1({rp, rm});
    m.objective().linear.add_term(rp, 1.0);
    m.objective().linear.add_term(rm, 1.0);
    auto sol = solve_mip(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.values[rp] == doctest::Approx(0.0));
    CHECK(sol.values[rm] == doctest::Approx(2.0));
}

TEST_CASE("qp: scalar parabola and binary-pinned maximum") {
    Model m;
    VarId v = m.add_continuous(0.0, 5.0, "v");
    m.objective().add_quadratic_term(v, v, 1.0);
    m.objective().linear.add_term(v, -4.0);
    m.objective().linear.add_constant(4.0);
    auto sol = solve_convex_qp_mip(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(sol.values[v] == doctest::Approx(2.0).epsilon(1e-3));

    const std::vector<double> x = {1.0, 2.0, 3.0};
    Model m2;
    VarId t = m2.add_continuous(0.0, 10.0, "t");
    std::vector<VarId> pick;
    LinearExpression one;
    for (double xi : x) {
        VarId d = m2.add_binary();
        pick.push_back(d);
        one.add_term(d, 1.0);
        m2.add_constraint(term(t, 1.0), Sense::GreaterEqual, xi);
        LinearExpression cap;  // t <= x_i + 10 (1 - d_i)
        cap.add_term(t, 1.0);
        cap.add_term(d, 10.0);
        m2.add_constraint(cap, Sense::LessEqual, xi + 10.0);
    }
    m2.add_constraint(one, Sense::Equal, 1.0);
    for (double xi : x) {
        LinearExpression dev(-xi);
        dev.add_term(t, 1.0);
        m2.objective().add_squared_expression(dev, 1.0);
    }
    auto sol2 = solve_convex_qp_mip(m2);
    REQUIRE(sol2.optimal());
    CHECK(sol2.objective == doctest::Approx(5.0).epsilon(1e-5));
    CHECK(sol2.values[t] == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("qp: indefinite objective is rejected") {
    Model m;
    VarId a = m.add_continuous(0.0, 1.0);
    VarId b = m.add_continuous(0.0, 1.0);
    m.objective().add_quadratic_term(a, b, 1.0);  // xy is indefinite
    CHECK_THROWS_AS(solve_convex_qp_mip(m), NonconvexObjectiveError);
}

TEST_CASE("mip: matches binary enumeration on random instances") {
    SplitMix64 rng(20240801);
    int checked = 0;
    for (int rep = 0; rep < 40; ++rep) {
        int nb = 2 + rng.next_below(6);
        int nc = rng.next_below(3);
        int nr = 2 + rng.next_below(4);
        Model m = random_milp(rng, nb, nc, nr);
        EnumResult oracle = enumerate_binaries(m);
        auto sol = solve_mip(m);
        if (oracle.feasible) {
            REQUIRE_MESSAGE(sol.optimal(), "rep " << rep);
            CHECK_MESSAGE(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-7),
                          "rep " << rep);
            ++checked;
        } else {
            CHECK(sol.status == MIPStatus::Infeasible);
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("mip: deterministic replay and monotone bound trail") {
    SplitMix64 rng(777);
    Model m = random_milp(rng, 8, 2, 5);
    std::ostringstream log1, log2;
    MIPOptions opts;
    opts.log = &log1;
    auto a = solve_mip(m, opts);
    opts.log = &log2;
    auto b = solve_mip(m, opts);
    CHECK(a.status == b.status);
    CHECK(a.nodes == b.nodes);
    if (a.optimal()) CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-15));
    CHECK(log1.str() == log2.str());

    // Best-bound order means the printed bounds never decrease.
    std::istringstream in(log1.str());
    std::string word;
    double prev = -1e300;
    while (in >> word) {
        if (word == "bound") {
            double v;
            in >> v;
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
}
