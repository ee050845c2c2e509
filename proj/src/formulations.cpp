#include "ordmeas/formulations.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace ordmeas {

namespace {

double sum(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

void require_match(const Sample& x, std::size_t n, const char* who) {
    if (x.size() != n)
        throw InvalidInput(std::string(who) + ": sample and weight sizes differ");
}

/// Ordering binaries with assignment and ascending-slot rows. Each slot
/// column is also declared as an SOS1 group with members ordered by value,
/// so branch-and-bound can split a slot's candidate set at the value
/// midpoint instead of fixing binaries one at a time.
std::vector<VarId> add_ordering_block(Model& m, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<VarId> z(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) z[i * n + k] = m.add_binary();
    for (int k = 0; k < n; ++k) {
        LinearExpression slot;
        for (int i = 0; i < n; ++i) slot.add_term(z[i * n + k], 1.0);
        m.add_constraint(slot, Sense::Equal, 1.0);
    }
    for (int i = 0; i < n; ++i) {
        LinearExpression row;
        for (int k = 0; k < n; ++k) row.add_term(z[i * n + k], 1.0);
        m.add_constraint(row, Sense::Equal, 1.0);
    }
    for (int k = 0; k + 1 < n; ++k) {
        LinearExpression sortrow;
        for (int i = 0; i < n; ++i) {
            sortrow.add_term(z[i * n + k], x[i]);
            sortrow.add_term(z[i * n + k + 1], -x[i]);
        }
        m.add_constraint(sortrow, Sense::LessEqual, 0.0);
    }
    std::vector<int> by_value(n);
    std::iota(by_value.begin(), by_value.end(), 0);
    std::stable_sort(by_value.begin(), by_value.end(),
                     [&](int a, int b) { return x[a] < x[b]; });
    for (int k = 0; k < n; ++k) {
        std::vector<VarId> members;
        members.reserve(n);
        for (int i : by_value) members.push_back(z[i * n + k]);
        m.add_sos1(std::move(members));
    }
    return z;
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "l1") return Method::L1;
    if (name == "l2") return Method::L2;
    if (name == "l3") return Method::L3;
    if (name == "b1") return Method::B1;
    if (name == "b2") return Method::B2;
    if (name == "qo") return Method::QO;
    throw MeasureError("unknown method '" + name + "' (expected l1|l2|l3|b1|b2|qo)");
}

const char* to_string(Method m) {
    switch (m) {
        case Method::L1: return "l1";
        case Method::L2: return "l2";
        case Method::L3: return "l3";
        case Method::B1: return "b1";
        case Method::B2: return "b2";
        case Method::QO: return "qo";
    }
    return "?";
}

double loss_at(const Sample& x, double theta, const LossSpec& loss) {
    const double n = static_cast<double>(x.size());
    switch (loss.kind) {
        case LossKind::Absolute: {
            double s = 0;
            for (double v : x.values()) s += std::abs(v - theta);
            return s / n;
        }
        case LossKind::Squared: {
            double s = 0;
            for (double v : x.values()) s += (v - theta) * (v - theta);
            return s / n;
        }
        case LossKind::Skewness:
        case LossKind::Kurtosis: {
            double m2 = 0, m3 = 0, m4 = 0;
            for (double v : x.values()) {
                double d = v - theta;
                m2 += d * d;
                m3 += d * d * d;
                m4 += d * d * d * d;
            }
            m2 /= n;
            m3 /= n;
            m4 /= n;
            if (m2 <= 0.0)
                throw InvalidInput("loss_at: shape measure undefined on a constant sample");
            return loss.kind == LossKind::Skewness ? m3 / std::pow(m2, 1.5) : m4 / (m2 * m2);
        }
    }
    throw InvalidInput("loss_at: unknown loss");
}

BuiltModel build_l1(const Sample& x, const LambdaWeights& w) {
    require_match(x, w.size(), "build_l1");
    const int n = static_cast<int>(x.size());
    BuiltModel out;
    out.ordering = add_ordering_block(out.model, x.values());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            out.model.objective().linear.add_term(out.ordering[i * n + k],
                                                  w.lambda()[k] * x[i]);
    return out;
}

BuiltModel build_l2(const Sample& x, const LambdaWeights& w) {
    require_match(x, w.size(), "build_l2");
    const int n = static_cast<int>(x.size());
    BuiltModel out;
    out.has_split = true;
    out.constant = 0.0;

    auto covering_block = [&](Model& m, int k, double weight) {
        // weight * ((n-k) t + sum_i v_i), t + v_i >= x_i   (k is 0-based)
        VarId t = m.add_continuous(-kInf, kInf);
        m.objective().linear.add_term(t, weight * (n - k));
        for (int i = 0; i < n; ++i) {
            VarId v = m.add_continuous(0.0, kInf);
            m.objective().linear.add_term(v, weight);
            LinearExpression e;
            e.add_term(t, 1.0);
            e.add_term(v, 1.0);
            m.add_constraint(e, Sense::GreaterEqual, x[i]);
        }
    };
    auto selection_block = [&](Model& m, int k, double weight) {
        // weight * sum_i x_i d_i, sum_i d_i = n-k, 0 <= d <= 1
        LinearExpression count;
        for (int i = 0; i < n; ++i) {
            VarId d = m.add_continuous(0.0, 1.0);
            m.objective().linear.add_term(d, weight * x[i]);
            count.add_term(d, 1.0);
        }
        m.add_constraint(count, Sense::Equal, static_cast<double>(n - k));
    };

    for (int k : w.delta_plus()) {
        covering_block(out.model, k, w.delta()[k]);
        covering_block(out.plus, k, w.delta()[k]);
    }
    for (int k : w.delta_minus()) {
        selection_block(out.model, k, w.delta()[k]);
        selection_block(out.minus, k, -w.delta()[k]);
    }
    out.minus.objective().sense = ObjSense::Maximize;
    return out;
}

BuiltModel build_l3(const Sample& x, const LambdaWeights& w) {
    require_match(x, w.size(), "build_l3");
    const int n = static_cast<int>(x.size());
    const double total = sum(x.values());
    BuiltModel out;
    out.has_split = true;

    auto pinball_block = [&](Model& m, int k, double weight) {
        // weight * sum_i (tau u_i + (1-tau) v_i), u_i - v_i + g = x_i,
        // with tau = k/n for the 0-based block index k.
        const double tau = static_cast<double>(k) / n;
        VarId g = m.add_continuous(-kInf, kInf);
        for (int i = 0; i < n; ++i) {
            VarId u = m.add_continuous(0.0, kInf);
            VarId v = m.add_continuous(0.0, kInf);
            m.objective().linear.add_term(u, weight * tau);
            m.objective().linear.add_term(v, weight * (1.0 - tau));
            LinearExpression e;
            e.add_term(u, 1.0);
            e.add_term(v, -1.0);
            e.add_term(g, 1.0);
            m.add_constraint(e, Sense::Equal, x[i]);
        }
    };
    auto transport_block = [&](Model& m, int k, double weight) {
        // weight * sum_i x_i a_i, sum_i a_i = 0, tau-1 <= a_i <= tau.
        const double tau = static_cast<double>(k) / n;
        LinearExpression zero_sum;
        for (int i = 0; i < n; ++i) {
            VarId a = m.add_continuous(tau - 1.0, tau);
            m.objective().linear.add_term(a, weight * x[i]);
            zero_sum.add_term(a, 1.0);
        }
        m.add_constraint(zero_sum, Sense::Equal, 0.0);
    };

    double constant = 0.0;
    for (int k : w.delta_plus()) {
        pinball_block(out.model, k, w.delta()[k]);
        pinball_block(out.plus, k, w.delta()[k]);
        constant += w.delta()[k] * (1.0 - static_cast<double>(k) / n) * total;
    }
    for (int k : w.delta_minus()) {
        transport_block(out.model, k, w.delta()[k]);
        transport_block(out.minus, k, -w.delta()[k]);
        constant += w.delta()[k] * (1.0 - static_cast<double>(k) / n) * total;
    }
    out.model.objective().linear.add_constant(constant);
    out.constant = constant;
    out.minus.objective().sense = ObjSense::Maximize;
    return out;
}

namespace {

/// Attaches the requested loss around an already-pinned location
/// variable.
void attach_loss(BuiltModel& out, const Sample& x, const LossSpec& loss) {
    Model& m = out.model;
    const int n = static_cast<int>(x.size());
    out.loss = loss;
    switch (loss.kind) {
        case LossKind::Absolute: {
            for (int i = 0; i < n; ++i) {
                VarId rp = m.add_continuous(0.0, kInf);
                VarId rm = m.add_continuous(0.0, kInf);
                LinearExpression e;  // rp - rm + theta = x_i
                e.add_term(rp, 1.0);
                e.add_term(rm, -1.0);
                e.add_term(out.theta, 1.0);
                m.add_constraint(e, Sense::Equal, x[i]);
                m.add_sos1({rp, rm});
                m.objective().linear.add_term(rp, 1.0 / n);
                m.objective().linear.add_term(rm, 1.0 / n);
            }
            break;
        }
        case LossKind::Squared: {
            m.objective().add_quadratic_term(out.theta, out.theta, 1.0);
            m.objective().linear.add_term(out.theta, -2.0 * sum(x.values()) / n);
            double sq = 0;
            for (double v : x.values()) sq += v * v;
            m.objective().linear.add_constant(sq / n);
            break;
        }
        case LossKind::Skewness:
        case LossKind::Kurtosis:
            out.post_evaluate = true;
            break;
    }
}

double theta_lower_bound(const Sample& x) {
    double lo = *std::min_element(x.values().begin(), x.values().end());
    // The location variable stays nonnegative on nonnegative data only;
    // sign-indefinite samples leave it free (the pinning rows fix it).
    return lo >= 0.0 ? 0.0 : -kInf;
}

}  // namespace

BuiltModel build_nested_b1(const Sample& x, const LambdaWeights& w, const LossSpec& loss) {
    require_match(x, w.size(), "build_nested_b1");
    const int n = static_cast<int>(x.size());
    BuiltModel out;
    Model& m = out.model;
    out.theta = m.add_continuous(theta_lower_bound(x), kInf, "theta");

    LinearExpression eq1, eq2;  // both pin theta to the weighted aggregate
    eq1.add_term(out.theta, 1.0);
    eq2.add_term(out.theta, 1.0);

    std::vector<int> blocks;
    for (int k : w.delta_plus()) blocks.push_back(k);
    for (int k : w.delta_minus()) blocks.push_back(k);
    std::sort(blocks.begin(), blocks.end());

    for (int k : blocks) {
        const double d = w.delta()[k];
        const double mag = std::abs(d);
        // Covering block bounds the partial sorted sum from above, the
        // selection block from below; pairing them across the two pin
        // rows squeezes theta onto the aggregate.
        VarId t = m.add_continuous(-kInf, kInf);
        std::vector<VarId> v(n);
        for (int i = 0; i < n; ++i) {
            v[i] = m.add_continuous(0.0, kInf);
            LinearExpression e;
            e.add_term(t, 1.0);
            e.add_term(v[i], 1.0);
            m.add_constraint(e, Sense::GreaterEqual, x[i]);
        }
        LinearExpression count;
        std::vector<VarId> dvars(n);
        for (int i = 0; i < n; ++i) {
            dvars[i] = m.add_continuous(0.0, 1.0);
            count.add_term(dvars[i], 1.0);
        }
        m.add_constraint(count, Sense::Equal, static_cast<double>(n - k));

        LinearExpression& cover_eq = d > 0 ? eq1 : eq2;
        LinearExpression& select_eq = d > 0 ? eq2 : eq1;
        const double cover_sign = d > 0 ? 1.0 : -1.0;
        cover_eq.add_term(t, -cover_sign * mag * (n - k));
        for (int i = 0; i < n; ++i) cover_eq.add_term(v[i], -cover_sign * mag);
        for (int i = 0; i < n; ++i)
            select_eq.add_term(dvars[i], -cover_sign * mag * x[i]);
    }
    m.add_constraint(eq1, Sense::Equal, 0.0, "pin_cover");
    m.add_constraint(eq2, Sense::Equal, 0.0, "pin_select");
    attach_loss(out, x, loss);
    return out;
}

BuiltModel build_nested_b2(const Sample& x, const LambdaWeights& w, const LossSpec& loss) {
    require_match(x, w.size(), "build_nested_b2");
    const int n = static_cast<int>(x.size());
    const double total = sum(x.values());
    BuiltModel out;
    Model& m = out.model;
    out.theta = m.add_continuous(theta_lower_bound(x), kInf, "theta");

    LinearExpression eq1, eq2;
    eq1.add_term(out.theta, 1.0);
    eq2.add_term(out.theta, 1.0);
    double constant = 0.0;

    std::vector<int> blocks;
    for (int k : w.delta_plus()) blocks.push_back(k);
    for (int k : w.delta_minus()) blocks.push_back(k);
    std::sort(blocks.begin(), blocks.end());

    for (int k : blocks) {
        const double d = w.delta()[k];
        const double mag = std::abs(d);
        const double tau = static_cast<double>(k) / n;
        constant += d * (1.0 - tau) * total;

        VarId g = m.add_continuous(-kInf, kInf);
        std::vector<VarId> u(n), v(n), a(n);
        for (int i = 0; i < n; ++i) {
            u[i] = m.add_continuous(0.0, kInf);
            v[i] = m.add_continuous(0.0, kInf);
            LinearExpression e;
            e.add_term(u[i], 1.0);
            e.add_term(v[i], -1.0);
            e.add_term(g, 1.0);
            m.add_constraint(e, Sense::Equal, x[i]);
        }
        LinearExpression zero_sum;
        for (int i = 0; i < n; ++i) {
            a[i] = m.add_continuous(tau - 1.0, tau);
            zero_sum.add_term(a[i], 1.0);
        }
        m.add_constraint(zero_sum, Sense::Equal, 0.0);

        LinearExpression& pin_eq = d > 0 ? eq1 : eq2;
        LinearExpression& dual_eq = d > 0 ? eq2 : eq1;
        const double pin_sign = d > 0 ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) {
            pin_eq.add_term(u[i], -pin_sign * mag * tau);
            pin_eq.add_term(v[i], -pin_sign * mag * (1.0 - tau));
        }
        for (int i = 0; i < n; ++i) dual_eq.add_term(a[i], -pin_sign * mag * x[i]);
    }
    m.add_constraint(eq1, Sense::Equal, constant, "pin_primal");
    m.add_constraint(eq2, Sense::Equal, constant, "pin_dual");
    attach_loss(out, x, loss);
    return out;
}

BuiltModel build_qo(const Sample& x, const QOMatrix& mat) {
    if (x.size() != mat.size())
        throw InvalidInput("build_qo: sample and matrix sizes differ");
    const int n = static_cast<int>(x.size());
    BuiltModel out;
    Model& m = out.model;
    out.ordering = add_ordering_block(m, x.values());
    auto z = [&](int i, int k) { return out.ordering[i * n + k]; };

    // Same-value and same-slot products collapse onto the binaries
    // themselves; only mixed products need explicit variables.
    for (int k = 0; k < n; ++k) {
        if (mat.has_linear_part() && mat.linear_part()[k] != 0.0)
            for (int i = 0; i < n; ++i)
                m.objective().linear.add_term(z(i, k), mat.linear_part()[k] * x[i]);
        double coef = mat(k, k);
        if (coef == 0.0) continue;
        for (int i = 0; i < n; ++i)
            m.objective().linear.add_term(z(i, k), coef * x[i] * x[i]);
    }

    // y[i][j] = z_{ik} z_{jl} per instantiated slot pair (k, l). Products
    // are forced by aggregated assignment equalities: summing y over one
    // free index leaves a single binary. Two families live inside each
    // slot-pair block, two couple the blocks; together they are exact at
    // binary z and keep the relaxation tight without per-product
    // envelope rows.
    std::vector<std::vector<VarId>> y(static_cast<std::size_t>(n) * n);
    auto block = [&](int k, int l) -> std::vector<VarId>& { return y[k * n + l]; };
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (k == l || mat(k, l) == 0.0) continue;
            auto& ids = block(k, l);
            ids.assign(static_cast<std::size_t>(n) * n, -1);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    VarId vid = m.add_continuous(0.0, 1.0);
                    ids[i * n + j] = vid;
                    out.products.push_back({{i, j, k, l}, vid});
                    m.objective().linear.add_term(vid, mat(k, l) * x[i] * x[j]);
                }
            for (int j = 0; j < n; ++j) {
                LinearExpression e;  // sum_i y_{ijkl} = z_{jl}
                for (int i = 0; i < n; ++i)
                    if (i != j) e.add_term(ids[i * n + j], 1.0);
                e.add_term(z(j, l), -1.0);
                m.add_constraint(e, Sense::Equal, 0.0);
            }
            for (int i = 0; i < n; ++i) {
                LinearExpression e;  // sum_j y_{ijkl} = z_{ik}
                for (int j = 0; j < n; ++j)
                    if (j != i) e.add_term(ids[i * n + j], 1.0);
                e.add_term(z(i, k), -1.0);
                m.add_constraint(e, Sense::Equal, 0.0);
            }
        }
    }
    for (int l = 0; l < n; ++l) {
        std::vector<int> ks;
        for (int k = 0; k < n; ++k)
            if (k != l && !block(k, l).empty()) ks.push_back(k);
        if (ks.empty()) continue;
        const bool complete = static_cast<int>(ks.size()) == n - 1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                LinearExpression e;  // sum_k y_{ijkl} vs z_{jl}
                for (int k : ks) e.add_term(block(k, l)[i * n + j], 1.0);
                e.add_term(z(j, l), -1.0);
                m.add_constraint(std::move(e), complete ? Sense::Equal : Sense::LessEqual,
                                 0.0);
            }
    }
    for (int k = 0; k < n; ++k) {
        std::vector<int> ls;
        for (int l = 0; l < n; ++l)
            if (l != k && !block(k, l).empty()) ls.push_back(l);
        if (ls.empty()) continue;
        const bool complete = static_cast<int>(ls.size()) == n - 1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                LinearExpression e;  // sum_l y_{ijkl} vs z_{ik}
                for (int l : ls) e.add_term(block(k, l)[i * n + j], 1.0);
                e.add_term(z(i, k), -1.0);
                m.add_constraint(std::move(e), complete ? Sense::Equal : Sense::LessEqual,
                                 0.0);
            }
    }
    return out;
}

ComputeResult solve_built(const Sample& x, const BuiltModel& built, Method method,
                          const MIPOptions& options) {
    ComputeResult res;
    MIPOptions opts = options;
    // Ordering models carry value-ordered slot groups; branching those
    // first closes the assignment structure quickly.
    if (method == Method::L1 || method == Method::QO) opts.sos_before_binaries = true;
    auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](double value, const char* status, long nodes, long iters) {
        res.value = value;
        res.status = status;
        res.nodes = nodes;
        res.lp_iterations = iters;
        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    };

    const bool pure_lp = !built.model.has_integer_variables() &&
                         built.model.sos1_sets().empty() &&
                         !built.model.objective().is_quadratic();
    if (pure_lp) {
        LPSolution lp = solve_lp(built.model, options.lp);
        double value = lp.objective;
        if (lp.optimal() && built.post_evaluate)
            value = loss_at(x, lp.values[built.theta], built.loss);
        return finish(value, to_string(lp.status), 0, lp.iterations);
    }
    MIPSolution mip = built.model.objective().is_quadratic()
                          ? solve_convex_qp_mip(built.model, opts)
                          : solve_mip(built.model, opts);
    double value = mip.objective;
    if ((mip.optimal() || mip.status == MIPStatus::NodeLimit) && built.post_evaluate &&
        !mip.values.empty())
        value = loss_at(x, mip.values[built.theta], built.loss);
    return finish(value, to_string(mip.status), mip.nodes, mip.lp_iterations);
}

ComputeResult compute(const Sample& x, const std::string& measure,
                      const MeasureParams& params, Method method,
                      const MIPOptions& options) {
    const int n = static_cast<int>(x.size());
    BuiltModel built;
    switch (method) {
        case Method::L1:
            built = build_l1(x, lambda_for(measure, n, params));
            break;
        case Method::L2:
            built = build_l2(x, lambda_for(measure, n, params));
            break;
        case Method::L3:
            built = build_l3(x, lambda_for(measure, n, params));
            break;
        case Method::B1: {
            NestedSpec spec = nested_for(measure, n, params);
            built = build_nested_b1(x, spec.location, spec.loss);
            break;
        }
        case Method::B2: {
            NestedSpec spec = nested_for(measure, n, params);
            built = build_nested_b2(x, spec.location, spec.loss);
            break;
        }
        case Method::QO:
            built = build_qo(x, qo_matrix_for(measure, n, params));
            break;
    }
    return solve_built(x, built, method, options);
}

SplitValue solve_split(const BuiltModel& built, const LPOptions& options) {
    if (!built.has_split)
        throw ModelError("solve_split: this model has no independent split");
    SplitValue out;
    out.constant = built.constant;
    if (built.plus.num_variables() > 0) {
        LPSolution lp = solve_lp(built.plus, options);
        if (!lp.optimal()) throw ModelError("solve_split: plus part not optimal");
        out.plus = lp.objective;
    }
    if (built.minus.num_variables() > 0) {
        LPSolution lp = solve_lp(built.minus, options);
        if (!lp.optimal()) throw ModelError("solve_split: minus part not optimal");
        out.minus = lp.objective;
    }
    return out;
}

}  // namespace ordmeas
