#include "ordmeas/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>

#include "ordmeas/numeric.hpp"

namespace ordmeas {

const char* to_string(MIPStatus s) {
    switch (s) {
        case MIPStatus::Optimal: return "optimal";
        case MIPStatus::Infeasible: return "infeasible";
        case MIPStatus::NodeLimit: return "node-limit";
        case MIPStatus::Unbounded: return "unbounded";
        case MIPStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

namespace {

struct BoundDelta {
    VarId var;
    double lb_floor;
    double ub_cap;
};

struct Node {
    long id = 0;
    int parent = -1;
    int depth = 0;
    double bound = -kInf;  // in minimization sense
    std::vector<BoundDelta> deltas;
};

struct HeapEntry {
    double bound;
    int depth;
    long id;
    int index;
};
struct HeapCmp {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min bound first
        if (a.depth != b.depth) return a.depth < b.depth;  // deeper first
        return a.id > b.id;                                // older first
    }
};

class Engine {
  public:
    Engine(const Model& model, const MIPOptions& options)
        : original_(model), opts_(options) {
        negate_ = model.objective().sense == ObjSense::Maximize;
        quad_ = model.objective().quadratic;
        if (!quad_.empty() && negate_)
            throw ModelError("solve_mip: quadratic objectives must be minimized");

        work_ = model;
        if (negate_) {
            LinearExpression neg;
            neg.add_scaled(model.objective().linear, -1.0);
            work_.objective().linear = neg;
            work_.objective().sense = ObjSense::Minimize;
        }
        orig_nv_ = static_cast<int>(model.num_variables());
        if (!quad_.empty()) {
            check_psd();
            work_.objective().quadratic.clear();
            tvar_ = work_.add_continuous(-kInf, kInf, "oa_t");
            work_.objective().linear.add_term(tvar_, 1.0);
            seed_tangent_cut();
        }
        core_ = std::make_unique<LPCore>(work_, opts_.lp);

        base_lb_.resize(work_.num_variables());
        base_ub_.resize(work_.num_variables());
        for (std::size_t j = 0; j < work_.num_variables(); ++j) {
            base_lb_[j] = work_.variables()[j].lower;
            base_ub_[j] = work_.variables()[j].upper;
        }
        for (std::size_t j = 0; j < model.num_variables(); ++j)
            if (model.variables()[j].kind == VarKind::Binary)
                binaries_.push_back(static_cast<VarId>(j));
    }

    MIPSolution run() {
        MIPSolution out;
        nodes_.push_back(Node{});
        heap_.push(HeapEntry{-kInf, 0, 0, 0});

        double incumbent = kInf;  // minimization sense
        std::vector<double> inc_values;
        double pruned_bound = kInf;  // min bound among pruned subtrees
        double global_lb = -kInf;    // monotone proven lower bound
        long processed = 0;
        bool numerical_trouble = false;
        bool unbounded = false;
        bool hit_limit = false;
        const auto t_start = std::chrono::steady_clock::now();

        auto gap = [&](double inc) {
            return std::max(opts_.gap_abs, opts_.gap_rel * std::abs(inc));
        };

        while (!heap_.empty()) {
            if (processed >= opts_.node_limit) {
                hit_limit = true;
                break;
            }
            if (opts_.time_limit_seconds > 0 && (processed & 7) == 0 &&
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                        .count() > opts_.time_limit_seconds) {
                hit_limit = true;
                break;
            }
            HeapEntry top = heap_.top();
            heap_.pop();
            const double parent_bound = nodes_[top.index].bound;
            if (parent_bound >= incumbent - gap(incumbent)) {
                pruned_bound = std::min(pruned_bound, parent_bound);
                continue;
            }
            ++processed;

            materialize(top.index);
            LPSolution lp = solve_with_oa();

            if (lp.status == LPStatus::Infeasible) continue;
            if (lp.status == LPStatus::Unbounded && processed == 1) {
                unbounded = true;
                break;
            }
            if (lp.status != LPStatus::Optimal) {
                numerical_trouble = true;
                break;
            }

            double node_bound = std::max(parent_bound, lp.objective);
            global_lb = std::max(global_lb,
                                 top.bound > -kInf ? top.bound : node_bound);
            if (opts_.log)
                *opts_.log << "node " << processed << " depth " << top.depth << " bound "
                           << global_lb << " incumbent "
                           << (incumbent == kInf ? 0.0 : sense_value(incumbent))
                           << (incumbent == kInf ? " (none)" : "") << "\n";
            if (node_bound >= incumbent - gap(incumbent)) {
                pruned_bound = std::min(pruned_bound, node_bound);
                continue;
            }

            int frac_var = -1, viol_sos = -1;
            if (opts_.sos_before_binaries) {
                viol_sos = pick_violated_sos(lp.values);
                if (viol_sos < 0) frac_var = most_fractional(lp.values);
            } else {
                frac_var = most_fractional(lp.values);
                if (frac_var < 0) viol_sos = pick_violated_sos(lp.values);
            }

            if (frac_var < 0 && viol_sos < 0) {
                double exact = exact_objective(lp.values);
                pruned_bound = std::min(pruned_bound, node_bound);
                if (exact < incumbent - 1e-12) {
                    incumbent = exact;
                    inc_values.assign(lp.values.begin(), lp.values.begin() + orig_nv_);
                }
                continue;
            }

            if (processed == 1 && opts_.dive_for_incumbent) {
                dive(lp, incumbent, inc_values);
            }

            if (frac_var >= 0) {
                push_child(top.index, node_bound, {BoundDelta{frac_var, -kInf, 0.0}});
                push_child(top.index, node_bound, {BoundDelta{frac_var, 1.0, kInf}});
            } else {
                // Midpoint split over the members that are still free.
                std::vector<VarId> active;
                for (VarId mvar : work_.sos1_sets()[viol_sos].members)
                    if (cur_ub_[static_cast<std::size_t>(mvar)] > 0.0 ||
                        cur_lb_[static_cast<std::size_t>(mvar)] < 0.0)
                        active.push_back(mvar);
                std::size_t mid = active.size() / 2;
                std::vector<BoundDelta> left, right;
                for (std::size_t i = 0; i < active.size(); ++i)
                    (i < mid ? left : right).push_back(BoundDelta{active[i], 0.0, 0.0});
                push_child(top.index, node_bound, std::move(left));
                push_child(top.index, node_bound, std::move(right));
            }
        }

        out.nodes = processed;
        out.lp_iterations = lp_iters_;

        if (unbounded) {
            out.status = MIPStatus::Unbounded;
            return out;
        }
        if (numerical_trouble) {
            out.status = MIPStatus::NumericalFailure;
            return out;
        }

        double open_bound = kInf;
        while (!heap_.empty()) {
            open_bound = std::min(open_bound, heap_.top().bound);
            heap_.pop();
        }
        double global_bound = std::min({pruned_bound, open_bound, incumbent});

        if (incumbent < kInf) {
            out.values = std::move(inc_values);
            out.objective = sense_value(incumbent);
            out.bound = sense_value(global_bound);
            out.status = hit_limit && open_bound < incumbent - opts_.gap_abs
                             ? MIPStatus::NodeLimit
                             : MIPStatus::Optimal;
        } else if (hit_limit) {
            out.status = MIPStatus::NodeLimit;
            out.bound = sense_value(global_bound);
        } else {
            out.status = MIPStatus::Infeasible;
        }
        return out;
    }

  private:
    /// Bound/objective reported in the original sense.
    double sense_value(double v) const { return negate_ ? -v : v; }

    void check_psd() {
        std::vector<VarId> vars;
        for (const auto& [key, c] : quad_) {
            vars.push_back(key.first);
            vars.push_back(key.second);
        }
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        if (vars.size() > 128) return;  // runtime stall detection still applies
        const int k = static_cast<int>(vars.size());
        std::vector<double> h(static_cast<std::size_t>(k) * k, 0.0);
        auto pos = [&](VarId v) {
            return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
        };
        double scale = 1.0;
        for (const auto& [key, c] : quad_) {
            int i = pos(key.first), j = pos(key.second);
            if (i == j)
                h[i * k + i] += 2.0 * c;
            else {
                h[i * k + j] += c;
                h[j * k + i] += c;
            }
            scale = std::max(scale, std::abs(c));
        }
        if (min_eigenvalue(h, k) < -1e-7 * scale)
            throw NonconvexObjectiveError(
                "quadratic objective is not positive semidefinite");
    }

    double quad_value(const std::vector<double>& v) const {
        double s = 0;
        for (const auto& [key, c] : quad_)
            s += c * v[static_cast<std::size_t>(key.first)] *
                 v[static_cast<std::size_t>(key.second)];
        return s;
    }

    /// Exact objective of a feasible point, in minimization sense.
    double exact_objective(const std::vector<double>& v) const {
        double s = work_.objective().linear.constant();
        for (const auto& [var, c] : work_.objective().linear.terms())
            if (var != tvar_) s += c * v[static_cast<std::size_t>(var)];
        return s + quad_value(v);
    }

    void materialize(int node_index) {
        cur_lb_ = base_lb_;
        cur_ub_ = base_ub_;
        chain_.clear();
        for (int at = node_index; at >= 0; at = nodes_[at].parent) chain_.push_back(at);
        for (auto it = chain_.rbegin(); it != chain_.rend(); ++it)
            for (const BoundDelta& d : nodes_[*it].deltas) {
                auto j = static_cast<std::size_t>(d.var);
                cur_lb_[j] = std::max(cur_lb_[j], d.lb_floor);
                cur_ub_[j] = std::min(cur_ub_[j], d.ub_cap);
            }
    }

    /// LP plus outer-approximation rounds until the epigraph variable
    /// tracks the quadratic within tolerance.
    LPSolution solve_with_oa() {
        LPSolution lp = core_->solve(cur_lb_, cur_ub_, cuts_);
        ++lp_solves_;
        lp_iters_ += lp.iterations;
        if (quad_.empty() || lp.status != LPStatus::Optimal) return lp;
        double prev_viol = kInf;
        int stall = 0;
        for (int round = 0; round < 400; ++round) {
            double q = quad_value(lp.values);
            double viol = q - lp.values[static_cast<std::size_t>(tvar_)];
            if (viol <= opts_.oa_tol) return lp;
            if (viol > prev_viol * 0.999) {
                if (++stall >= 8)
                    throw NonconvexObjectiveError(
                        "outer approximation stalled: tangent cuts fail to separate");
            } else {
                stall = 0;
            }
            prev_viol = viol;
            add_tangent_cut(lp.values, q);
            lp = core_->solve(cur_lb_, cur_ub_, cuts_);
            ++lp_solves_;
            lp_iters_ += lp.iterations;
            if (lp.status != LPStatus::Optimal) return lp;
        }
        lp.status = LPStatus::NumericalFailure;
        return lp;
    }

    /// One tangent at a bounds-clamped point keeps the epigraph variable
    /// bounded below from the first relaxation on.
    void seed_tangent_cut() {
        std::vector<double> v(work_.num_variables(), 0.0);
        for (std::size_t j = 0; j + 1 < work_.num_variables(); ++j) {
            double lo = work_.variables()[j].lower, hi = work_.variables()[j].upper;
            v[j] = std::min(std::max(0.0, lo), hi < kInf ? hi : std::max(0.0, lo));
            if (!std::isfinite(v[j])) v[j] = 0.0;
        }
        add_tangent_cut(v, quad_value(v));
    }

    void add_tangent_cut(const std::vector<double>& v, double q) {
        // t >= q(v*) + grad(v*) . (v - v*)
        std::map<VarId, double> grad;
        for (const auto& [key, c] : quad_) {
            auto [i, j] = key;
            if (i == j) {
                grad[i] += 2.0 * c * v[static_cast<std::size_t>(i)];
            } else {
                grad[i] += c * v[static_cast<std::size_t>(j)];
                grad[j] += c * v[static_cast<std::size_t>(i)];
            }
        }
        Constraint cut;
        cut.sense = Sense::LessEqual;
        double rhs = -q;
        for (const auto& [var, g] : grad) {
            cut.expr.add_term(var, g);
            rhs += g * v[static_cast<std::size_t>(var)];
        }
        cut.expr.add_term(tvar_, -1.0);
        cut.rhs = rhs;
        cuts_.push_back(std::move(cut));
    }

    int most_fractional(const std::vector<double>& v) const {
        int best = -1;
        double best_frac = opts_.int_tol;
        for (VarId b : binaries_) {
            double x = v[static_cast<std::size_t>(b)];
            double frac = std::min(x - std::floor(x), std::ceil(x) - x);
            frac = std::min(frac, std::abs(x - std::round(x)));
            if (frac > best_frac + 1e-15) {
                best_frac = frac;
                best = b;
            }
        }
        return best;
    }

    /// Violated set with the most nonzero members; ties keep the lowest
    /// set index.
    int pick_violated_sos(const std::vector<double>& v) const {
        int best = -1, best_count = 1;
        for (std::size_t s = 0; s < work_.sos1_sets().size(); ++s) {
            int nonzero = 0;
            for (VarId m : work_.sos1_sets()[s].members)
                if (std::abs(v[static_cast<std::size_t>(m)]) > opts_.int_tol) ++nonzero;
            if (nonzero > best_count) {
                best_count = nonzero;
                best = static_cast<int>(s);
            }
        }
        return best;
    }

    void push_child(int parent, double bound, std::vector<BoundDelta> deltas) {
        Node child;
        child.id = static_cast<long>(nodes_.size());
        child.parent = parent;
        child.depth = nodes_[parent].depth + 1;
        child.bound = bound;
        child.deltas = std::move(deltas);
        nodes_.push_back(child);
        heap_.push(HeapEntry{child.bound, child.depth, child.id,
                             static_cast<int>(nodes_.size()) - 1});
    }

    /// Deterministic rounding dive from the root relaxation; any integral
    /// point found seeds the incumbent. A one-shot fix of every binary
    /// and SOS1 set is tried first (one LP); failing that, the dive fixes
    /// one decision per resolve.
    void dive(LPSolution lp, double& incumbent, std::vector<double>& inc_values) {
        auto saved_lb = cur_lb_;
        auto saved_ub = cur_ub_;

        for (VarId b : binaries_) {
            double x = lp.values[static_cast<std::size_t>(b)];
            if (x >= 0.5)
                cur_lb_[static_cast<std::size_t>(b)] =
                    std::max(cur_lb_[static_cast<std::size_t>(b)], 1.0);
            else
                cur_ub_[static_cast<std::size_t>(b)] =
                    std::min(cur_ub_[static_cast<std::size_t>(b)], 0.0);
        }
        for (const auto& set : work_.sos1_sets()) {
            VarId keep = set.members.front();
            for (VarId m : set.members)
                if (std::abs(lp.values[static_cast<std::size_t>(m)]) >
                    std::abs(lp.values[static_cast<std::size_t>(keep)]))
                    keep = m;
            for (VarId m : set.members)
                if (m != keep) {
                    cur_lb_[static_cast<std::size_t>(m)] =
                        std::max(cur_lb_[static_cast<std::size_t>(m)], 0.0);
                    cur_ub_[static_cast<std::size_t>(m)] =
                        std::min(cur_ub_[static_cast<std::size_t>(m)], 0.0);
                }
        }
        LPSolution shot = solve_with_oa();
        if (shot.status == LPStatus::Optimal && most_fractional(shot.values) < 0 &&
            pick_violated_sos(shot.values) < 0) {
            double exact = exact_objective(shot.values);
            if (exact < incumbent - 1e-12) {
                incumbent = exact;
                inc_values.assign(shot.values.begin(), shot.values.begin() + orig_nv_);
            }
            cur_lb_ = std::move(saved_lb);
            cur_ub_ = std::move(saved_ub);
            return;
        }
        cur_lb_ = saved_lb;
        cur_ub_ = saved_ub;
        for (std::size_t step = 0;
             step <= binaries_.size() + 2 * work_.sos1_sets().size(); ++step) {
            int fv = -1, vs = -1;
            if (opts_.sos_before_binaries) {
                vs = pick_violated_sos(lp.values);
                if (vs < 0) fv = most_fractional(lp.values);
            } else {
                fv = most_fractional(lp.values);
                if (fv < 0) vs = pick_violated_sos(lp.values);
            }
            if (fv < 0 && vs < 0) {
                double exact = exact_objective(lp.values);
                if (exact < incumbent - 1e-12) {
                    incumbent = exact;
                    inc_values.assign(lp.values.begin(), lp.values.begin() + orig_nv_);
                }
                break;
            }
            if (fv >= 0) {
                double x = lp.values[static_cast<std::size_t>(fv)];
                if (x >= 0.5)
                    cur_lb_[static_cast<std::size_t>(fv)] = 1.0;
                else
                    cur_ub_[static_cast<std::size_t>(fv)] = 0.0;
            } else {
                // Keep only the largest member of the violated set.
                const auto& members = work_.sos1_sets()[vs].members;
                VarId keep = members.front();
                for (VarId m : members)
                    if (std::abs(lp.values[static_cast<std::size_t>(m)]) >
                        std::abs(lp.values[static_cast<std::size_t>(keep)]))
                        keep = m;
                for (VarId m : members)
                    if (m != keep) {
                        cur_lb_[static_cast<std::size_t>(m)] =
                            std::max(cur_lb_[static_cast<std::size_t>(m)], 0.0);
                        cur_ub_[static_cast<std::size_t>(m)] =
                            std::min(cur_ub_[static_cast<std::size_t>(m)], 0.0);
                    }
            }
            lp = solve_with_oa();
            if (lp.status != LPStatus::Optimal) break;
        }
        cur_lb_ = std::move(saved_lb);
        cur_ub_ = std::move(saved_ub);
    }

    const Model& original_;
    MIPOptions opts_;
    Model work_;
    bool negate_ = false;
    QuadraticTerms quad_;
    VarId tvar_ = -1;
    int orig_nv_ = 0;
    std::unique_ptr<LPCore> core_;
    std::vector<double> base_lb_, base_ub_, cur_lb_, cur_ub_;
    std::vector<VarId> binaries_;
    std::vector<Constraint> cuts_;
    std::vector<Node> nodes_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCmp> heap_;
    std::vector<int> chain_;
    long lp_solves_ = 0;
    long lp_iters_ = 0;
};

}  // namespace

MIPSolution solve_mip(const Model& model, const MIPOptions& options) {
    Engine engine(model, options);
    return engine.run();
}

MIPSolution solve_convex_qp_mip(const Model& model, const MIPOptions& options) {
    if (!model.objective().is_quadratic())
        throw ModelError("solve_convex_qp_mip: objective has no quadratic part");
    return solve_mip(model, options);
}

}  // namespace ordmeas
