#include "ordmeas/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ordmeas {

// Temporary instrumentation (read by the perf probes).
LPPerfCounters g_lp_perf;

const char* to_string(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
        case LPStatus::IterationLimit: return "iteration-limit";
        case LPStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

namespace {

/// Sparse LU of a square basis, right-looking with Markowitz pivoting
/// under a relative stability threshold. L is stored by columns in pivot
/// order; U is stored by rows (column references are pivot steps after
/// factorization finishes). Fill-in stays near the structural minimum,
/// which is what keeps refactorization affordable on the product-linking
/// blocks this library generates.
class SparseLU {
  public:
    void reset(int m) {
        m_ = m;
        l_cols_.assign(m, {});
        u_rows_.assign(m, {});
        u_diag_.assign(m, 0.0);
        pivot_row_.assign(m, -1);
        pos_of_row_.assign(m, -1);
        pos_of_col_.assign(m, -1);
        col_of_pos_.assign(m, -1);
    }

    bool factorize(const std::vector<std::vector<std::pair<int, double>>>& cols,
                   double pivot_tol) {
        const int m = m_;
        acol_.assign(m, {});
        rcols_.assign(m, {});
        rcount_.assign(m, 0);
        ccount_.assign(m, 0);
        row_done_.assign(m, 0);
        col_done_.assign(m, 0);
        stamp_.assign(m, -1);
        cstamp_.assign(m, -1);
        where_.assign(m, 0);
        buckets_.assign(m + 1, {});
        tick_ = 0;

        double matrix_scale = 0.0;
        for (int c = 0; c < m; ++c) {
            acol_[c].reserve(cols[c].size());
            for (const auto& [r, v] : cols[c]) {
                if (v == 0.0) continue;
                acol_[c].push_back({r, v});
                rcols_[r].push_back(c);
                ++rcount_[r];
                matrix_scale = std::max(matrix_scale, std::abs(v));
            }
            ccount_[c] = static_cast<int>(acol_[c].size());
            if (ccount_[c] == 0) return false;  // structurally singular
            buckets_[ccount_[c]].push_back(c);
        }
        const double drop_tol = 1e-14 * std::max(matrix_scale, 1.0);

        for (int step = 0; step < m; ++step) {
            int pr = -1, pc = -1;
            double piv = 0.0;
            if (!select_pivot(pivot_tol, pr, pc, piv)) return false;

            pivot_row_[step] = pr;
            pos_of_row_[pr] = step;
            pos_of_col_[pc] = step;
            col_of_pos_[step] = pc;
            u_diag_[step] = piv;
            row_done_[pr] = 1;
            col_done_[pc] = 1;

            // Split the pivot column into the unit-scaled L column.
            auto& lcol = l_cols_[step];
            lcol.clear();
            for (const auto& [r, v] : acol_[pc]) {
                if (r == pr) continue;
                lcol.push_back({r, v / piv});
                --rcount_[r];
            }
            acol_[pc].clear();
            acol_[pc].shrink_to_fit();

            // Gather the pivot row (the U row) from the live columns.
            auto& urow = u_rows_[step];
            urow.clear();
            ++tick_;
            for (int c : rcols_[pr]) {
                if (col_done_[c] || cstamp_[c] == tick_) continue;
                cstamp_[c] = tick_;
                double val = 0.0;
                bool found = false;
                for (const auto& [r, v] : acol_[c])
                    if (r == pr) {
                        val = v;
                        found = true;
                        break;
                    }
                if (found) urow.push_back({c, val});
            }
            rcols_[pr].clear();
            rcols_[pr].shrink_to_fit();

            // Rank-one update of every column in the pivot row.
            for (const auto& [c, f] : urow) {
                const double mult = f / piv;
                auto& col = acol_[c];
                ++tick_;
                int keep = 0;
                for (int t = 0; t < static_cast<int>(col.size()); ++t) {
                    if (col[t].first == pr) continue;  // retired row
                    col[keep] = col[t];
                    stamp_[col[t].first] = tick_;
                    where_[col[t].first] = keep;
                    ++keep;
                }
                col.resize(keep);
                (void)mult;
                for (const auto& [r, lv] : lcol) {
                    double delta = -f * lv;
                    if (stamp_[r] == tick_) {
                        col[where_[r]].second += delta;
                    } else {
                        col.push_back({r, delta});
                        rcols_[r].push_back(c);
                        ++rcount_[r];
                    }
                }
                // Compact tiny leftovers to control fill.
                keep = 0;
                for (int t = 0; t < static_cast<int>(col.size()); ++t) {
                    if (std::abs(col[t].second) <= drop_tol) {
                        --rcount_[col[t].first];
                        continue;
                    }
                    col[keep++] = col[t];
                }
                col.resize(keep);
                ccount_[c] = keep;
                if (keep == 0 && !col_done_[c]) return false;  // singular
                buckets_[keep].push_back(c);
            }
        }
        // Remap U row references from input columns to pivot steps.
        for (int k = 0; k < m; ++k)
            for (auto& [c, v] : u_rows_[k]) c = pos_of_col_[c];
        return true;
    }

    /// Solves B x = b. `b` is indexed by row and is destroyed; the result
    /// is indexed by factorization step.
    void ftran(std::vector<double>& b, std::vector<double>& out_by_step) const {
        for (int k = 0; k < m_; ++k) {
            double yk = b[pivot_row_[k]];
            if (yk != 0.0)
                for (const auto& [r, v] : l_cols_[k]) b[r] -= yk * v;
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double acc = b[pivot_row_[k]];
            for (const auto& [s, v] : u_rows_[k]) acc -= v * out_by_step[s];
            out_by_step[k] = acc / u_diag_[k];
        }
    }

    /// Solves B^T y = c. `c` is indexed by factorization step and is
    /// destroyed; the result is indexed by row.
    void btran(std::vector<double>& c_by_step, std::vector<double>& out_by_row) const {
        for (int k = 0; k < m_; ++k) {
            double wk = c_by_step[k] / u_diag_[k];
            c_by_step[k] = wk;
            if (wk != 0.0)
                for (const auto& [s, v] : u_rows_[k]) c_by_step[s] -= v * wk;
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double vk = c_by_step[k];
            for (const auto& [r, v] : l_cols_[k]) vk -= v * c_by_step[pos_of_row_[r]];
            c_by_step[k] = vk;
        }
        for (int k = 0; k < m_; ++k) out_by_row[pivot_row_[k]] = c_by_step[k];
    }

    int col_of_pos(int step) const { return col_of_pos_[step]; }

    long nnz() const {
        long t = 0;
        for (const auto& c : l_cols_) t += static_cast<long>(c.size());
        for (const auto& r : u_rows_) t += static_cast<long>(r.size());
        return t;
    }

  private:
    /// Smallest Markowitz cost among stability-acceptable entries,
    /// scanning column buckets in increasing count order.
    bool select_pivot(double pivot_tol, int& pr, int& pc, double& piv) {
        long best_cost = -1;
        int scanned_buckets = 0;
        for (int count = 1; count <= m_; ++count) {
            auto& bucket = buckets_[count];
            int keep = 0;
            bool any_valid = false;
            for (int t = 0; t < static_cast<int>(bucket.size()); ++t) {
                int c = bucket[t];
                if (col_done_[c] || ccount_[c] != count) continue;  // stale
                bucket[keep++] = c;
                any_valid = true;
                double colmax = 0.0;
                for (const auto& [r, v] : acol_[c]) colmax = std::max(colmax, std::abs(v));
                if (colmax < pivot_tol) continue;
                for (const auto& [r, v] : acol_[c]) {
                    if (std::abs(v) < 0.1 * colmax || std::abs(v) < pivot_tol) continue;
                    long cost = static_cast<long>(rcount_[r] - 1) * (count - 1);
                    bool better =
                        best_cost < 0 || cost < best_cost ||
                        (cost == best_cost && std::abs(v) > std::abs(piv));
                    if (better) {
                        best_cost = cost;
                        pr = r;
                        pc = c;
                        piv = v;
                    }
                }
            }
            bucket.resize(keep);
            if (any_valid) ++scanned_buckets;
            if (best_cost == 0) break;
            if (best_cost >= 0 &&
                (scanned_buckets >= 3 ||
                 best_cost <= static_cast<long>(count - 1) * count))
                break;
        }
        return best_cost >= 0;
    }

    int m_ = 0;
    std::vector<std::vector<std::pair<int, double>>> l_cols_;  // by step
    std::vector<std::vector<std::pair<int, double>>> u_rows_;  // by step
    std::vector<double> u_diag_;
    std::vector<int> pivot_row_;
    std::vector<int> pos_of_row_, pos_of_col_, col_of_pos_;

    // Factorization workspace.
    std::vector<std::vector<std::pair<int, double>>> acol_;
    std::vector<std::vector<int>> rcols_;
    std::vector<int> rcount_, ccount_;
    std::vector<char> row_done_, col_done_;
    std::vector<int> stamp_, cstamp_, where_;
    std::vector<std::vector<int>> buckets_;
    int tick_ = 0;
};


struct Eta {
    int pos;
    double d_pos;
    std::vector<std::pair<int, double>> d;  // excludes pos
};

enum class VState : unsigned char { Basic, Lower, Upper, Free };

double rest_value(VState s, double lo, double hi) {
    switch (s) {
        case VState::Lower: return lo;
        case VState::Upper: return hi;
        default: return 0.0;
    }
}

/// Deterministic jitter in [0.5, 1.5) derived from an index pair.
double jitter(int j, int salt) {
    std::uint64_t z = (static_cast<std::uint64_t>(j) + 1) * 0x9E3779B97F4A7C15ULL +
                      static_cast<std::uint64_t>(salt) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

struct LPCore::Impl {
    const Model& model;
    LPOptions opts;

    int nv = 0;
    int m_base = 0;
    std::vector<int> col_start, row_idx;
    std::vector<double> val;
    std::vector<double> base_rhs;
    std::vector<Sense> base_sense;
    std::vector<double> cost;  // internal minimization costs
    double obj_constant = 0.0;
    bool maximize = false;

    // Per-solve state.
    int mt = 0, ncols = 0;
    std::vector<double> rhs;
    std::vector<Sense> sense;
    std::vector<int> cut_start, cut_row;
    std::vector<double> cut_val;
    std::vector<double> art_sign;
    std::vector<double> lb, ub, lb_exact, ub_exact, xval, xb;
    std::vector<VState> state;
    std::vector<int> basic_col, pos_of_col;
    SparseLU lu;
    std::vector<Eta> etas;
    std::vector<std::vector<std::pair<int, double>>> basis_scratch;
    std::vector<double> scratch_step, scratch_row;
    std::vector<double> devex;  // reference weights for pricing
    long degenerate_pivots = 0;
    bool bland = false;
    long iters = 0;
    bool phase1 = false;
    bool perturbed_costs = false;
    double cost_pert_amp = 0.0;

    Impl(const Model& mdl, const LPOptions& o) : model(mdl), opts(o) {
        nv = static_cast<int>(mdl.num_variables());
        m_base = static_cast<int>(mdl.num_constraints());
        std::vector<std::vector<std::pair<int, double>>> cols(nv);
        for (int i = 0; i < m_base; ++i)
            for (const auto& [v, c] : mdl.constraints()[i].expr.terms())
                cols[v].push_back({i, c});
        col_start.assign(nv + 1, 0);
        for (int j = 0; j < nv; ++j)
            col_start[j + 1] = col_start[j] + static_cast<int>(cols[j].size());
        row_idx.resize(col_start[nv]);
        val.resize(col_start[nv]);
        for (int j = 0; j < nv; ++j) {
            int at = col_start[j];
            for (const auto& [r, c] : cols[j]) {
                row_idx[at] = r;
                val[at] = c;
                ++at;
            }
        }
        base_rhs.resize(m_base);
        base_sense.resize(m_base);
        for (int i = 0; i < m_base; ++i) {
            base_rhs[i] = mdl.constraints()[i].rhs;
            base_sense[i] = mdl.constraints()[i].sense;
        }
        maximize = mdl.objective().sense == ObjSense::Maximize;
        cost.assign(nv, 0.0);
        for (const auto& [v, c] : mdl.objective().linear.terms())
            cost[v] = maximize ? -c : c;
        obj_constant = mdl.objective().linear.constant();
    }

    bool is_slack(int j) const { return j >= nv && j < nv + mt; }
    bool is_artificial(int j) const { return j >= nv + mt; }

    template <typename Fn>
    void for_col(int j, Fn&& fn) const {
        if (j < nv) {
            for (int t = col_start[j]; t < col_start[j + 1]; ++t) fn(row_idx[t], val[t]);
            for (int t = cut_start[j]; t < cut_start[j + 1]; ++t) fn(cut_row[t], cut_val[t]);
        } else if (is_slack(j)) {
            fn(j - nv, 1.0);
        } else {
            int r = j - nv - mt;
            fn(r, art_sign[r]);
        }
    }

    double col_cost(int j) const {
        if (phase1) {
            if (!is_artificial(j)) return 0.0;
            return perturbed_costs ? 1.0 + 1e-7 * jitter(j, 1) : 1.0;
        }
        double c = j < nv ? cost[j] : 0.0;
        if (perturbed_costs && !is_artificial(j)) c += cost_pert_amp * jitter(j, 2);
        return c;
    }

    void setup(const std::vector<double>& lower, const std::vector<double>& upper,
               const std::vector<Constraint>& extra, int attempt) {
        const int ncuts = static_cast<int>(extra.size());
        mt = m_base + ncuts;
        ncols = nv + 2 * mt;
        rhs.assign(mt, 0.0);
        sense.assign(mt, Sense::LessEqual);
        for (int i = 0; i < m_base; ++i) {
            rhs[i] = base_rhs[i];
            sense[i] = base_sense[i];
        }
        std::vector<std::vector<std::pair<int, double>>> ccols(nv);
        for (int c = 0; c < ncuts; ++c) {
            rhs[m_base + c] = extra[c].rhs - extra[c].expr.constant();
            sense[m_base + c] = extra[c].sense;
            for (const auto& [v, coef] : extra[c].expr.terms())
                ccols[v].push_back({m_base + c, coef});
        }
        cut_start.assign(nv + 1, 0);
        for (int j = 0; j < nv; ++j)
            cut_start[j + 1] = cut_start[j] + static_cast<int>(ccols[j].size());
        cut_row.resize(cut_start[nv]);
        cut_val.resize(cut_start[nv]);
        for (int j = 0; j < nv; ++j) {
            int at = cut_start[j];
            for (const auto& [r, c] : ccols[j]) {
                cut_row[at] = r;
                cut_val[at] = c;
                ++at;
            }
        }

        lb.assign(ncols, 0.0);
        ub.assign(ncols, 0.0);
        for (int j = 0; j < nv; ++j) {
            lb[j] = lower[j];
            ub[j] = upper[j];
        }
        for (int i = 0; i < mt; ++i) {
            int sj = nv + i;
            switch (sense[i]) {
                case Sense::LessEqual: lb[sj] = 0.0; ub[sj] = kInf; break;
                case Sense::Equal: lb[sj] = 0.0; ub[sj] = 0.0; break;
                case Sense::GreaterEqual: lb[sj] = -kInf; ub[sj] = 0.0; break;
            }
        }
        lb_exact = lb;
        ub_exact = ub;

        // Degenerate vertices are endemic to assignment-style rows; a tiny
        // deterministic relaxation of every finite bound keeps ratio-test
        // steps positive. Bounds are restored (and the point re-verified)
        // before the solution is reported.
        for (int j = 0; j < nv + mt; ++j) {
            if (lb[j] > -kInf)
                lb[j] -= 1e-9 * jitter(j, 11 + attempt) * (1.0 + std::abs(lb[j]));
            if (ub[j] < kInf)
                ub[j] += 1e-9 * jitter(j, 17 + attempt) * (1.0 + std::abs(ub[j]));
        }
        cost_pert_amp = 0.0;
        for (int j = 0; j < nv; ++j)
            cost_pert_amp = std::max(cost_pert_amp, std::abs(cost[j]));
        cost_pert_amp = 1e-8 * std::max(cost_pert_amp, 1.0) * (1 + attempt);

        state.assign(ncols, VState::Lower);
        xval.assign(ncols, 0.0);
        for (int j = 0; j < nv + mt; ++j) {
            if (lb[j] > -kInf) {
                state[j] = VState::Lower;
                xval[j] = lb[j];
            } else if (ub[j] < kInf) {
                state[j] = VState::Upper;
                xval[j] = ub[j];
            } else {
                state[j] = VState::Free;
                xval[j] = 0.0;
            }
        }

        art_sign.assign(mt, 1.0);
        std::vector<double> act(mt, 0.0);
        for (int j = 0; j < nv; ++j)
            if (xval[j] != 0.0)
                for_col(j, [&](int r, double c) { act[r] += c * xval[j]; });

        basic_col.assign(mt, -1);
        pos_of_col.assign(ncols, -1);
        xb.assign(mt, 0.0);
        for (int i = 0; i < mt; ++i) {
            int sj = nv + i;
            int aj = nv + mt + i;
            double resid = rhs[i] - act[i];
            if (resid >= lb[sj] - 1e-12 && resid <= ub[sj] + 1e-12) {
                basic_col[i] = sj;
                xb[i] = resid;
                state[sj] = VState::Basic;
                lb[aj] = ub[aj] = 0.0;
                state[aj] = VState::Lower;
                xval[aj] = 0.0;
            } else {
                double left = resid - xval[sj];
                art_sign[i] = left >= 0 ? 1.0 : -1.0;
                basic_col[i] = aj;
                xb[i] = std::abs(left);
                state[aj] = VState::Basic;
                lb[aj] = 0.0;
                ub[aj] = kInf;
            }
            pos_of_col[basic_col[i]] = i;
        }

        scratch_step.assign(mt, 0.0);
        scratch_row.assign(mt, 0.0);
        devex.assign(ncols, 1.0);
        etas.clear();
        degenerate_pivots = 0;
        bland = false;
        iters = 0;
        phase1 = false;
        perturbed_costs = true;
    }

    bool refactorize() {
        basis_scratch.assign(mt, {});
        for (int i = 0; i < mt; ++i) {
            auto& col = basis_scratch[i];
            for_col(basic_col[i], [&](int r, double c) { col.push_back({r, c}); });
        }
        lu.reset(mt);
        auto f0 = std::chrono::steady_clock::now();
        bool ok = lu.factorize(basis_scratch, opts.pivot_tol);
        g_lp_perf.factor_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - f0).count();
        ++g_lp_perf.factorizations;
        if (!ok) return false;
        g_lp_perf.lu_nnz = lu.nnz();
        etas.clear();
        recompute_basics();
        return true;
    }

    void recompute_basics() {
        std::vector<double> r = rhs;
        for (int j = 0; j < ncols; ++j) {
            if (state[j] == VState::Basic || xval[j] == 0.0) continue;
            for_col(j, [&](int row, double c) { r[row] -= c * xval[j]; });
        }
        lu.ftran(r, scratch_step);
        for (int k = 0; k < mt; ++k) xb[lu.col_of_pos(k)] = scratch_step[k];
    }

    /// out[p] (by basis position) solves B out = dense (by row).
    void ftran(std::vector<double>& dense, std::vector<double>& out) {
        lu.ftran(dense, scratch_step);
        for (int k = 0; k < mt; ++k) out[lu.col_of_pos(k)] = scratch_step[k];
        for (const Eta& e : etas) {
            double t = out[e.pos] / e.d_pos;
            if (t != 0.0)
                for (const auto& [p, v] : e.d) out[p] -= v * t;
            out[e.pos] = t;
        }
    }

    /// out (by row) solves B^T out = c (by basis position; destroyed).
    void btran(std::vector<double>& c_by_pos, std::vector<double>& out) {
        for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
            double acc = c_by_pos[it->pos];
            for (const auto& [p, v] : it->d) acc -= v * c_by_pos[p];
            c_by_pos[it->pos] = acc / it->d_pos;
        }
        for (int k = 0; k < mt; ++k) scratch_step[k] = c_by_pos[lu.col_of_pos(k)];
        lu.btran(scratch_step, out);
    }
};

LPCore::LPCore(const Model& model, const LPOptions& options)
    : impl_(new Impl(model, options)) {}
LPCore::~LPCore() = default;
const Model& LPCore::model() const { return impl_->model; }

LPSolution solve_lp(const Model& model, const LPOptions& options) {
    if (model.has_integer_variables() || !model.sos1_sets().empty())
        throw ModelError("solve_lp: model must be continuous without SOS1 sets");
    if (model.objective().is_quadratic())
        throw ModelError("solve_lp: model objective must be linear");
    std::vector<double> lo(model.num_variables()), hi(model.num_variables());
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        lo[j] = model.variables()[j].lower;
        hi[j] = model.variables()[j].upper;
    }
    LPCore core(model, options);
    return core.solve(lo, hi);
}

LPSolution LPCore::solve(const std::vector<double>& lower, const std::vector<double>& upper,
                         const std::vector<Constraint>& extra_rows) {
    Impl& w = *impl_;
    if (lower.size() != w.model.num_variables() || upper.size() != w.model.num_variables())
        throw ModelError("LPCore::solve: bound vectors must match the variable count");
    LPSolution sol;
    for (std::size_t j = 0; j < lower.size(); ++j)
        if (lower[j] > upper[j] + 1e-12) {
            sol.status = LPStatus::Infeasible;
            return sol;
        }

    const int nv = w.nv;
    long total_iters = 0;

    for (int attempt = 0; attempt < 3; ++attempt) {
        w.setup(lower, upper, extra_rows, attempt);
        LPStatus status = run_to_optimality();
        total_iters += w.iters;
        sol.iterations = total_iters;
        if (status == LPStatus::NumericalFailure && attempt + 1 < 3) continue;
        if (status != LPStatus::Optimal) {
            sol.status = status;
            return sol;
        }
        break;
    }

    // Report: values, duals, and both objective values.
    const int mt = w.mt;
    sol.values.assign(nv, 0.0);
    for (int j = 0; j < nv; ++j)
        sol.values[j] = w.state[j] == VState::Basic ? w.xb[w.pos_of_col[j]] : w.xval[j];

    w.phase1 = false;
    w.perturbed_costs = false;
    std::vector<double> cb(mt), y(mt, 0.0);
    for (int i = 0; i < mt; ++i) cb[i] = w.col_cost(w.basic_col[i]);
    w.btran(cb, y);

    double obj = w.obj_constant;
    for (int j = 0; j < nv; ++j)
        obj += (w.maximize ? -w.cost[j] : w.cost[j]) * sol.values[j];
    sol.objective = obj;

    double dual_obj = w.obj_constant * (w.maximize ? -1.0 : 1.0);
    for (int i = 0; i < mt; ++i) dual_obj += y[i] * w.rhs[i];
    for (int j = 0; j < nv + mt; ++j) {
        if (w.state[j] == VState::Basic || w.xval[j] == 0.0) continue;
        double dj = w.col_cost(j);
        w.for_col(j, [&](int r, double c) { dj -= y[r] * c; });
        dual_obj += dj * w.xval[j];
    }
    sol.dual_objective = w.maximize ? -dual_obj : dual_obj;

    sol.duals.assign(w.m_base, 0.0);
    for (int i = 0; i < w.m_base; ++i) sol.duals[i] = w.maximize ? -y[i] : y[i];
    sol.status = LPStatus::Optimal;
    return sol;
}

/// Runs phase 1 (when needed) and phase 2, each first with perturbed
/// costs and then to exactness, restoring exact bounds at the end.
LPStatus LPCore::run_to_optimality() {
    Impl& w = *impl_;
    const int nv = w.nv;
    const int mt = w.mt;
    const int ncols = w.ncols;
    const long max_iters = w.opts.max_iterations > 0
                               ? w.opts.max_iterations
                               : 2000 + 200L * (static_cast<long>(ncols) + mt);
    const long bland_threshold = 5L * (static_cast<long>(nv) + mt);

    std::vector<double> cb(mt), y(mt), wcol(mt), dense(mt), epos(mt), rho(mt);
    std::vector<double>& xb = w.xb;

    bool need_phase1 = false;
    for (int i = 0; i < mt; ++i)
        if (w.is_artificial(w.basic_col[i]) && xb[i] > w.opts.feas_tol) need_phase1 = true;

    if (!w.refactorize()) return LPStatus::NumericalFailure;

    double cost_scale = 1.0;
    for (int j = 0; j < nv; ++j) cost_scale = std::max(cost_scale, std::abs(w.cost[j]));

    for (int stage = need_phase1 ? 0 : 2; stage < 4; ++stage) {
        // Stages 0,1: phase 1 perturbed then exact; 2,3: phase 2 likewise.
        w.phase1 = stage < 2;
        w.perturbed_costs = (stage % 2) == 0;
        if (stage == 2) {
            for (int i = 0; i < mt; ++i) {
                int aj = nv + mt + i;
                w.lb[aj] = 0.0;
                w.ub[aj] = 0.0;
                if (w.state[aj] != VState::Basic) w.xval[aj] = 0.0;
            }
        }
        if (stage == 3) {
            // Drop the bound relaxation: snap every nonbasic back to its
            // exact bound and recompute the basics.
            w.lb = w.lb_exact;
            w.ub = w.ub_exact;
            for (int i = 0; i < mt; ++i) {
                int aj = nv + mt + i;
                w.lb[aj] = 0.0;
                w.ub[aj] = 0.0;
            }
            for (int j = 0; j < ncols; ++j) {
                if (w.state[j] == VState::Basic || w.state[j] == VState::Free) continue;
                w.xval[j] = rest_value(w.state[j], w.lb[j], w.ub[j]);
            }
            if (!w.refactorize()) return LPStatus::NumericalFailure;
        }
        const double dtol = w.opts.opt_tol * (w.phase1 ? 1.0 : cost_scale);
        // Large bases amortize factorization over more pivots.
        const int refactor_every =
            std::max(w.opts.refactor_interval, std::min(500, mt / 6));
        int since_refactor = 0;

        while (true) {
            if (w.iters >= max_iters) return LPStatus::IterationLimit;
            if (since_refactor >= refactor_every) {
                if (!w.refactorize()) return LPStatus::NumericalFailure;
                since_refactor = 0;
            }

            for (int i = 0; i < mt; ++i) cb[i] = w.col_cost(w.basic_col[i]);
            std::fill(y.begin(), y.end(), 0.0);
            w.btran(cb, y);

            // Devex pricing: most negative reduced cost scaled by the
            // reference weight; Bland's rule after heavy degeneracy.
            int enter = -1, enter_dir = 0;
            double enter_score = 0.0;
            for (int j = 0; j < ncols; ++j) {
                VState st = w.state[j];
                if (st == VState::Basic) continue;
                if (w.is_artificial(j)) continue;
                if (st != VState::Free && w.lb[j] == w.ub[j]) continue;
                double dj = w.col_cost(j);
                w.for_col(j, [&](int r, double c) { dj -= y[r] * c; });
                int dir = 0;
                if (st == VState::Lower) {
                    if (dj < -dtol) dir = +1;
                } else if (st == VState::Upper) {
                    if (dj > dtol) dir = -1;
                } else {
                    if (dj < -dtol) dir = +1;
                    else if (dj > dtol) dir = -1;
                }
                if (dir == 0) continue;
                if (w.bland) { enter = j; enter_dir = dir; break; }
                double score = w.opts.use_devex ? dj * dj / w.devex[j] : std::abs(dj);
                if (score > enter_score) {
                    enter_score = score;
                    enter = j;
                    enter_dir = dir;
                }
            }
            if (enter < 0) break;

            std::fill(dense.begin(), dense.end(), 0.0);
            w.for_col(enter, [&](int r, double c) { dense[r] += c; });
            std::fill(wcol.begin(), wcol.end(), 0.0);
            w.ftran(dense, wcol);

            // Two-pass (Harris) ratio test: pass one finds the largest
            // step under tolerance-relaxed bounds, pass two picks the
            // best-conditioned pivot among rows blocking within it.
            const double ptol = 1e-9;
            double best_t = kInf;
            int leave_pos = -1, leave_to = 0;
            if (!w.bland) {
                double tmax = kInf;
                for (int p = 0; p < mt; ++p) {
                    double d = enter_dir * wcol[p];
                    int bj = w.basic_col[p];
                    if (d > ptol) {
                        if (w.lb[bj] == -kInf) continue;
                        double relax = w.opts.feas_tol * (1.0 + std::abs(w.lb[bj]));
                        tmax = std::min(tmax, std::max((xb[p] - w.lb[bj] + relax) / d, 0.0));
                    } else if (d < -ptol) {
                        if (w.ub[bj] == kInf) continue;
                        double relax = w.opts.feas_tol * (1.0 + std::abs(w.ub[bj]));
                        tmax = std::min(tmax, std::max((xb[p] - w.ub[bj] - relax) / d, 0.0));
                    }
                }
                double best_pivot = 0.0;
                for (int p = 0; p < mt; ++p) {
                    double d = enter_dir * wcol[p];
                    int bj = w.basic_col[p];
                    double t;
                    int to;
                    if (d > ptol) {
                        if (w.lb[bj] == -kInf) continue;
                        t = std::max((xb[p] - w.lb[bj]) / d, 0.0);
                        to = -1;
                    } else if (d < -ptol) {
                        if (w.ub[bj] == kInf) continue;
                        t = std::max((xb[p] - w.ub[bj]) / d, 0.0);
                        to = +1;
                    } else {
                        continue;
                    }
                    if (t > tmax) continue;
                    if (std::abs(wcol[p]) > best_pivot) {
                        best_pivot = std::abs(wcol[p]);
                        best_t = t;
                        leave_pos = p;
                        leave_to = to;
                    }
                }
            } else {
                for (int p = 0; p < mt; ++p) {
                    double d = enter_dir * wcol[p];
                    int bj = w.basic_col[p];
                    double t;
                    int to;
                    if (d > ptol) {
                        if (w.lb[bj] == -kInf) continue;
                        t = std::max((xb[p] - w.lb[bj]) / d, 0.0);
                        to = -1;
                    } else if (d < -ptol) {
                        if (w.ub[bj] == kInf) continue;
                        t = std::max((xb[p] - w.ub[bj]) / d, 0.0);
                        to = +1;
                    } else {
                        continue;
                    }
                    bool better;
                    if (leave_pos < 0 || t < best_t - 1e-12) {
                        better = true;
                    } else if (t <= best_t + 1e-12) {
                        better = bj < w.basic_col[leave_pos];
                    } else {
                        better = false;
                    }
                    if (better) {
                        best_t = t;
                        leave_pos = p;
                        leave_to = to;
                    }
                }
            }
            double flip_t = kInf;
            if (w.state[enter] != VState::Free && w.lb[enter] > -kInf && w.ub[enter] < kInf)
                flip_t = w.ub[enter] - w.lb[enter];

            if (leave_pos < 0 && flip_t == kInf)
                return w.phase1 ? LPStatus::NumericalFailure : LPStatus::Unbounded;

            ++w.iters;
            double step = std::min(best_t, flip_t);
            if (step <= 1e-12) ++w.degenerate_pivots;
            if (!w.bland && w.degenerate_pivots > bland_threshold) w.bland = true;

            for (int p = 0; p < mt; ++p)
                if (wcol[p] != 0.0) xb[p] -= enter_dir * step * wcol[p];

            if (flip_t <= best_t) {
                w.state[enter] =
                    w.state[enter] == VState::Lower ? VState::Upper : VState::Lower;
                w.xval[enter] = rest_value(w.state[enter], w.lb[enter], w.ub[enter]);
                ++since_refactor;
                continue;
            }

            if (std::abs(wcol[leave_pos]) < w.opts.pivot_tol) {
                if (since_refactor > 0) {
                    if (!w.refactorize()) return LPStatus::NumericalFailure;
                    since_refactor = 0;
                    continue;
                }
                return LPStatus::NumericalFailure;
            }

            // Devex reference update from the pivot row. Skipped for
            // near-degenerate pivots, whose ratios would blow the
            // weights up and wash out the reference frame.
            if (w.opts.use_devex && std::abs(wcol[leave_pos]) > 1e-4) {
                const double alpha_q = wcol[leave_pos];
                std::fill(epos.begin(), epos.end(), 0.0);
                epos[leave_pos] = 1.0;
                std::fill(rho.begin(), rho.end(), 0.0);
                w.btran(epos, rho);
                const double wq = w.devex[enter];
                double max_weight = 1.0;
                for (int j = 0; j < w.nv + mt; ++j) {
                    if (w.state[j] == VState::Basic || j == enter) continue;
                    double alpha = 0.0;
                    w.for_col(j, [&](int r, double c) { alpha += rho[r] * c; });
                    if (alpha == 0.0) continue;
                    double cand = (alpha / alpha_q) * (alpha / alpha_q) * wq;
                    if (cand > 1e7) cand = 1e7;
                    if (cand > w.devex[j]) w.devex[j] = cand;
                    if (w.devex[j] > max_weight) max_weight = w.devex[j];
                }
                w.devex[w.basic_col[leave_pos]] =
                    std::min(1e7, std::max(1.0, wq / (alpha_q * alpha_q)));
                if (max_weight >= 1e7) w.devex.assign(w.devex.size(), 1.0);
            }

            int leaving_col = w.basic_col[leave_pos];
            double entering_start = w.state[enter] == VState::Free
                                        ? w.xval[enter]
                                        : rest_value(w.state[enter], w.lb[enter], w.ub[enter]);
            w.state[leaving_col] = leave_to < 0 ? VState::Lower : VState::Upper;
            w.xval[leaving_col] =
                rest_value(w.state[leaving_col], w.lb[leaving_col], w.ub[leaving_col]);
            w.pos_of_col[leaving_col] = -1;

            Eta e;
            e.pos = leave_pos;
            e.d_pos = wcol[leave_pos];
            for (int p = 0; p < mt; ++p)
                if (p != leave_pos && wcol[p] != 0.0) e.d.push_back({p, wcol[p]});
            w.etas.push_back(std::move(e));

            w.basic_col[leave_pos] = enter;
            w.pos_of_col[enter] = leave_pos;
            w.state[enter] = VState::Basic;
            xb[leave_pos] = entering_start + enter_dir * step;
            ++since_refactor;
        }

        if (stage == 1) {
            double infeas = 0.0;
            for (int i = 0; i < mt; ++i)
                if (w.is_artificial(w.basic_col[i])) infeas += std::max(xb[i], 0.0);
            if (infeas > 10 * w.opts.feas_tol) return LPStatus::Infeasible;
        }
    }

    // Verify the claimed optimum on fresh factors and exact bounds.
    if (!w.refactorize()) return LPStatus::NumericalFailure;
    double value_scale = 1.0;
    for (int p = 0; p < mt; ++p) value_scale = std::max(value_scale, std::abs(xb[p]));
    for (int p = 0; p < mt; ++p) {
        int bj = w.basic_col[p];
        double lo_viol = w.lb[bj] > -kInf ? w.lb[bj] - xb[p] : 0.0;
        double hi_viol = w.ub[bj] < kInf ? xb[p] - w.ub[bj] : 0.0;
        if (std::max(lo_viol, hi_viol) > w.opts.feas_tol * value_scale)
            return LPStatus::NumericalFailure;
    }
    return LPStatus::Optimal;
}

}  // namespace ordmeas
