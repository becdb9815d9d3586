#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>


#include "mgems/milp.hpp"

// Bounded-variable dual simplex on a dense compact tableau.
//
// Every row gets a logical variable (a*x + s = b with sense encoded in the
// bounds of s), the initial basis is the logical one, and structural variables
// start nonbasic on the bound their objective sign prefers, which makes the
// start dual feasible without artificials. Dual pivots then repair primal
// feasibility; the same loop re-optimizes after bound changes, which is all
// branch-and-bound needs. The tableau is maintained over nonbasic columns
// only (width = number of structurals), with the classic swap trick on pivots.

namespace mgems {

enum class LpStatus { optimal, infeasible, budget_exceeded, cutoff_reached, numerical };

struct LpControls {
  long pivot_limit = 200'000'000;
  double cutoff = kInf;              // stop once the objective proves > cutoff
  double deadline_s = kInf;          // wall-clock safety net
  std::chrono::steady_clock::time_point t0{};
};

class SimplexEngine {
 public:
  explicit SimplexEngine(const MilpModel& m)
      : nstruct_(m.n_vars()), nrows_(m.n_rows()), ncols_(m.n_vars() + m.n_rows()) {
    lob_.resize(ncols_);
    upb_.resize(ncols_);
    cost_.resize(ncols_, 0.0);
    for (int j = 0; j < nstruct_; ++j) {
      lob_[j] = m.vars[j].lo;
      upb_[j] = m.vars[j].up;
      cost_[j] = m.obj[j];
    }
    rhs_.resize(nrows_);
    row_coef_.resize(nrows_);
    for (int i = 0; i < nrows_; ++i) {
      const auto& r = m.rows[i];
      rhs_[i] = r.rhs;
      row_coef_[i] = r.coef;
      int s = nstruct_ + i;
      switch (r.sense) {
        case RowSense::le: lob_[s] = 0.0; upb_[s] = kInf; break;
        case RowSense::eq: lob_[s] = 0.0; upb_[s] = 0.0; break;
        case RowSense::ge: lob_[s] = -kInf; upb_[s] = 0.0; break;
      }
    }
    orig_lob_ = lob_;
    orig_upb_ = upb_;

    tab_.assign(static_cast<std::size_t>(nrows_) * nstruct_, 0.0);
    for (int i = 0; i < nrows_; ++i)
      for (const auto& [id, c] : row_coef_[i]) tab_[idx(i, id)] = c;
    beta0_ = rhs_;
    basis_.resize(nrows_);
    loc_.resize(ncols_);
    nb_.resize(nstruct_);
    at_upper_.assign(nstruct_, 0);
    nbval_.assign(nstruct_, 0.0);
    dj_.resize(nstruct_);
    for (int i = 0; i < nrows_; ++i) {
      basis_[i] = nstruct_ + i;
      loc_[nstruct_ + i] = i;
    }
    for (int j = 0; j < nstruct_; ++j) {
      nb_[j] = j;
      loc_[j] = ~j;
      dj_[j] = cost_[j];
      pick_entry_side(j);
    }
    xb_.resize(nrows_);
    recompute_basics();
    obj_ = objective_from_state();
  }

  int n_struct() const { return nstruct_; }
  int n_rows() const { return nrows_; }
  double objective() const { return obj_; }
  long total_pivots() const { return pivots_; }

  // Bound edits keep the basis; a nonbasic variable snaps to its flagged side
  // and basic values are adjusted through the tableau column.
  void set_var_bounds(int var, double lo, double up) {
    lob_[var] = lo;
    upb_[var] = up;
    if (loc_[var] >= 0) return;  // basic: value untouched, may become violated
    int p = ~loc_[var];
    double nv;
    if (at_upper_[p])
      nv = std::isfinite(up) ? up : (std::isfinite(lo) ? (at_upper_[p] = 0, lo) : 0.0);
    else
      nv = std::isfinite(lo) ? lo : (std::isfinite(up) ? (at_upper_[p] = 1, up) : 0.0);
    shift_nonbasic(p, nv);
  }

  void reset_var_bounds(int var) { set_var_bounds(var, orig_lob_[var], orig_upb_[var]); }

  double var_value(int var) const {
    if (loc_[var] >= 0) return xb_[loc_[var]];
    return nbval_[~loc_[var]];
  }

  std::vector<double> extract_x() const {
    std::vector<double> x(nstruct_);
    for (int j = 0; j < nstruct_; ++j) x[j] = var_value(j);
    return x;
  }

  // Refresh basic values from first principles of the current basis; clears
  // incremental drift. O(m*n).
  void recompute_basics() {
    xb_ = beta0_;
    for (int j = 0; j < nstruct_; ++j) {
      double v = nbval_[j];
      if (v == 0.0) continue;
      const double* col = tab_.data() + j;
      for (int i = 0; i < nrows_; ++i) xb_[i] -= col[static_cast<std::size_t>(i) * nstruct_] * v;
    }
  }

  LpStatus dual_solve(const LpControls& ctl) {
    long start_pivots = pivots_;
    long stall = 0;
    bool bland = false;
    double last_obj = obj_;
    for (int phase = 0; phase < 16; ++phase) {
      // ---- dual loop: repair primal feasibility ----
      while (true) {
        if (pivots_ - start_pivots >= ctl.pivot_limit) return LpStatus::budget_exceeded;
        if ((pivots_ & 0xff) == 0 && std::isfinite(ctl.deadline_s)) {
          double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctl.t0).count();
          if (el > ctl.deadline_s) return LpStatus::budget_exceeded;
        }
        if (std::isfinite(ctl.cutoff) && obj_ > ctl.cutoff) return LpStatus::cutoff_reached;
        if (!std::isfinite(obj_) || std::fabs(obj_) > 1e16) return LpStatus::numerical;

        int r = select_leaving(bland);
        if (r < 0) {
          // Clear incremental drift before moving on; if fresh values reveal
          // a violation, keep pivoting.
          recompute_basics();
          r = select_leaving(bland);
          if (r < 0) break;
        }
        int bv = basis_[r];
        double v = xb_[r];
        double delta = v > upb_[bv] ? v - upb_[bv] : v - lob_[bv];  // signed infeasibility

        int q = select_entering(r, delta, bland);
        if (q == -1) return LpStatus::infeasible;
        if (q == -2) return LpStatus::numerical;

        pivot(r, q, delta, delta > 0);
        ++pivots_;

        if (obj_ > last_obj + 1e-12 * (1.0 + std::fabs(last_obj))) {
          last_obj = obj_;
          stall = 0;
          bland = false;
        } else if (++stall > 800) {
          bland = true;
        }
        if ((pivots_ & 0x3fff) == 0) recompute_basics();
      }
      // ---- primal cleanup: repair dual feasibility ----
      // The tiny-pivot floor in the dual ratio test skips noise-level columns,
      // which can leave wrong-signed reduced costs behind at a primal feasible
      // basis. Finish with primal pivots so claimed optima really are optimal.
      long steps = 0;
      const long step_cap = 200 + 2L * (nstruct_ + nrows_);
      while (true) {
        if (pivots_ - start_pivots >= ctl.pivot_limit) return LpStatus::budget_exceeded;
        int p = select_cleanup_entering();
        if (p < 0) break;
        if (++steps > step_cap) return LpStatus::numerical;
        if (!primal_step(p)) return LpStatus::numerical;
        if ((pivots_ & 0x3fff) == 0) recompute_basics();
      }
      recompute_basics();
      if (select_leaving(false) < 0) {
        obj_ = objective_from_state();
        return LpStatus::optimal;
      }
      // cleanup steps disturbed primal feasibility: take another dual pass
    }
    return LpStatus::numerical;
  }

  // ---- post-solve verification against the original data ----

  // Max scaled primal residual over rows and bound violation over variables.
  double primal_residual() const {
    std::vector<double> x = extract_x();
    double worst = 0.0;
    for (int i = 0; i < nrows_; ++i) {
      double act = 0.0, scale = 1.0 + std::fabs(rhs_[i]);
      for (const auto& [id, c] : row_coef_[i]) {
        act += c * x[id];
        scale += std::fabs(c * x[id]);
      }
      double lo = lob_[nstruct_ + i], up = upb_[nstruct_ + i];
      // slack value s = rhs - act must lie in [lo, up]
      double s = rhs_[i] - act;
      double viol = std::max(lo - s, s - up);
      worst = std::max(worst, viol / scale);
    }
    for (int j = 0; j < nstruct_; ++j) {
      double scale = 1.0 + std::fabs(lob_[j]) + std::fabs(upb_[j]);
      double viol = std::max(lob_[j] - x[j], x[j] - upb_[j]);
      worst = std::max(worst, viol / scale);
    }
    return worst;
  }

  // Worst reduced-cost sign violation at the claimed optimal basis.
  double dual_sign_violation() const {
    double worst = 0.0;
    for (int p = 0; p < nstruct_; ++p) {
      int var = nb_[p];
      if (lob_[var] == upb_[var]) continue;  // fixed: any sign admissible
      double d = dj_[p];
      bool up = at_upper_[p] != 0;
      if (!up && std::isfinite(lob_[var])) worst = std::max(worst, -d);
      if (up && std::isfinite(upb_[var])) worst = std::max(worst, d);
    }
    return worst;
  }

  // y'b + sum over nonbasic of d_j x_j; equals the primal objective at any
  // consistent basis, and certifies optimality once the d_j signs are right.
  double dual_objective() const {
    double val = 0.0;
    std::vector<double> y(nrows_, 0.0);
    for (int p = 0; p < nstruct_; ++p) {
      int var = nb_[p];
      if (var >= nstruct_) y[var - nstruct_] = -dj_[p];
    }
    // slacks that are basic contribute y_i = 0
    for (int i = 0; i < nrows_; ++i) val += y[i] * rhs_[i];
    for (int p = 0; p < nstruct_; ++p)
      if (nb_[p] < nstruct_) val += dj_[p] * nbval_[p];
    return val;
  }

  double objective_from_state() const {
    double val = 0.0;
    for (int j = 0; j < nstruct_; ++j) val += cost_[j] * var_value(j);
    return val;
  }

 private:
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * nstruct_ + c; }

  void pick_entry_side(int p) {
    int var = nb_[p];
    double c = dj_[p];
    bool lo_fin = std::isfinite(lob_[var]), up_fin = std::isfinite(upb_[var]);
    bool to_upper;
    if (c > 1e-12)
      to_upper = !lo_fin;
    else if (c < -1e-12)
      to_upper = up_fin;
    else
      to_upper = !lo_fin && up_fin;
    at_upper_[p] = to_upper ? 1 : 0;
    if (to_upper)
      nbval_[p] = up_fin ? upb_[var] : 0.0;
    else
      nbval_[p] = lo_fin ? lob_[var] : 0.0;
  }

  void shift_nonbasic(int p, double new_val) {
    double dv = new_val - nbval_[p];
    if (dv == 0.0) return;
    nbval_[p] = new_val;
    const double* col = tab_.data() + p;
    for (int i = 0; i < nrows_; ++i) xb_[i] -= col[static_cast<std::size_t>(i) * nstruct_] * dv;
    obj_ += dj_[p] * dv;  // objective moves by the reduced cost times the shift
  }

  int select_leaving(bool bland) const {
    int best = -1;
    double best_v = 0.0;
    for (int i = 0; i < nrows_; ++i) {
      int var = basis_[i];
      double lo = lob_[var], up = upb_[var];
      double scale = 1.0 + (std::isfinite(lo) ? std::fabs(lo) : 0.0) +
                     (std::isfinite(up) ? std::fabs(up) : 0.0) + std::fabs(xb_[i]);
      double viol = std::max(lo - xb_[i], xb_[i] - up);
      if (viol <= 1e-9 * scale) continue;
      if (bland) return i;
      if (viol > best_v) {
        best_v = viol;
        best = i;
      }
    }
    return best;
  }

  // Dual ratio test over row r. Returns entering position, -1 if the row
  // proves infeasibility, -2 on numerical breakdown. Pivots below the strict
  // magnitude floor are never taken: a reciprocal of ~1e7 or more would wreck
  // the persistent tableau. If only such noise-level columns remain, the
  // verdict is numerical (rebuild and retry), not infeasible.
  static constexpr double kPivStrict = 1e-7;
  static constexpr double kPivLoose = 1e-9;

  int select_entering(int r, double delta, bool bland) const {
    const double* row = tab_.data() + idx(r, 0);
    double sgn = delta > 0 ? 1.0 : -1.0;
    double best_ratio = kInf;
    bool loose_only = false;
    // pass 1: minimum dual ratio among admissible directions
    for (int p = 0; p < nstruct_; ++p) {
      int var = nb_[p];
      if (lob_[var] == upb_[var]) continue;
      double a = row[p] * sgn;
      bool dir_ok = at_upper_[p] ? (a < 0.0) : (a > 0.0);
      if (!dir_ok) continue;
      double mag = std::fabs(a);
      if (mag <= kPivStrict) {
        if (mag > kPivLoose) loose_only = true;
        continue;
      }
      double d = at_upper_[p] ? -dj_[p] : dj_[p];
      double ratio = std::max(d, 0.0) / mag;
      if (ratio < best_ratio) best_ratio = ratio;
    }
    if (best_ratio == kInf) return loose_only ? -2 : -1;
    // pass 2: among near-ties prefer the largest pivot, then lowest var id
    double tie = best_ratio + 1e-9 * (1.0 + best_ratio);
    int best = -1;
    double best_a = 0.0;
    for (int p = 0; p < nstruct_; ++p) {
      int var = nb_[p];
      if (lob_[var] == upb_[var]) continue;
      double a = row[p] * sgn;
      bool dir_ok = at_upper_[p] ? (a < 0.0) : (a > 0.0);
      if (!dir_ok) continue;
      double mag = std::fabs(a);
      if (mag <= kPivStrict) continue;
      double d = at_upper_[p] ? -dj_[p] : dj_[p];
      double ratio = std::max(d, 0.0) / mag;
      if (ratio > tie) continue;
      if (bland) {
        if (best == -1 || nb_[p] < nb_[best]) best = p;
      } else if (mag > best_a + 1e-12 ||
                 (mag > best_a - 1e-12 && (best == -1 || nb_[p] < nb_[best]))) {
        best_a = mag;
        best = p;
      }
    }
    if (best == -1) return -2;
    return best;
  }

  // Most violated wrong-signed reduced cost over nonbasic positions, or -1 if
  // the basis is dual feasible to working tolerance. A position parked at a
  // finite lower bound wants d >= 0, at a finite upper bound d <= 0, and a
  // free variable floating at zero wants d == 0.
  int select_cleanup_entering() const {
    int best = -1;
    double worst = 1e-9;
    for (int p = 0; p < nstruct_; ++p) {
      int var = nb_[p];
      if (lob_[var] == upb_[var]) continue;
      double d = dj_[p];
      double v;
      if (at_upper_[p] && std::isfinite(upb_[var]))
        v = d;
      else if (!at_upper_[p] && std::isfinite(lob_[var]))
        v = -d;
      else
        v = std::fabs(d);
      if (v > worst) {
        worst = v;
        best = p;
      }
    }
    return best;
  }

  // One primal step on nonbasic position p in its improving direction: either
  // a bound flip or a pivot on the blocking basic variable. Returns false on
  // numerical breakdown (only noise-level blocking pivots, or a ray that looks
  // unbounded), which callers treat like any other numerical verdict.
  bool primal_step(int p) {
    int var = nb_[p];
    double sgn = dj_[p] > 0.0 ? -1.0 : 1.0;
    double own = sgn > 0 ? upb_[var] - nbval_[p] : nbval_[p] - lob_[var];
    const double* col = tab_.data() + p;
    // pass 1: smallest blocking step over basics, capped by the own bound.
    // Column entries at or below the noise floor are treated as zero, exactly
    // like the dual ratio test does; the drift they cause is bounded by
    // noise * step and gets repaired by the next dual pass if it matters.
    double tmin = std::isfinite(own) ? own : kInf;
    for (int i = 0; i < nrows_; ++i) {
      double a = col[static_cast<std::size_t>(i) * nstruct_];
      if (std::fabs(a) <= kPivLoose) continue;
      double rate = -a * sgn;  // displacement of basic i per unit step
      int bvar = basis_[i];
      double room = rate > 0 ? upb_[bvar] - xb_[i] : xb_[i] - lob_[bvar];
      if (!std::isfinite(room)) continue;
      double t = std::max(room, 0.0) / std::fabs(rate);
      if (t < tmin) tmin = t;
    }
    if (!std::isfinite(tmin)) return false;
    double tie = tmin + 1e-9 * (1.0 + tmin);
    if (own <= tie) {
      at_upper_[p] = sgn > 0 ? 1 : 0;
      shift_nonbasic(p, sgn > 0 ? upb_[var] : lob_[var]);
      ++pivots_;
      return true;
    }
    // pass 2: among near-minimal blockers take the largest pivot magnitude
    int r = -1;
    double best_a = 0.0;
    for (int i = 0; i < nrows_; ++i) {
      double a = col[static_cast<std::size_t>(i) * nstruct_];
      if (std::fabs(a) <= kPivLoose) continue;
      double rate = -a * sgn;
      int bvar = basis_[i];
      double room = rate > 0 ? upb_[bvar] - xb_[i] : xb_[i] - lob_[bvar];
      if (!std::isfinite(room)) continue;
      double t = std::max(room, 0.0) / std::fabs(rate);
      if (t > tie) continue;
      if (std::fabs(a) > best_a) {
        best_a = std::fabs(a);
        r = i;
      }
    }
    if (r < 0 || best_a <= kPivStrict) return false;
    double a_rq = col[static_cast<std::size_t>(r) * nstruct_];
    pivot(r, p, tmin * sgn * a_rq, -a_rq * sgn > 0);
    ++pivots_;
    return true;
  }

  // Swap basic(r) and nonbasic(q); the entering variable moves by delta/a_rq
  // and the leaving variable lands on the bound named by leave_to_upper (for
  // a dual step that is the violated side, for a primal step the side it was
  // pushed toward).
  void pivot(int r, int q, double delta, bool leave_to_upper) {
    const int n = nstruct_;
    double* rowr = tab_.data() + idx(r, 0);
    double a_rq = rowr[q];
    double inv = 1.0 / a_rq;
    int leaving = basis_[r];
    int entering = nb_[q];

    // save old column q
    colq_.resize(nrows_);
    {
      const double* col = tab_.data() + q;
      for (int i = 0; i < nrows_; ++i) colq_[i] = col[static_cast<std::size_t>(i) * n];
    }
    double move = delta * inv;  // entering variable displacement

    // transform pivot row
    for (int j = 0; j < n; ++j) rowr[j] *= inv;
    rowr[q] = inv;
    beta0_[r] *= inv;

    // eliminate column q from the other rows
    for (int i = 0; i < nrows_; ++i) {
      if (i == r) continue;
      double f = colq_[i];
      if (f == 0.0) continue;
      double* rowi = tab_.data() + idx(i, 0);
      for (int j = 0; j < n; ++j) rowi[j] -= f * rowr[j];
      rowi[q] = -f * inv;
      beta0_[i] -= f * beta0_[r];
    }

    // reduced costs
    double dq = dj_[q];
    if (dq != 0.0) {
      for (int j = 0; j < n; ++j) dj_[j] -= dq * rowr[j];
    }
    dj_[q] = -dq * inv;

    // primal values
    double enter_val = nbval_[q] + move;
    for (int i = 0; i < nrows_; ++i) {
      if (i != r) xb_[i] -= colq_[i] * move;
    }
    xb_[r] = enter_val;
    obj_ += dq * move;

    // bookkeeping
    basis_[r] = entering;
    nb_[q] = leaving;
    loc_[entering] = r;
    loc_[leaving] = ~q;
    at_upper_[q] = leave_to_upper ? 1 : 0;
    nbval_[q] = leave_to_upper ? upb_[leaving] : lob_[leaving];
  }

  int nstruct_;
  int nrows_;
  int ncols_;
  std::vector<double> lob_, upb_, orig_lob_, orig_upb_, cost_, rhs_;
  std::vector<std::vector<std::pair<int, double>>> row_coef_;
  std::vector<double> tab_;    // m x nstruct, row-major, over nonbasic columns
  std::vector<double> beta0_;  // B^-1 b
  std::vector<double> xb_;     // basic values
  std::vector<double> dj_;     // reduced costs of nonbasic positions
  std::vector<double> nbval_;  // value of each nonbasic position
  std::vector<int> basis_;     // row -> variable id
  std::vector<int> nb_;        // position -> variable id
  std::vector<int> loc_;       // var id -> row (>=0) or ~position (<0)
  std::vector<char> at_upper_;
  std::vector<double> colq_;
  double obj_ = 0.0;
  long pivots_ = 0;
};

}  // namespace mgems
