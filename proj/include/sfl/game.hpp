#pragma once

#include <vector>

#include "sfl/distribution.hpp"
#include "sfl/errors.hpp"
#include "sfl/model.hpp"
#include "sfl/rational.hpp"

namespace sfl {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// maximize c.x  subject to  a x <= b,  aeq x = beq,  x >= 0
struct LpProblem {
  int num_vars = 0;
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::vector<std::vector<Rational>> aeq;
  std::vector<Rational> beq;
  std::vector<Rational> c;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Rational objective;
  std::vector<Rational> x;
};

namespace detail {

// Dense two-phase simplex over exact rationals, Bland's rule throughout, so
// every pivot sequence terminates and ties resolve deterministically.
class SimplexTableau {
 public:
  explicit SimplexTableau(const LpProblem& p) : n_(p.num_vars) {
    int rows = static_cast<int>(p.a.size() + p.aeq.size());
    int slacks = static_cast<int>(p.a.size());
    cols_ = n_ + slacks;  // artificials appended below
    std::vector<std::vector<Rational>> body;
    std::vector<Rational> rhs;
    std::vector<bool> needs_artificial;
    for (size_t i = 0; i < p.a.size(); ++i) {
      std::vector<Rational> row(cols_, Rational(0));
      for (int j = 0; j < n_; ++j) row[j] = p.a[i][j];
      row[n_ + static_cast<int>(i)] = 1;
      Rational r = p.b[i];
      if (r < 0) {
        for (auto& v : row) v = -v;
        r = -r;
        needs_artificial.push_back(true);  // slack became a surplus
      } else {
        needs_artificial.push_back(false);
      }
      body.push_back(std::move(row));
      rhs.push_back(r);
    }
    for (size_t i = 0; i < p.aeq.size(); ++i) {
      std::vector<Rational> row(cols_, Rational(0));
      for (int j = 0; j < n_; ++j) row[j] = p.aeq[i][j];
      Rational r = p.beq[i];
      if (r < 0) {
        for (auto& v : row) v = -v;
        r = -r;
      }
      body.push_back(std::move(row));
      rhs.push_back(r);
      needs_artificial.push_back(true);
    }
    basis_.assign(rows, -1);
    for (int i = 0; i < rows; ++i) {
      if (!needs_artificial[i]) {
        basis_[i] = n_ + i;  // the slack
        continue;
      }
      for (auto& row : body) row.push_back(0);
      body[i][cols_] = 1;
      artificial_from_ = artificial_from_ < 0 ? cols_ : artificial_from_;
      basis_[i] = cols_;
      ++cols_;
    }
    t_ = std::move(body);
    rhs_ = std::move(rhs);
    if (artificial_from_ < 0) artificial_from_ = cols_;
  }

  LpSolution solve(const std::vector<Rational>& obj) {
    // Phase 1: maximize minus the artificial sum.
    if (artificial_from_ < cols_) {
      std::vector<Rational> phase1(cols_, Rational(0));
      for (int j = artificial_from_; j < cols_; ++j) phase1[j] = -1;
      if (!run(phase1, cols_)) throw ConfigError("simplex: phase 1 unbounded");
      Rational art_sum(0);
      for (int i = 0; i < num_rows(); ++i)
        if (basis_[i] >= artificial_from_) art_sum += rhs_[i];
      if (art_sum != 0) return {LpStatus::Infeasible, Rational(0), {}};
      pivot_out_artificials();
    }
    std::vector<Rational> full(cols_, Rational(0));
    for (int j = 0; j < n_; ++j) full[j] = obj[j];
    if (!run(full, artificial_from_)) return {LpStatus::Unbounded, Rational(0), {}};
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(n_, Rational(0));
    for (int i = 0; i < num_rows(); ++i)
      if (basis_[i] < n_) sol.x[basis_[i]] = rhs_[i];
    sol.objective = 0;
    for (int j = 0; j < n_; ++j) sol.objective += obj[j] * sol.x[j];
    return sol;
  }

 private:
  int num_rows() const { return static_cast<int>(t_.size()); }

  // Bland entering/leaving; columns at or past `limit` may not enter.
  // Returns false on unboundedness.
  bool run(const std::vector<Rational>& cost, int limit) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < limit && enter < 0; ++j) {
        if (is_basic(j)) continue;
        Rational reduced = -cost[j];
        for (int i = 0; i < num_rows(); ++i) reduced += cost[basis_[i]] * t_[i][j];
        if (reduced < 0) enter = j;
      }
      if (enter < 0) return true;
      int leave = -1;
      Rational best;
      for (int i = 0; i < num_rows(); ++i) {
        if (t_[i][enter] <= 0) continue;
        Rational ratio = rhs_[i] / t_[i][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  bool is_basic(int j) const {
    for (int b : basis_)
      if (b == j) return true;
    return false;
  }

  void pivot(int row, int col) {
    Rational p = t_[row][col];
    for (auto& v : t_[row]) v /= p;
    rhs_[row] /= p;
    for (int i = 0; i < num_rows(); ++i) {
      if (i == row) continue;
      Rational f = t_[i][col];
      if (f == 0) continue;
      for (int j = 0; j < cols_; ++j) t_[i][j] -= f * t_[row][j];
      rhs_[i] -= f * rhs_[row];
    }
    basis_[row] = col;
  }

  // After phase 1 some artificials can remain basic at zero; swap in a real
  // column where possible. Rows with no real column left are redundant and
  // stay inert.
  void pivot_out_artificials() {
    for (int i = 0; i < num_rows(); ++i) {
      if (basis_[i] < artificial_from_) continue;
      for (int j = 0; j < artificial_from_; ++j) {
        if (!is_basic(j) && t_[i][j] != 0) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  int n_ = 0;
  int cols_ = 0;
  int artificial_from_ = -1;
  std::vector<std::vector<Rational>> t_;
  std::vector<Rational> rhs_;
  std::vector<int> basis_;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p) {
  if (p.num_vars <= 0) throw ConfigError("lp: no variables");
  if (static_cast<int>(p.c.size()) != p.num_vars) throw ConfigError("lp: objective size mismatch");
  for (const auto& row : p.a)
    if (static_cast<int>(row.size()) != p.num_vars) throw ConfigError("lp: row size mismatch");
  for (const auto& row : p.aeq)
    if (static_cast<int>(row.size()) != p.num_vars) throw ConfigError("lp: row size mismatch");
  detail::SimplexTableau tab(p);
  return tab.solve(p.c);
}

// Optimal play of the one-shot pointing game: the predictor commits a label
// distribution mu, the opponent then picks one set A from the collection, and
// the predictor scores mu(A). value = max_mu min_A mu(A).
struct GameSolution {
  Rational value;
  RationalDistribution mu;        // prefers mass on smaller labels among optima
  std::vector<Rational> lambda;   // mixture over the collection certifying the
                                  // value from above, aligned with the input order
};

// Exact solve over the sets named by set_indices (must be nonempty).
inline GameSolution solve_set_game(const ProblemInstance& inst,
                                   const std::vector<int>& set_indices) {
  if (set_indices.empty()) throw ConfigError("set game: empty collection");
  int m = inst.num_labels();
  int p = static_cast<int>(set_indices.size());

  // Primal: variables (mu_0..mu_{m-1}, v), maximize v.
  LpProblem prim;
  prim.num_vars = m + 1;
  prim.c.assign(m + 1, Rational(0));
  prim.c[m] = 1;
  for (int j : set_indices) {
    std::vector<Rational> row(m + 1, Rational(0));
    inst.set_mask(j).for_each([&](int y) { row[y] = -1; });
    row[m] = 1;
    prim.a.push_back(std::move(row));
    prim.b.push_back(Rational(0));
  }
  prim.aeq.push_back(std::vector<Rational>(m + 1, Rational(0)));
  for (int y = 0; y < m; ++y) prim.aeq[0][y] = 1;
  prim.beq.push_back(Rational(1));
  LpSolution base = solve_lp(prim);
  if (base.status != LpStatus::Optimal) throw ConfigError("set game: primal solve failed");
  Rational value = base.objective;

  // Deterministic optimum: among optimal distributions, minimize the mass of
  // the largest label, then the next largest, and so on; ties everywhere
  // resolve toward mass on smaller labels.
  std::vector<Rational> fixed(m);
  for (int target = m - 1; target >= 1; --target) {
    LpProblem step;
    step.num_vars = m;
    step.c.assign(m, Rational(0));
    step.c[target] = -1;
    for (int j : set_indices) {
      std::vector<Rational> row(m, Rational(0));
      inst.set_mask(j).for_each([&](int y) { row[y] = -1; });
      step.a.push_back(std::move(row));
      step.b.push_back(-value);
    }
    std::vector<Rational> ones(m, Rational(1));
    step.aeq.push_back(ones);
    step.beq.push_back(Rational(1));
    for (int y = target + 1; y < m; ++y) {
      std::vector<Rational> row(m, Rational(0));
      row[y] = 1;
      step.aeq.push_back(std::move(row));
      step.beq.push_back(fixed[y]);
    }
    LpSolution s = solve_lp(step);
    if (s.status != LpStatus::Optimal) throw ConfigError("set game: refinement solve failed");
    fixed[target] = s.x[target];
  }
  Rational rest(0);
  for (int y = 1; y < m; ++y) rest += fixed[y];
  fixed[0] = 1 - rest;
  RationalDistribution mu(std::move(fixed));

  // Dual: variables (lambda_1..lambda_p, w), minimize w; by duality w* = v*.
  LpProblem dual;
  dual.num_vars = p + 1;
  dual.c.assign(p + 1, Rational(0));
  dual.c[p] = -1;
  for (int y = 0; y < m; ++y) {
    std::vector<Rational> row(p + 1, Rational(0));
    for (int j = 0; j < p; ++j)
      if (inst.set_mask(set_indices[j]).test(y)) row[j] = 1;
    row[p] = -1;
    dual.a.push_back(std::move(row));
    dual.b.push_back(Rational(0));
  }
  dual.aeq.push_back(std::vector<Rational>(p + 1, Rational(0)));
  for (int j = 0; j < p; ++j) dual.aeq[0][j] = 1;
  dual.beq.push_back(Rational(1));
  LpSolution d = solve_lp(dual);
  if (d.status != LpStatus::Optimal) throw ConfigError("set game: dual solve failed");

  GameSolution out{value, mu, std::vector<Rational>(d.x.begin(), d.x.begin() + p)};

  // Exact optimality certificate, checked on every solve.
  Rational worst(2);
  for (int j : set_indices) {
    Rational mass = mu.mass(inst.set_mask(j));
    if (mass < worst) worst = mass;
  }
  if (worst != value) throw ConfigError("set game: primal certificate failed");
  if (-d.objective != value) throw ConfigError("set game: duality gap");
  Rational lsum(0);
  for (const Rational& l : out.lambda) {
    if (l < 0) throw ConfigError("set game: negative dual weight");
    lsum += l;
  }
  if (lsum != 1) throw ConfigError("set game: dual weights do not mix");
  for (int y = 0; y < m; ++y) {
    Rational hit(0);
    for (int j = 0; j < p; ++j)
      if (inst.set_mask(set_indices[j]).test(y)) hit += out.lambda[j];
    if (hit > value) throw ConfigError("set game: dual certificate failed");
  }
  return out;
}

inline Rational game_value(const ProblemInstance& inst, const std::vector<int>& set_indices) {
  return solve_set_game(inst, set_indices).value;
}

}  // namespace sfl
