#include "acc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acc::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "Optimal";
    case Status::kInfeasible: return "Infeasible";
    case Status::kUnbounded: return "Unbounded";
  }
  return "?";
}

int LinearProgram::add_variable(std::string name, double cost, double lower,
                                std::optional<double> upper) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  names_.push_back(std::move(name));
  return num_variables() - 1;
}

int LinearProgram::add_constraint(std::vector<Term> terms, Relation relation,
                                  double rhs) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw StructuralError("constraint references unknown variable " +
                            std::to_string(t.var));
    }
  }
  rows_.push_back({std::move(terms), relation, rhs});
  return num_constraints() - 1;
}

int LinearProgram::add_dense_constraint(const std::vector<double>& row,
                                  Relation relation, double rhs) {
  if (static_cast<int>(row.size()) != num_variables()) {
    throw StructuralError("row width " + std::to_string(row.size()) +
                          " does not match variable count " +
                          std::to_string(num_variables()));
  }
  std::vector<Term> terms;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] != 0.0) terms.push_back({static_cast<int>(j), row[j]});
  }
  return add_constraint(std::move(terms), relation, rhs);
}

void LinearProgram::check() const {
  for (const auto& row : rows_) {
    if (!std::isfinite(row.rhs)) throw StructuralError("non-finite right-hand side");
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= num_variables()) {
        throw StructuralError("constraint references unknown variable");
      }
      if (!std::isfinite(t.coef)) throw StructuralError("non-finite coefficient");
    }
  }
  for (int j = 0; j < num_variables(); ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (!std::isfinite(lower_[uj])) throw StructuralError("lower bound must be finite");
    if (upper_[uj] && (!std::isfinite(*upper_[uj]) || *upper_[uj] < lower_[uj])) {
      throw StructuralError("invalid upper bound on " + names_[uj]);
    }
  }
}

namespace {

// Tableau over the shifted variables x' = x - lower >= 0 with one slack or
// artificial identity column per row.
class Tableau {
 public:
  Tableau(int rows, int cols)
      : m_(rows), n_(cols),
        a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0),
        b_(static_cast<std::size_t>(rows), 0.0),
        basis_(static_cast<std::size_t>(rows), -1) {}

  double& at(int r, int c) {
    return a_[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) +
              static_cast<std::size_t>(c)];
  }
  double at(int r, int c) const {
    return a_[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) +
              static_cast<std::size_t>(c)];
  }
  double& rhs(int r) { return b_[static_cast<std::size_t>(r)]; }
  int& basic(int r) { return basis_[static_cast<std::size_t>(r)]; }
  int rows() const { return m_; }
  int cols() const { return n_; }

  // Reduced costs d_j = c_j - c_B B^-1 A_j and the objective value c_B x_B.
  void price(const std::vector<double>& cost, std::vector<double>& d,
             double& z) const {
    d = cost;
    z = 0.0;
    for (int r = 0; r < m_; ++r) {
      const double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
      if (cb == 0.0) continue;
      z += cb * b_[static_cast<std::size_t>(r)];
      const double* row = &a_[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_)];
      for (int c = 0; c < n_; ++c) d[static_cast<std::size_t>(c)] -= cb * row[c];
    }
  }

  void pivot(int pr, int pc, std::vector<double>& d, double& z) {
    const std::size_t n = static_cast<std::size_t>(n_);
    double* prow = &a_[static_cast<std::size_t>(pr) * n];
    const double inv = 1.0 / prow[pc];
    nz_.clear();
    for (int c = 0; c < n_; ++c) {
      if (prow[c] != 0.0) {
        prow[c] *= inv;
        nz_.push_back(c);
      }
    }
    prow[pc] = 1.0;
    b_[static_cast<std::size_t>(pr)] *= inv;
    const double pb = b_[static_cast<std::size_t>(pr)];
    for (int r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double* row = &a_[static_cast<std::size_t>(r) * n];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (int c : nz_) row[c] -= factor * prow[c];
      row[pc] = 0.0;
      b_[static_cast<std::size_t>(r)] -= factor * pb;
    }
    const double dfactor = d[static_cast<std::size_t>(pc)];
    if (dfactor != 0.0) {
      for (int c : nz_) d[static_cast<std::size_t>(c)] -= dfactor * prow[c];
      d[static_cast<std::size_t>(pc)] = 0.0;
      z += dfactor * pb;
    }
    basis_[static_cast<std::size_t>(pr)] = pc;
  }

 private:
  int m_;
  int n_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<int> basis_;
  std::vector<int> nz_;
};

enum class PhaseOutcome { kOptimal, kUnbounded };

struct SimplexRun {
  Tableau& t;
  const Tolerances& tol;
  const std::vector<bool>& barred;
  long dantzig_budget;
  long pivots = 0;
  long pivot_cap;

  PhaseOutcome run(std::vector<double>& d, double& z) {
    for (;;) {
      const bool bland = pivots >= dantzig_budget;
      int enter = -1;
      double best = -tol.optimality;
      for (int c = 0; c < t.cols(); ++c) {
        if (barred[static_cast<std::size_t>(c)]) continue;
        const double dc = d[static_cast<std::size_t>(c)];
        if (dc < best) {
          enter = c;
          if (bland) break;
          best = dc;
        }
      }
      if (enter < 0) return PhaseOutcome::kOptimal;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_pivot = 0.0;
      for (int r = 0; r < t.rows(); ++r) {
        const double a = t.at(r, enter);
        if (a <= tol.pivot) continue;
        const double ratio = std::max(t.rhs(r), 0.0) / a;
        bool take = false;
        if (ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12) {
          take = bland ? t.basic(r) < t.basic(leave) : a > best_pivot;
        }
        if (take) {
          leave = r;
          best_ratio = std::min(ratio, best_ratio);
          best_pivot = a;
        }
      }
      if (leave < 0) return PhaseOutcome::kUnbounded;
      t.pivot(leave, enter, d, z);
      if (++pivots > pivot_cap) {
        throw std::runtime_error("simplex exceeded its pivot cap");
      }
    }
  }
};

}  // namespace

LpResult solve(const LinearProgram& lp, const Tolerances& tol) {
  lp.check();
  const int n = lp.num_variables();
  const auto& lower = lp.lower();
  const auto& upper = lp.upper();

  struct Row {
    std::vector<Term> terms;
    Relation rel;
    double rhs;
    double sign;
    bool user;
  };
  std::vector<Row> rows;
  rows.reserve(static_cast<std::size_t>(lp.num_constraints()));
  for (const auto& c : lp.constraints()) {
    double rhs = c.rhs;
    for (const auto& t : c.terms) rhs -= t.coef * lower[static_cast<std::size_t>(t.var)];
    rows.push_back({c.terms, c.relation, rhs, 1.0, true});
  }
  for (int j = 0; j < n; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (upper[uj]) {
      rows.push_back({{{j, 1.0}}, Relation::kLessEqual, *upper[uj] - lower[uj], 1.0, false});
    }
  }
  for (auto& row : rows) {
    if (row.rhs < 0.0) {
      row.sign = -1.0;
      row.rhs = -row.rhs;
      for (auto& t : row.terms) t.coef = -t.coef;
      if (row.rel == Relation::kLessEqual) {
        row.rel = Relation::kGreaterEqual;
      } else if (row.rel == Relation::kGreaterEqual) {
        row.rel = Relation::kLessEqual;
      }
    }
  }

  const int m = static_cast<int>(rows.size());
  int num_surplus = 0;
  for (const auto& row : rows) num_surplus += row.rel == Relation::kGreaterEqual;
  // Columns: structural | surplus | identity (slack or artificial) per row.
  const int surplus0 = n;
  const int ident0 = n + num_surplus;
  const int cols = ident0 + m;
  Tableau t(m, cols);
  std::vector<bool> artificial(static_cast<std::size_t>(cols), false);
  double scale = 1.0;
  int s = surplus0;
  for (int r = 0; r < m; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (const auto& term : row.terms) t.at(r, term.var) += term.coef;
    if (row.rel == Relation::kGreaterEqual) t.at(r, s++) = -1.0;
    t.at(r, ident0 + r) = 1.0;
    artificial[static_cast<std::size_t>(ident0 + r)] = row.rel != Relation::kLessEqual;
    t.rhs(r) = row.rhs;
    t.basic(r) = ident0 + r;
    scale = std::max(scale, row.rhs);
  }

  const long budget = 10L * (m + n);
  const long cap = 200L * (m + cols) + 100000L;
  LpResult result;
  std::vector<double> d;
  double z = 0.0;

  std::vector<bool> none_barred(static_cast<std::size_t>(cols), false);
  std::vector<double> phase1_cost(static_cast<std::size_t>(cols), 0.0);
  bool any_artificial = false;
  for (int c = 0; c < cols; ++c) {
    if (artificial[static_cast<std::size_t>(c)]) {
      phase1_cost[static_cast<std::size_t>(c)] = 1.0;
      any_artificial = true;
    }
  }
  SimplexRun runner{t, tol, none_barred, budget, 0, cap};
  if (any_artificial) {
    t.price(phase1_cost, d, z);
    runner.run(d, z);
    double infeasibility = 0.0;
    for (int r = 0; r < m; ++r) {
      if (artificial[static_cast<std::size_t>(t.basic(r))]) infeasibility += std::max(t.rhs(r), 0.0);
    }
    if (infeasibility > tol.feasibility * scale) {
      result.status = Status::kInfeasible;
      result.iterations = static_cast<int>(runner.pivots);
      return result;
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // without a usable pivot are redundant and keep their artificial at 0.
    for (int r = 0; r < m; ++r) {
      if (!artificial[static_cast<std::size_t>(t.basic(r))]) continue;
      int best = -1;
      double best_abs = tol.pivot * 1e3;
      for (int c = 0; c < cols; ++c) {
        if (artificial[static_cast<std::size_t>(c)]) continue;
        const double a = std::abs(t.at(r, c));
        if (a > best_abs) {
          best_abs = a;
          best = c;
        }
      }
      if (best >= 0) {
        t.rhs(r) = 0.0;
        t.pivot(r, best, d, z);
      }
    }
  }

  const double flip = lp.sense() == Sense::kMaximize ? -1.0 : 1.0;
  std::vector<double> cost(static_cast<std::size_t>(cols), 0.0);
  for (int j = 0; j < n; ++j) cost[static_cast<std::size_t>(j)] = flip * lp.objective()[static_cast<std::size_t>(j)];
  t.price(cost, d, z);
  SimplexRun phase2{t, tol, artificial, budget, runner.pivots, cap};
  const PhaseOutcome outcome = phase2.run(d, z);
  result.iterations = static_cast<int>(phase2.pivots);
  if (outcome == PhaseOutcome::kUnbounded) {
    result.status = Status::kUnbounded;
    return result;
  }

  result.status = Status::kOptimal;
  result.primal.assign(lower.begin(), lower.end());
  for (int r = 0; r < m; ++r) {
    const int c = t.basic(r);
    if (c < n) result.primal[static_cast<std::size_t>(c)] += std::max(t.rhs(r), 0.0);
  }
  result.objective = evaluate_objective(lp, result.primal);
  result.duals.assign(static_cast<std::size_t>(lp.num_constraints()), 0.0);
  for (int r = 0; r < lp.num_constraints(); ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    result.duals[static_cast<std::size_t>(r)] =
        -d[static_cast<std::size_t>(ident0 + r)] * row.sign * flip;
  }
  return result;
}

double evaluate_objective(const LinearProgram& lp, const std::vector<double>& x) {
  double value = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) value += lp.objective()[j] * x[j];
  return value;
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& c : lp.constraints()) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    switch (c.relation) {
      case Relation::kLessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::kGreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::kEqual: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lp.lower()[j] - x[j]);
    if (lp.upper()[j]) worst = std::max(worst, x[j] - *lp.upper()[j]);
  }
  return worst;
}

}  // namespace acc::lp
