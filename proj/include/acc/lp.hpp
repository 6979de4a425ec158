#pragma once

// Dense two-phase simplex for the small scheduling LPs in this project.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace acc::lp {

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Status { kOptimal, kInfeasible, kUnbounded };

const char* to_string(Status status);

class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;  // sparse row; repeated vars are summed
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::kMinimize) : sense_(sense) {}

  int add_variable(std::string name, double cost, double lower = 0.0,
                   std::optional<double> upper = std::nullopt);
  int add_constraint(std::vector<Term> terms, Relation relation, double rhs);
  // Dense convenience overload; the row width must equal num_variables().
  int add_dense_constraint(const std::vector<double>& row, Relation relation,
                     double rhs);

  Sense sense() const { return sense_; }
  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<double>& objective() const { return cost_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<std::optional<double>>& upper() const { return upper_; }
  const std::string& name(int var) const { return names_.at(static_cast<std::size_t>(var)); }

  // Throws StructuralError if any row references an unknown variable or a
  // bound is not finite.
  void check() const;

 private:
  Sense sense_;
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<std::optional<double>> upper_;
  std::vector<std::string> names_;
  std::vector<Constraint> rows_;
};

struct LpResult {
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  // Simplex multipliers of the constraint rows in the LP's own sense. When
  // every variable has lower bound 0 and no upper bound, strong duality reads
  // objective == sum_k duals[k] * rhs[k].
  std::vector<double> duals;
  int iterations = 0;
};

struct Tolerances {
  double feasibility = 1e-7;
  double optimality = 1e-9;
  double pivot = 1e-9;
};

LpResult solve(const LinearProgram& lp, const Tolerances& tol = {});

// Largest violation of any constraint or bound at `x`.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);
double evaluate_objective(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace acc::lp
