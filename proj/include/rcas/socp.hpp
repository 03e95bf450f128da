#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "rcas/types.hpp"

namespace rcas::socp {

/// Cone blocks, in order: one nonnegative orthant block of size `nonneg`,
/// then second-order cones { (u0, u1) : u0 >= ||u1|| } of the listed sizes.
struct ConeSpec {
  int nonneg = 0;
  std::vector<int> soc_dims;

  int total_dim() const;
  /// Barrier degree: orthant size plus number of second-order cones.
  int degree() const { return nonneg + static_cast<int>(soc_dims.size()); }
};

/// Standard conic form
///
///   minimize    c'x
///   subject to  A x = b
///               h - G x in K
///
/// Complex quantities are split by builders into interleaved (Re, Im) pairs;
/// norm objectives are lifted to epigraph variables. Cone blocks act on the
/// rows of h - G x; a variable that appears in no cone row is free.
struct ConeProblem {
  RVec c;
  Eigen::SparseMatrix<double> A;
  RVec b;
  Eigen::SparseMatrix<double> G;
  RVec h;
  ConeSpec cones;

  int num_variables() const { return static_cast<int>(c.size()); }
  int num_equalities() const { return static_cast<int>(b.size()); }
  /// Throws DomainError on inconsistent dimensions.
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iter };

const char* to_string(SolveStatus status);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct ConeSolution {
  SolveStatus status = SolveStatus::max_iter;
  RVec primal;  ///< x
  RVec dual;    ///< [y; z], equality multipliers then cone multipliers
  RVec slack;   ///< s = h - G x
  Residuals residuals;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;

  bool optimal() const { return status == SolveStatus::optimal; }
};

inline constexpr double kDefaultTol = 1e-7;
inline constexpr int kDefaultMaxIter = 200;

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps.
///
/// On `optimal`, the relative primal residual, relative dual residual and
/// relative duality gap are all <= tol. `infeasible` and `unbounded` carry
/// Farkas-type certificates in `dual` and `primal` respectively (unscaled
/// rays). `max_iter` returns the last iterate. Single-threaded and
/// deterministic.
ConeSolution solve(const ConeProblem& problem, double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

/// Sum of coefficient * variable plus a constant.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  static AffineExpr variable(int index, double coef = 1.0) { return {{{index, coef}}, 0.0}; }
  static AffineExpr constant_value(double value) { return {{}, value}; }
  AffineExpr& add(int index, double coef) {
    terms.emplace_back(index, coef);
    return *this;
  }
};

/// A length-n complex vector stored as 2n real variables, (Re, Im) interleaved.
struct ComplexVar {
  int base = 0;
  int size = 0;
  int re(int i) const { return base + 2 * i; }
  int im(int i) const { return base + 2 * i + 1; }
};

/// Incremental construction of a ConeProblem.
class ConeBuilder {
 public:
  int add_variables(int count);
  ComplexVar add_complex(int size);
  int num_variables() const { return num_vars_; }

  void add_cost(int var, double coef);
  /// expr == 0
  void add_equality(const AffineExpr& expr);
  /// expr >= 0
  void add_nonneg(const AffineExpr& expr);
  /// rows[0] >= || rows[1..] ||
  void add_soc(std::vector<AffineExpr> rows);

  ConeProblem build() const;

 private:
  int num_vars_ = 0;
  std::vector<std::pair<int, double>> cost_;
  std::vector<AffineExpr> equalities_;
  std::vector<AffineExpr> nonneg_;
  std::vector<std::vector<AffineExpr>> socs_;
};

/// Re and Im of row_vector * w - target as affine expressions in w's
/// interleaved variables.
std::pair<AffineExpr, AffineExpr> complex_linear(const CRow& row, const ComplexVar& w, cplx target);

/// Adds the 3-dimensional cone (z, Re w, Im w), i.e. |w| <= z.
void lift_complex_magnitude(ConeBuilder& builder, int w_re, int w_im, int z);

/// Real rows of (factor * w - target), factor is r x n complex, interleaved.
std::vector<AffineExpr> complex_residual_rows(const CMat& factor, const ComplexVar& w, const CVec& target);

/// New variable t with t >= || rows ||.
int lift_norm(ConeBuilder& builder, std::vector<AffineExpr> rows);

/// New variable u with u >= || rows ||^2, through the rotated-cone identity
/// ||(2 r, u - 1)|| <= u + 1.
int lift_squared_norm(ConeBuilder& builder, const std::vector<AffineExpr>& rows);

/// Square-root factor F with F^H F = R for Hermitian PSD R (eigenvalues
/// clipped at zero). Throws NumericalError when R is markedly indefinite.
CMat psd_factor(const CMat& R);

struct LiftedQuadratic {
  int epigraph = -1;  ///< t (or u when squared)
  bool squared = false;
};

/// Epigraph of the Hermitian form w^H R w: t >= ||F w|| with F^H F = R, or
/// u >= ||F w||^2 when `squared`.
LiftedQuadratic lift_quadratic(ConeBuilder& builder, const CMat& R, const ComplexVar& w, bool squared);

/// Debug dump. Field order: a header line "cone-problem v1", then
/// "n p m" (variables, equalities, cone rows), "nonneg <l>",
/// "soc <k> <dims...>", "c <n values>", "b <p values>", "h <m values>",
/// "A <nnz>" followed by nnz "row col value" lines, and "G <nnz>" likewise.
void write_problem(std::ostream& out, const ConeProblem& problem);
ConeProblem read_problem(std::istream& in);

}  // namespace rcas::socp
