#include "rcas/socp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace rcas::socp {

int ConeSpec::total_dim() const {
  return nonneg + std::accumulate(soc_dims.begin(), soc_dims.end(), 0);
}

void ConeProblem::validate() const {
  const auto n = c.size();
  if (A.rows() != b.size()) throw DomainError("equality matrix rows do not match b");
  if (G.rows() != h.size()) throw DomainError("cone matrix rows do not match h");
  if ((A.rows() > 0 && A.cols() != n) || (G.rows() > 0 && G.cols() != n)) {
    throw DomainError("constraint matrix columns do not match the variable count");
  }
  if (cones.nonneg < 0) throw DomainError("negative orthant size");
  for (int d : cones.soc_dims) {
    if (d < 1) throw DomainError("second-order cone dimension must be positive");
  }
  if (cones.total_dim() != h.size()) throw DomainError("cone dimensions do not match h");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

namespace {

// Nesterov-Todd scaling for the product cone, plus the Jordan-algebra
// operations the predictor-corrector needs.
class Cone {
 public:
  explicit Cone(const ConeSpec& spec) : spec_(spec) {
    int off = spec.nonneg;
    for (int d : spec.soc_dims) {
      soc_off_.push_back(off);
      off += d;
    }
    dim_ = off;
    d_.resize(spec.nonneg);
    beta_.resize(static_cast<long>(spec.soc_dims.size()));
    wbar_.resize(spec.soc_dims.size());
  }

  int dim() const { return dim_; }
  int degree() const { return spec_.degree(); }

  RVec identity() const {
    RVec e = RVec::Zero(dim_);
    e.head(spec_.nonneg).setOnes();
    for (std::size_t k = 0; k < soc_off_.size(); ++k) e(soc_off_[k]) = 1.0;
    return e;
  }

  // Smallest alpha with x + alpha e in the cone boundary (negative when x is
  // interior, by the largest amount x can shrink).
  double boundary_shift(const RVec& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec_.nonneg; ++i) m = std::min(m, x(i));
    for_soc([&](int off, int dim) {
      const double t = x(off) - x.segment(off + 1, dim - 1).norm();
      m = std::min(m, t);
    });
    return -m;
  }

  // Shift x into the interior: x + (1 + max(0, shift)) e when on or outside.
  RVec to_interior(const RVec& x) const {
    const double shift = boundary_shift(x);
    if (shift < 0.0) return x;
    return x + (1.0 + shift) * identity();
  }

  void compute_scaling(const RVec& s, const RVec& z) {
    for (int i = 0; i < spec_.nonneg; ++i) d_(i) = std::sqrt(s(i) / z(i));
    int k = 0;
    for_soc([&](int off, int dim) {
      const auto sk = s.segment(off, dim);
      const auto zk = z.segment(off, dim);
      const double sj = std::sqrt(std::max(j_norm_sq(sk), 1e-300));
      const double zj = std::sqrt(std::max(j_norm_sq(zk), 1e-300));
      const RVec sb = sk / sj;
      const RVec zb = zk / zj;
      const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
      RVec wb(dim);
      wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
      wb.tail(dim - 1) = (sb.tail(dim - 1) - zb.tail(dim - 1)) / (2.0 * gamma);
      // Renormalize to the J-unit hyperboloid to contain rounding drift.
      const double wn = std::sqrt(std::max(j_norm_sq(wb), 1e-300));
      wb /= wn;
      beta_(k) = std::sqrt(sj / zj);
      wbar_[static_cast<std::size_t>(k)] = std::move(wb);
      ++k;
    });
  }

  RVec apply_w(const RVec& v) const { return apply(v, false); }
  RVec apply_w_inv(const RVec& v) const { return apply(v, true); }

  // W^{-1} applied to each column of a dense matrix.
  RMat apply_w_inv_cols(const RMat& m) const {
    RMat out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = apply_w_inv(m.col(j));
    return out;
  }

  // Jordan product u o v.
  RVec product(const RVec& u, const RVec& v) const {
    RVec out(dim_);
    out.head(spec_.nonneg) = u.head(spec_.nonneg).cwiseProduct(v.head(spec_.nonneg));
    for_soc([&](int off, int dim) {
      out(off) = u.segment(off, dim).dot(v.segment(off, dim));
      out.segment(off + 1, dim - 1) = u(off) * v.segment(off + 1, dim - 1) + v(off) * u.segment(off + 1, dim - 1);
    });
    return out;
  }

  // Solves lambda o u = v for u.
  RVec divide(const RVec& lambda, const RVec& v) const {
    RVec out(dim_);
    out.head(spec_.nonneg) = v.head(spec_.nonneg).cwiseQuotient(lambda.head(spec_.nonneg));
    for_soc([&](int off, int dim) {
      const double l0 = lambda(off);
      const auto l1 = lambda.segment(off + 1, dim - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double u0 = (l0 * v(off) - l1.dot(v.segment(off + 1, dim - 1))) / det;
      out(off) = u0;
      out.segment(off + 1, dim - 1) = (v.segment(off + 1, dim - 1) - u0 * l1) / l0;
    });
    return out;
  }

  // Largest alpha with x + alpha dx in the cone, for interior x. Returns a
  // large number when the ray never leaves the cone.
  double max_step(const RVec& x, const RVec& dx) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec_.nonneg; ++i) {
      if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
    }
    for_soc([&](int off, int dim) {
      const auto xk = x.segment(off, dim);
      const auto dk = dx.segment(off, dim);
      const double jn_sq = j_norm_sq(xk);
      if (jn_sq <= 0.0) {
        alpha = 0.0;
        return;
      }
      const double jn = std::sqrt(jn_sq);
      const RVec xb = xk / jn;
      const RVec db = dk / jn;
      const double rho0 = xb(0) * db(0) - xb.tail(dim - 1).dot(db.tail(dim - 1));
      const RVec rho1 = db.tail(dim - 1) - ((db(0) + rho0) / (xb(0) + 1.0)) * xb.tail(dim - 1);
      const double t = rho1.norm() - rho0;
      if (t > 0.0) alpha = std::min(alpha, 1.0 / t);
    });
    return alpha;
  }

 private:
  template <typename F>
  void for_soc(F&& f) const {
    for (std::size_t k = 0; k < soc_off_.size(); ++k) f(soc_off_[k], spec_.soc_dims[k]);
  }

  template <typename V>
  static double j_norm_sq(const V& v) {
    return v(0) * v(0) - v.tail(v.size() - 1).squaredNorm();
  }

  RVec apply(const RVec& v, bool inverse) const {
    RVec out(dim_);
    if (inverse) {
      out.head(spec_.nonneg) = v.head(spec_.nonneg).cwiseQuotient(d_);
    } else {
      out.head(spec_.nonneg) = v.head(spec_.nonneg).cwiseProduct(d_);
    }
    int k = 0;
    for_soc([&](int off, int dim) {
      const RVec& w = wbar_[static_cast<std::size_t>(k)];
      const double w0 = w(0);
      const auto w1 = w.tail(dim - 1);
      const double v0 = v(off);
      const auto v1 = v.segment(off + 1, dim - 1);
      const double sign = inverse ? -1.0 : 1.0;
      const double scale = inverse ? 1.0 / beta_(k) : beta_(k);
      const double w1v1 = w1.dot(v1);
      out(off) = scale * (w0 * v0 + sign * w1v1);
      out.segment(off + 1, dim - 1) = scale * (sign * v0 * w1 + v1 + (w1v1 / (1.0 + w0)) * w1);
      ++k;
    });
    return out;
  }

  ConeSpec spec_;
  std::vector<int> soc_off_;
  int dim_ = 0;
  RVec d_;
  RVec beta_;
  std::vector<RVec> wbar_;
};

// Removes linearly dependent equality rows; `keep` lists the surviving row
// indices in ascending order. Returns false when the dropped rows are
// inconsistent with the kept ones.
bool reduce_equalities(const RMat& A, const RVec& b, RMat& A_out, RVec& b_out, std::vector<int>& keep) {
  keep.clear();
  if (A.rows() == 0) {
    A_out = A;
    b_out = b;
    return true;
  }
  Eigen::ColPivHouseholderQR<RMat> qr(A.transpose());
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
  std::sort(keep.begin(), keep.end());
  A_out.resize(rank, A.cols());
  b_out.resize(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    A_out.row(i) = A.row(keep[static_cast<std::size_t>(i)]);
    b_out(i) = b(keep[static_cast<std::size_t>(i)]);
  }
  if (rank == A.rows()) return true;
  Eigen::ColPivHouseholderQR<RMat> kept(A_out.transpose());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (std::binary_search(keep.begin(), keep.end(), static_cast<int>(i))) continue;
    const RVec coef = kept.solve(RVec(A.row(i).transpose()));
    if (std::abs(b(i) - coef.dot(b_out)) > 1e-8 * (1.0 + std::abs(b(i)))) return false;
  }
  return true;
}

// Factorization of the scaled KKT system
//   [ 0   A'  Gs' ] [x]   [r1]
//   [ A   0   0   ] [y] = [r2]
//   [ Gs  0   -I  ] [z]   [r3]
// with Gs = W^{-1} G, through the reduced system in (x, y).
class KktSolver {
 public:
  KktSolver(const RMat& A, const RMat& Gs) : A_(A), Gs_(Gs) {
    const auto n = Gs.cols();
    const auto p = A.rows();
    RMat H = Gs.transpose() * Gs;
    const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    const double reg = 1e-13 * scale;
    RMat K = RMat::Zero(n + p, n + p);
    K.topLeftCorner(n, n) = H;
    K.topLeftCorner(n, n).diagonal().array() += reg;
    K.topRightCorner(n, p) = A.transpose();
    K.bottomLeftCorner(p, n) = A;
    K.bottomRightCorner(p, p).diagonal().setConstant(-1e-13);
    lu_.compute(K);
  }

  void solve(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x, RVec& y, RVec& z) const {
    const auto n = Gs_.cols();
    const auto p = A_.rows();
    x = RVec::Zero(n);
    y = RVec::Zero(p);
    z = RVec::Zero(Gs_.rows());
    RVec e1 = r1, e2 = r2, e3 = r3;
    for (int it = 0; it < 4; ++it) {
      RVec rhs(n + p);
      rhs.head(n) = e1 + Gs_.transpose() * e3;
      rhs.tail(p) = e2;
      const RVec sol = lu_.solve(rhs);
      const RVec dx = sol.head(n);
      const RVec dy = sol.tail(p);
      x += dx;
      y += dy;
      z += Gs_ * dx - e3;
      // Residual of the unregularized system.
      e1 = r1 - (A_.transpose() * y + Gs_.transpose() * z);
      e2 = r2 - A_ * x;
      e3 = r3 - (Gs_ * x - z);
      const double err = std::max({e1.lpNorm<Eigen::Infinity>(), e2.lpNorm<Eigen::Infinity>(),
                                   e3.lpNorm<Eigen::Infinity>()});
      const double ref = 1.0 + std::max({r1.lpNorm<Eigen::Infinity>(), r2.lpNorm<Eigen::Infinity>(),
                                         r3.lpNorm<Eigen::Infinity>()});
      if (err <= 1e-14 * ref) break;
    }
  }

 private:
  const RMat& A_;
  const RMat& Gs_;
  Eigen::PartialPivLU<RMat> lu_;
};

double safe_norm(const RVec& v) { return v.size() == 0 ? 0.0 : v.norm(); }

}  // namespace

ConeSolution solve(const ConeProblem& problem, double tol, int max_iter) {
  problem.validate();
  Cone cone(problem.cones);

  const RMat A_full = RMat(problem.A);
  const RMat G = RMat(problem.G);
  const RVec& c = problem.c;
  const RVec& h = problem.h;
  const auto n = c.size();
  const auto m = h.size();
  const auto p_full = problem.b.size();

  ConeSolution result;
  RMat A;
  RVec b;
  std::vector<int> keep;
  if (!reduce_equalities(A_full, problem.b, A, b, keep)) {
    result.status = SolveStatus::infeasible;
    result.primal = RVec::Zero(n);
    result.dual = RVec::Zero(p_full + m);
    result.slack = h;
    return result;
  }
  const auto p = A.rows();

  // Initial point from two least-squares solves with W = I.
  RVec x, y, z, s;
  {
    const KktSolver kkt(A, G);
    RVec xt, yt, zt;
    kkt.solve(RVec::Zero(n), b, h, xt, yt, zt);
    x = xt;
    s = cone.to_interior(-zt);
    kkt.solve(-c, RVec::Zero(p), RVec::Zero(m), xt, yt, zt);
    y = yt;
    z = cone.to_interior(zt);
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double c_norm = std::max(1.0, safe_norm(c));
  const double b_norm = std::max(1.0, safe_norm(b));
  const double h_norm = std::max(1.0, safe_norm(h));
  const int deg = cone.degree();

  // Optimal and max_iter points are divided by tau; certificates are scaled
  // so the relevant objective equals -1.
  auto finish = [&](SolveStatus st, int iters, double scale) {
    result.status = st;
    result.iterations = iters;
    RVec y_full = RVec::Zero(p_full);
    for (std::size_t k = 0; k < keep.size(); ++k) y_full(keep[k]) = y(static_cast<Eigen::Index>(k));
    result.primal = x * scale;
    result.slack = s * scale;
    result.dual.resize(p_full + m);
    result.dual << y_full * scale, z * scale;
    result.primal_objective = c.dot(result.primal);
    result.dual_objective = -(problem.b.dot(result.dual.head(p_full)) + h.dot(result.dual.tail(m)));
    return result;
  };

  for (int iter = 0; iter <= max_iter; ++iter) {
    // Residuals of the homogeneous embedding.
    const RVec rx = A.transpose() * y + G.transpose() * z + c * tau;
    const RVec ry = b * tau - A * x;
    const RVec rz = h * tau - G * x - s;
    const double cx = c.dot(x);
    const double by_hz = b.dot(y) + h.dot(z);
    const double rt = kappa + cx + by_hz;

    const double mu = (s.dot(z) + tau * kappa) / (deg + 1);
    const double pres = std::max(safe_norm(ry) / b_norm, safe_norm(rz) / h_norm) / tau;
    const double dres = safe_norm(rx) / c_norm / tau;
    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double gap_abs = s.dot(z) / (tau * tau);
    const double gap = std::max(gap_abs, std::abs(pcost - dcost)) / std::max(1.0, std::abs(pcost));
    result.residuals = {pres, dres, gap};

    if (pres <= tol && dres <= tol && gap <= tol) return finish(SolveStatus::optimal, iter, 1.0 / tau);

    // Farkas certificates once the embedding has tipped toward kappa.
    if (tau < kappa) {
      if (by_hz < 0.0) {
        const double res = safe_norm(A.transpose() * y + G.transpose() * z) / (-by_hz);
        if (res <= tol) {
          result.residuals = {pres, res, gap};
          return finish(SolveStatus::infeasible, iter, 1.0 / (-by_hz));
        }
      }
      if (cx < 0.0) {
        const double res = std::max(safe_norm(A * x), safe_norm(G * x + s)) / (-cx);
        if (res <= tol) {
          result.residuals = {res, dres, gap};
          return finish(SolveStatus::unbounded, iter, 1.0 / (-cx));
        }
      }
    }
    if (iter == max_iter) break;

    cone.compute_scaling(s, z);
    const RVec lambda = cone.apply_w(z);
    const RMat Gs = cone.apply_w_inv_cols(G);
    const RVec hs = cone.apply_w_inv(h);
    const KktSolver kkt(A, Gs);

    // Column for dtau.
    RVec x1, y1, z1;
    kkt.solve(-c, b, hs, x1, y1, z1);
    const double den = -kappa / tau + c.dot(x1) + b.dot(y1) + hs.dot(z1);

    struct Dir {
      RVec dx, dy, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    // Newton direction reducing the residuals by (1 - eta), with scaled
    // complementarity target ws and tau-kappa target dt_comp.
    auto direction = [&](double eta, const RVec& ws, double dt_comp) {
      RVec x2, y2, z2;
      kkt.solve(-eta * rx, eta * ry, eta * cone.apply_w_inv(rz) - ws, x2, y2, z2);
      Dir d;
      d.dtau = (-eta * rt - dt_comp / tau - (c.dot(x2) + b.dot(y2) + hs.dot(z2))) / den;
      d.dx = x2 + d.dtau * x1;
      d.dy = y2 + d.dtau * y1;
      const RVec dz_scaled = z2 + d.dtau * z1;
      d.dz = cone.apply_w_inv(dz_scaled);
      d.ds = cone.apply_w(ws - dz_scaled);
      d.dkappa = (dt_comp - kappa * d.dtau) / tau;
      return d;
    };
    auto step_length = [&](const Dir& d) {
      double a = std::min(cone.max_step(s, d.ds), cone.max_step(z, d.dz));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return std::min(a, 1.0);
    };

    const Dir aff = direction(1.0, -lambda, -tau * kappa);
    const double alpha_aff = step_length(aff);
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    const RVec ds_sc = cone.apply_w_inv(aff.ds);
    const RVec dz_sc = cone.apply_w(aff.dz);
    const RVec dcomp = -cone.product(lambda, lambda) - cone.product(ds_sc, dz_sc) + sigma * mu * cone.identity();
    const RVec ws = cone.divide(lambda, dcomp);
    const double dt_comp = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Dir dir = direction(1.0 - sigma, ws, dt_comp);
    const double alpha = std::min(1.0, 0.99 * step_length(dir));

    x += alpha * dir.dx;
    y += alpha * dir.dy;
    z += alpha * dir.dz;
    s += alpha * dir.ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
  }
  return finish(SolveStatus::max_iter, max_iter, 1.0 / tau);
}

int ConeBuilder::add_variables(int count) {
  if (count < 0) throw DomainError("negative variable count");
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

ComplexVar ConeBuilder::add_complex(int size) { return {add_variables(2 * size), size}; }

void ConeBuilder::add_cost(int var, double coef) { cost_.emplace_back(var, coef); }

void ConeBuilder::add_equality(const AffineExpr& expr) { equalities_.push_back(expr); }

void ConeBuilder::add_nonneg(const AffineExpr& expr) { nonneg_.push_back(expr); }

void ConeBuilder::add_soc(std::vector<AffineExpr> rows) {
  if (rows.empty()) throw DomainError("empty second-order cone");
  socs_.push_back(std::move(rows));
}

ConeProblem ConeBuilder::build() const {
  ConeProblem p;
  const int n = num_vars_;
  p.c = RVec::Zero(n);
  for (const auto& [v, coef] : cost_) {
    if (v < 0 || v >= n) throw DomainError("cost refers to an unknown variable");
    p.c(v) += coef;
  }

  using Triplet = Eigen::Triplet<double>;
  auto fill = [n](const std::vector<const AffineExpr*>& rows, double sign, Eigen::SparseMatrix<double>& mat,
                  RVec& rhs) {
    std::vector<Triplet> trip;
    rhs.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& [v, coef] : rows[i]->terms) {
        if (v < 0 || v >= n) throw DomainError("constraint refers to an unknown variable");
        trip.emplace_back(static_cast<int>(i), v, sign * coef);
      }
      rhs(static_cast<Eigen::Index>(i)) = rows[i]->constant;
    }
    mat.resize(static_cast<Eigen::Index>(rows.size()), n);
    mat.setFromTriplets(trip.begin(), trip.end());
  };

  // expr == 0  <=>  A x = -constant
  std::vector<const AffineExpr*> eq;
  for (const auto& e : equalities_) eq.push_back(&e);
  fill(eq, 1.0, p.A, p.b);
  p.b = -p.b;

  // expr in K  <=>  h - G x in K with G = -coefs, h = constant
  std::vector<const AffineExpr*> cone_rows;
  for (const auto& e : nonneg_) cone_rows.push_back(&e);
  p.cones.nonneg = static_cast<int>(nonneg_.size());
  for (const auto& soc : socs_) {
    for (const auto& e : soc) cone_rows.push_back(&e);
    p.cones.soc_dims.push_back(static_cast<int>(soc.size()));
  }
  fill(cone_rows, -1.0, p.G, p.h);
  return p;
}

std::pair<AffineExpr, AffineExpr> complex_linear(const CRow& row, const ComplexVar& w, cplx target) {
  if (row.size() != w.size) throw DomainError("row length does not match the complex variable");
  AffineExpr re, im;
  for (int i = 0; i < w.size; ++i) {
    const cplx r = row(i);
    if (r.real() != 0.0) {
      re.add(w.re(i), r.real());
      im.add(w.im(i), r.real());
    }
    if (r.imag() != 0.0) {
      re.add(w.im(i), -r.imag());
      im.add(w.re(i), r.imag());
    }
  }
  re.constant = -target.real();
  im.constant = -target.imag();
  return {std::move(re), std::move(im)};
}

void lift_complex_magnitude(ConeBuilder& builder, int w_re, int w_im, int z) {
  builder.add_soc({AffineExpr::variable(z), AffineExpr::variable(w_re), AffineExpr::variable(w_im)});
}

std::vector<AffineExpr> complex_residual_rows(const CMat& factor, const ComplexVar& w, const CVec& target) {
  if (factor.rows() != target.size()) throw DomainError("factor rows do not match target length");
  std::vector<AffineExpr> rows;
  rows.reserve(static_cast<std::size_t>(2 * factor.rows()));
  for (Eigen::Index r = 0; r < factor.rows(); ++r) {
    auto [re, im] = complex_linear(factor.row(r), w, target(r));
    rows.push_back(std::move(re));
    rows.push_back(std::move(im));
  }
  return rows;
}

int lift_norm(ConeBuilder& builder, std::vector<AffineExpr> rows) {
  const int t = builder.add_variables(1);
  rows.insert(rows.begin(), AffineExpr::variable(t));
  builder.add_soc(std::move(rows));
  return t;
}

int lift_squared_norm(ConeBuilder& builder, const std::vector<AffineExpr>& rows) {
  const int u = builder.add_variables(1);
  std::vector<AffineExpr> cone;
  cone.reserve(rows.size() + 2);
  AffineExpr head = AffineExpr::variable(u);
  head.constant = 1.0;
  cone.push_back(head);
  for (const auto& r : rows) {
    AffineExpr twice = r;
    for (auto& term : twice.terms) term.second *= 2.0;
    twice.constant *= 2.0;
    cone.push_back(std::move(twice));
  }
  AffineExpr tail = AffineExpr::variable(u);
  tail.constant = -1.0;
  cone.push_back(tail);
  builder.add_soc(std::move(cone));
  return u;
}

CMat psd_factor(const CMat& R) {
  if (R.rows() != R.cols()) throw DomainError("matrix must be square");
  const CMat Rh = 0.5 * (R + R.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(Rh);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed", 0.0);
  const RVec& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  if (ev.minCoeff() < -1e-8 * top) throw NumericalError("matrix is not positive semidefinite", top / ev.minCoeff());
  // Drop null directions so the factor has full row rank.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-14 * top) keep.push_back(i);
  }
  CMat F(static_cast<Eigen::Index>(keep.size()), R.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto i = keep[k];
    F.row(static_cast<Eigen::Index>(k)) = std::sqrt(ev(i)) * eig.eigenvectors().col(i).adjoint();
  }
  return F;
}

LiftedQuadratic lift_quadratic(ConeBuilder& builder, const CMat& R, const ComplexVar& w, bool squared) {
  if (R.rows() != w.size) throw DomainError("matrix size does not match the complex variable");
  const CMat F = psd_factor(R);
  auto rows = complex_residual_rows(F, w, CVec::Zero(F.rows()));
  if (squared) return {lift_squared_norm(builder, rows), true};
  return {lift_norm(builder, std::move(rows)), false};
}

void write_problem(std::ostream& out, const ConeProblem& p) {
  out.precision(17);
  out << "cone-problem v1\n";
  out << p.num_variables() << ' ' << p.num_equalities() << ' ' << p.h.size() << '\n';
  out << "nonneg " << p.cones.nonneg << '\n';
  out << "soc " << p.cones.soc_dims.size();
  for (int d : p.cones.soc_dims) out << ' ' << d;
  out << '\n';
  auto vec = [&out](const char* name, const RVec& v) {
    out << name;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v(i);
    out << '\n';
  };
  vec("c", p.c);
  vec("b", p.b);
  vec("h", p.h);
  auto mat = [&out](const char* name, const Eigen::SparseMatrix<double>& m) {
    out << name << ' ' << m.nonZeros() << '\n';
    for (int k = 0; k < m.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
        out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
      }
    }
  };
  mat("A", p.A);
  mat("G", p.G);
}

ConeProblem read_problem(std::istream& in) {
  auto expect = [&in](const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw DomainError("malformed cone problem: expected '" + word + "'");
  };
  expect("cone-problem");
  expect("v1");
  int n = 0, p = 0, m = 0;
  if (!(in >> n >> p >> m) || n < 0 || p < 0 || m < 0) throw DomainError("malformed cone problem header");
  ConeProblem prob;
  expect("nonneg");
  in >> prob.cones.nonneg;
  expect("soc");
  std::size_t k = 0;
  in >> k;
  prob.cones.soc_dims.resize(k);
  for (auto& d : prob.cones.soc_dims) in >> d;
  auto vec = [&](const char* name, int len) {
    expect(name);
    RVec v(len);
    for (int i = 0; i < len; ++i) in >> v(i);
    return v;
  };
  prob.c = vec("c", n);
  prob.b = vec("b", p);
  prob.h = vec("h", m);
  auto mat = [&](const char* name, int rows) {
    expect(name);
    long nnz = 0;
    in >> nnz;
    std::vector<Eigen::Triplet<double>> trip;
    for (long i = 0; i < nnz; ++i) {
      int r = 0, col = 0;
      double v = 0.0;
      in >> r >> col >> v;
      trip.emplace_back(r, col, v);
    }
    Eigen::SparseMatrix<double> sm(rows, n);
    sm.setFromTriplets(trip.begin(), trip.end());
    return sm;
  };
  prob.A = mat("A", p);
  prob.G = mat("G", m);
  if (!in) throw DomainError("malformed cone problem body");
  prob.validate();
  return prob;
}

}  // namespace rcas::socp
