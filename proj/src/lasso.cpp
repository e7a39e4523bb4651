#include "scidnet/lasso.hpp"

#include <cmath>

namespace scidnet {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

Matrix standardize_columns(const Matrix& a) {
  Matrix out = a.rowwise() - a.colwise().mean();
  const double n = static_cast<double>(a.rows());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / n);
    if (sd > 1e-12) {
      out.col(j) /= sd;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

double lasso_lambda_max(const Matrix& a_std, const Vector& b_centred) {
  if (a_std.cols() == 0) return 0.0;
  return (a_std.transpose() * b_centred).cwiseAbs().maxCoeff() / static_cast<double>(a_std.rows());
}

void lasso_cd_gram(const Matrix& gram, const Vector& corr, double lambda, Vector& beta,
                   const LassoOptions& opts) {
  const Eigen::Index m = gram.cols();
  if (beta.size() != m) beta = Vector::Zero(m);
  // residual correlation r = corr - gram * beta, maintained incrementally.
  Vector r = corr - gram * beta;
  for (Index sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) {
        beta(j) = 0.0;
        continue;
      }
      const double old = beta(j);
      const double updated = soft_threshold(r(j) + gjj * old, lambda) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        r.noalias() -= gram.col(j) * delta;
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < opts.tolerance) break;
  }
}

Vector lasso_cd(const Matrix& a, const Vector& b, double lambda, const LassoOptions& opts) {
  if (a.rows() != b.size()) throw DataError("lasso_cd: dimension mismatch");
  if (a.rows() < 2) throw DataError("lasso_cd: n < 2");
  if (!a.allFinite() || !b.allFinite() || !std::isfinite(lambda) || lambda < 0.0) {
    throw DataError("lasso_cd: non-finite input");
  }
  const double n = static_cast<double>(a.rows());
  const Matrix as = standardize_columns(a);
  const Vector bc = b.array() - b.mean();
  const Matrix gram = as.transpose() * as / n;
  const Vector corr = as.transpose() * bc / n;
  Vector beta = Vector::Zero(a.cols());
  lasso_cd_gram(gram, corr, lambda, beta, opts);
  return beta;
}

}  // namespace scidnet
