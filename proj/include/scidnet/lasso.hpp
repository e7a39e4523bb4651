#pragma once

#include "scidnet/common.hpp"

namespace scidnet {

struct LassoOptions {
  double tolerance = 1e-12;  // max coordinate change per sweep
  Index max_sweeps = 100000;
};

/// Columns centred and scaled to unit variance (1/n convention). Constant
/// columns become zero.
Matrix standardize_columns(const Matrix& a);

/// Minimizes (1/(2n)) ||b - a beta||^2 + lambda ||beta||_1 by cyclic
/// coordinate descent. `a` is standardized and `b` centred internally; the
/// returned coefficients are on the standardized-column scale.
Vector lasso_cd(const Matrix& a, const Vector& b, double lambda, const LassoOptions& opts = {});

/// Same objective on precomputed moments gram = a'a/n, corr = a'b/n.
/// `beta` is the warm start on entry and the solution on exit.
void lasso_cd_gram(const Matrix& gram, const Vector& corr, double lambda, Vector& beta,
                   const LassoOptions& opts = {});

double soft_threshold(double z, double t);

/// max_j |a_j' b| / n for standardized a and centred b.
double lasso_lambda_max(const Matrix& a_std, const Vector& b_centred);

}  // namespace scidnet
