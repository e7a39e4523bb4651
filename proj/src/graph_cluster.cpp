#include "scidnet/graph_cluster.hpp"

#include <algorithm>
#include <cmath>

#include "scidnet/lasso.hpp"
#include "scidnet/parallel.hpp"

namespace scidnet {

namespace {

struct FoldMoments {
  Matrix train_gram;  // Z'Z / n_train on training-standardized columns
  Matrix test_gram;   // same standardization applied to the held-out rows
  double n_test = 0.0;
};

FoldMoments fold_moments(const Matrix& x, Index fold, Index folds) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
  for (Eigen::Index i = 0; i < n; ++i) {
    (static_cast<Index>(i) % folds == fold ? test : train).push_back(i);
  }
  const Matrix xtr = x(train, Eigen::all);
  const Matrix xte = x(test, Eigen::all);
  const Eigen::RowVectorXd mean = xtr.colwise().mean();
  Matrix ztr = xtr.rowwise() - mean;
  Matrix zte = xte.rowwise() - mean;
  const double ntr = static_cast<double>(train.size());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt(ztr.col(j).squaredNorm() / ntr);
    const double scale = sd > 1e-12 ? 1.0 / sd : 0.0;
    ztr.col(j) *= scale;
    zte.col(j) *= scale;
  }
  FoldMoments fm;
  fm.train_gram = ztr.transpose() * ztr / ntr;
  fm.test_gram = zte.transpose() * zte;
  fm.n_test = static_cast<double>(test.size());
  return fm;
}

Matrix drop_index(const Matrix& g, Eigen::Index j) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    if (k != j) keep.push_back(k);
  }
  return g(keep, keep);
}

Vector drop_index(const Vector& v, Eigen::Index j) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k != j) keep.push_back(k);
  }
  return v(keep);
}

}  // namespace

PrecisionSupport nodewise_support(const Matrix& tx_active, Index cv_folds, Index grid_size) {
  const Eigen::Index m = tx_active.cols();
  const Eigen::Index n = tx_active.rows();
  if (m < 2) throw DataError("nodewise_support: need at least two active columns");
  if (cv_folds < 2) throw DataError("nodewise_support: cv_folds must be at least 2");
  if (static_cast<Index>(n) < cv_folds) throw DataError("nodewise_support: n < cv_folds");
  if (grid_size < 2) throw DataError("nodewise_support: grid_size must be at least 2");

  const Matrix z = standardize_columns(tx_active);
  const Matrix full_gram = z.transpose() * z / static_cast<double>(n);

  std::vector<FoldMoments> folds(cv_folds);
  for (Index f = 0; f < cv_folds; ++f) folds[f] = fold_moments(tx_active, f, cv_folds);

  std::vector<Vector> coefs(static_cast<std::size_t>(m));
  Vector lambdas(m);

  parallel_for(static_cast<std::size_t>(m), [&](std::size_t node) {
    const auto j = static_cast<Eigen::Index>(node);
    const Matrix gram = drop_index(full_gram, j);
    const Vector corr = drop_index(Vector(full_gram.col(j)), j);
    const double lambda_max = corr.cwiseAbs().maxCoeff();

    if (!(lambda_max > 0.0)) {
      lambdas(j) = 0.0;
      coefs[node] = Vector::Zero(m - 1);
      return;
    }

    std::vector<double> grid(grid_size);
    for (Index g = 0; g < grid_size; ++g) {
      const double frac = static_cast<double>(g) / static_cast<double>(grid_size - 1);
      grid[g] = lambda_max * std::pow(1e-3, frac);
    }

    Matrix errors(static_cast<Eigen::Index>(grid_size), static_cast<Eigen::Index>(cv_folds));
    for (Index f = 0; f < cv_folds; ++f) {
      const Matrix g_tr = drop_index(folds[f].train_gram, j);
      const Vector c_tr = drop_index(Vector(folds[f].train_gram.col(j)), j);
      const Matrix h = drop_index(folds[f].test_gram, j);
      const Vector hc = drop_index(Vector(folds[f].test_gram.col(j)), j);
      const double hjj = folds[f].test_gram(j, j);
      Vector beta = Vector::Zero(m - 1);
      for (Index g = 0; g < grid_size; ++g) {
        lasso_cd_gram(g_tr, c_tr, grid[g], beta, LassoOptions{1e-9, 10000});
        const double sse = hjj - 2.0 * beta.dot(hc) + beta.dot(h * beta);
        errors(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(f)) =
            std::max(sse, 0.0) / folds[f].n_test;
      }
    }

    const Vector mean_err = errors.rowwise().mean();
    Eigen::Index best = 0;
    mean_err.minCoeff(&best);
    const double k = static_cast<double>(cv_folds);
    const double var = (errors.row(best).array() - mean_err(best)).square().sum() / (k - 1.0);
    const double bound = mean_err(best) + std::sqrt(var / k);
    Eigen::Index chosen = best;
    for (Eigen::Index g = 0; g <= best; ++g) {
      if (mean_err(g) <= bound) {
        chosen = g;
        break;
      }
    }

    lambdas(j) = grid[static_cast<std::size_t>(chosen)];
    Vector beta = Vector::Zero(m - 1);
    for (Eigen::Index g = 0; g <= chosen; ++g) {
      lasso_cd_gram(gram, corr, grid[static_cast<std::size_t>(g)], beta, LassoOptions{1e-10, 100000});
    }
    coefs[node] = std::move(beta);
  });

  PrecisionSupport ps;
  ps.lambda_per_node = lambdas;
  ps.support.setConstant(m, m, false);
  for (Eigen::Index j = 0; j < m; ++j) {
    ps.support(j, j) = true;
    for (Eigen::Index k = 0, pos = 0; k < m; ++k) {
      if (k == j) continue;
      if (coefs[static_cast<std::size_t>(j)](pos) != 0.0) {
        ps.support(j, k) = true;
        ps.support(k, j) = true;
      }
      ++pos;
    }
  }
  return ps;
}

Matrix correlation_matrix(const Matrix& x) {
  const Matrix z = standardize_columns(x);
  Matrix c = z.transpose() * z / static_cast<double>(x.rows());
  c = (0.5 * (c + c.transpose())).eval();
  c.diagonal().setOnes();
  return c;
}

ClusterSet build_clusters(const PrecisionSupport& support, const Matrix& corr,
                          const Vector& w_stats, double r) {
  const Index m = support.size();
  if (static_cast<Index>(corr.rows()) != m || static_cast<Index>(corr.cols()) != m ||
      static_cast<Index>(w_stats.size()) != m) {
    throw DataError("build_clusters: dimension mismatch");
  }
  if (!(r > 0.0 && r <= 1.0)) throw DataError("build_clusters: r must lie in (0, 1]");

  std::vector<IndexList> clusters(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (support.support(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) || i == j) {
        clusters[i].push_back(j);
      }
    }
  }

  auto max_abs_corr = [&](const IndexList& a, const IndexList& b) {
    double best = 0.0;
    for (Index u : a) {
      for (Index v : b) {
        // Shared members are settled below, not by their unit self-correlation.
        if (u == v) continue;
        best = std::max(best, std::abs(corr(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v))));
      }
    }
    return best;
  };

  bool merged = true;
  while (merged) {
    merged = false;
    for (Index i = 0; i < m; ++i) {
      if (clusters[i].empty()) continue;
      for (Index j = i + 1; j < m; ++j) {
        if (clusters[j].empty()) continue;
        if (max_abs_corr(clusters[i], clusters[j]) >= r) {
          IndexList joined;
          std::set_union(clusters[i].begin(), clusters[i].end(), clusters[j].begin(),
                         clusters[j].end(), std::back_inserter(joined));
          clusters[i] = std::move(joined);
          clusters[j].clear();
          merged = true;
        }
      }
    }
  }

  // A member shared by several survivors stays with the smallest seed.
  std::vector<bool> taken(m, false);
  ClusterSet out;
  for (Index i = 0; i < m; ++i) {
    IndexList members;
    for (Index v : clusters[i]) {
      if (!taken[v]) {
        taken[v] = true;
        members.push_back(v);
      }
    }
    if (members.empty()) continue;
    Index rep = members.front();
    for (Index v : members) {
      if (w_stats(static_cast<Eigen::Index>(v)) > w_stats(static_cast<Eigen::Index>(rep))) rep = v;
    }
    out.clusters.push_back(std::move(members));
    out.representatives.push_back(rep);
  }
  return out;
}

}  // namespace scidnet
