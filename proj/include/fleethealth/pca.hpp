#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "fleethealth/core_model.hpp"
#include "fleethealth/errors.hpp"

namespace fleethealth {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Standardized {
  MatrixX<Scalar> data;  // B
  VectorX<Scalar> means;
  VectorX<Scalar> stds;  // sample (n-1) standard deviation; 0 flags a constant column
  std::vector<bool> zero_variance;
};

// Centers every column and scales it to unit sample standard deviation.
// Constant columns are centered only.
template <typename Derived>
Standardized<typename Derived::Scalar> standardize(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n == 0 || d == 0) throw Error("standardize: empty matrix");
  if (n < 2) throw Error("standardize: at least two rows are needed for a sample standard deviation");
  if (!x.allFinite()) throw Error("standardize: matrix has missing or non-finite values");

  Standardized<Scalar> out;
  out.means = x.colwise().mean().transpose();
  out.data = x.rowwise() - out.means.transpose();
  out.stds.resize(d);
  out.zero_variance.assign(static_cast<std::size_t>(d), false);
  for (Eigen::Index j = 0; j < d; ++j) {
    Scalar ss = out.data.col(j).squaredNorm();
    Scalar sd = std::sqrt(ss / static_cast<Scalar>(n - 1));
    if (sd > Scalar(0)) {
      out.data.col(j) /= sd;
      out.stds(j) = sd;
    } else {
      out.data.col(j).setZero();
      out.stds(j) = Scalar(0);
      out.zero_variance[static_cast<std::size_t>(j)] = true;
    }
  }
  return out;
}

// S_B = B^T B / (n - 1) for a centered B.
template <typename Derived>
MatrixX<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  if (b.rows() < 2) throw Error("covariance: at least two rows are needed");
  MatrixX<Scalar> s = (b.transpose() * b) / static_cast<Scalar>(b.rows() - 1);
  return (s + s.transpose()) / Scalar(2);
}

template <typename Scalar>
struct EigenDecomposition {
  VectorX<Scalar> values;   // descending
  MatrixX<Scalar> vectors;  // column k pairs with values(k)
  int sweeps = 0;
};

// Cyclic Jacobi rotations until every off-diagonal magnitude is at most
// `tol` (relative to max(1, ||S||_F)). Eigenvectors are unit length with
// their largest-magnitude entry positive.
template <typename Derived>
EigenDecomposition<typename Derived::Scalar> eigen_symmetric(const Eigen::MatrixBase<Derived>& s,
                                                             double tol = 1e-12, int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = s.rows();
  if (d != s.cols()) throw Error("eigen_symmetric: matrix is not square");
  if (d == 0) throw Error("eigen_symmetric: empty matrix");
  if (!s.allFinite()) throw Error("eigen_symmetric: non-finite entries");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
    throw Error("eigen_symmetric: matrix is not symmetric");
  }

  MatrixX<Scalar> a = s;
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(d, d);
  const Scalar limit = static_cast<Scalar>(tol) * std::max(Scalar(1), a.norm());

  auto off_max = [&] {
    Scalar m(0);
    for (Eigen::Index q = 1; q < d; ++q)
      for (Eigen::Index p = 0; p < q; ++p) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  EigenDecomposition<Scalar> out;
  while (off_max() > limit) {
    if (out.sweeps >= max_sweeps) throw Error("eigen_symmetric: Jacobi sweeps did not converge");
    ++out.sweeps;
    for (Eigen::Index p = 0; p + 1 < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar sn = t * c;
        for (Eigen::Index k = 0; k < d; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < d; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < d; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    VectorX<Scalar> col = v.col(src).normalized();
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    if (col(big) < Scalar(0)) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

template <typename Scalar>
struct PcaModel {
  std::vector<std::string> feature_subset;
  VectorX<Scalar> means;
  VectorX<Scalar> stds;
  VectorX<Scalar> eigenvalues;  // m retained, descending, >= 0
  MatrixX<Scalar> components;   // d x m, orthonormal columns
  bool keep_originals = true;

  Eigen::Index d() const { return components.rows(); }
  Eigen::Index m() const { return components.cols(); }

  MatrixX<Scalar> standardize_with(const MatrixX<Scalar>& x) const {
    if (x.cols() != d()) throw Error("PCA input has the wrong number of columns");
    MatrixX<Scalar> b = x.rowwise() - means.transpose();
    for (Eigen::Index j = 0; j < d(); ++j) {
      if (stds(j) > Scalar(0)) b.col(j) /= stds(j);
    }
    return b;
  }

  // Scores of raw rows on the retained components.
  MatrixX<Scalar> transform(const MatrixX<Scalar>& x) const { return standardize_with(x) * components; }
};

template <typename Derived>
PcaModel<typename Derived::Scalar> fit_pca(const Eigen::MatrixBase<Derived>& x, Eigen::Index m) {
  using Scalar = typename Derived::Scalar;
  if (m < 1 || m > x.cols()) throw Error("PCA: retained components must be in [1, d]");
  auto z = standardize(x);
  auto eig = eigen_symmetric(covariance(z.data));
  PcaModel<Scalar> model;
  model.means = z.means;
  model.stds = z.stds;
  model.eigenvalues = eig.values.head(m).unaryExpr([](Scalar l) { return l < Scalar(0) ? Scalar(0) : l; });
  model.components = eig.vectors.leftCols(m);
  return model;
}

struct PcaFit {
  PcaModel<double> model;
  FeatureMatrix matrix;
};

std::string pca_feature_name(Eigen::Index k);

// Fits PCA on `feature_subset` and appends m score columns named pca_1..pca_m.
// With keep_originals = false the subset columns are dropped.
PcaFit fit_project(const FeatureMatrix& matrix, const std::vector<std::string>& feature_subset, Eigen::Index m,
                   bool keep_originals);

// Applies a fitted model to another matrix with the same subset columns.
FeatureMatrix apply_pca(const PcaModel<double>& model, const FeatureMatrix& matrix);

void to_json(nlohmann::json& j, const PcaModel<double>& model);
void from_json(const nlohmann::json& j, PcaModel<double>& model);

}  // namespace fleethealth
