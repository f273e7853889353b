#include "eistwist/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>

namespace eistwist {

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double op_norm(const CMatrix& a, const CMatrix& h) {
  if (h.size() == 0 || h.isIdentity(0.0)) return op_norm(a);
  Eigen::LLT<CMatrix> llt(h);
  const CMatrix l = llt.matrixL();
  const CMatrix lh = l.adjoint();
  // L^* A L^{-*}
  const CMatrix x = lh * a;
  const CMatrix y = lh.transpose().triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
  return op_norm(y);
}

double max_abs(const CMatrix& a) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

double condition_number(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

CMatrix null_space(const CMatrix& a, double tol) {
  const Eigen::Index n = a.cols();
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

CMatrix column_space(const CMatrix& a, double tol) {
  if (a.cols() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace eistwist
