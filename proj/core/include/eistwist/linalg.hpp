#pragma once

#include <Eigen/Dense>
#include <complex>

namespace eistwist {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Operator norm induced by the inner product <u, v> = u^* H v.
// With H = L L^*, ||A||_H = ||L^* A L^{-*}||_2.
double op_norm(const CMatrix& a, const CMatrix& h);
double op_norm(const CMatrix& a);

// Largest absolute entry.
double max_abs(const CMatrix& a);

double condition_number(const CMatrix& a);

// Orthonormal basis (columns) of the numerical kernel of a, relative cutoff tol.
CMatrix null_space(const CMatrix& a, double tol);

// Orthonormal basis of the column span of a, relative cutoff tol.
CMatrix column_space(const CMatrix& a, double tol);

}  // namespace eistwist
