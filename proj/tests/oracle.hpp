#pragma once

// Eigen-based reference values for the test suites.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "lyap/matrix.hpp"

namespace oracle {

using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline RMat to_eigen(const lyap::RealSquareMatrix& m) {
  RMat e(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

inline CMat to_eigen(const lyap::ComplexSquareMatrix& m) {
  CMat e(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

template <class M>
Eigen::VectorXd singular_values(const M& m) {
  return Eigen::JacobiSVD<M>(m).singularValues();
}

template <class M>
double op_norm(const M& m) {
  return singular_values(m)(0);
}

/// log of the positive semidefinite square root of m^T m.
inline RMat log_abs(const RMat& m) {
  Eigen::SelfAdjointEigenSolver<RMat> es(m.transpose() * m);
  Eigen::VectorXd l = es.eigenvalues().array().log() * 0.5;
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

inline double lambda_max(const RMat& h) {
  return Eigen::SelfAdjointEigenSolver<RMat>(h).eigenvalues().maxCoeff();
}

}  // namespace oracle
