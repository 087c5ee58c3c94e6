#pragma once

#include <complex>

#include <Eigen/Dense>

namespace pxp {

/// Eigen-decomposition of a dense Hermitian matrix, values ascending.
/// vectors is empty when only values were requested.
template <class Scalar>
struct DenseEigen {
    Eigen::VectorXd values;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

/// LAPACK MRRR solvers (dsyevr/zheevr). The input is consumed and released.
DenseEigen<double> eigh(Eigen::MatrixXd&& a, bool want_vectors = true);
DenseEigen<std::complex<double>> eigh(Eigen::MatrixXcd&& a, bool want_vectors = true);

/// Eigenvalues and eigenvectors of a real symmetric tridiagonal matrix.
DenseEigen<double> eigh_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                                    bool want_vectors = true);

/// Self-test of the BLAS/LAPACK backend on a fixed 300x300 problem, run once.
/// Some OpenBLAS builds pick a faulty kernel on newer CPUs.
bool dense_backend_ok();

/// For executables: when the self-test fails and OPENBLAS_CORETYPE is unset,
/// re-executes the program with OPENBLAS_CORETYPE=Haswell. Otherwise returns.
void ensure_dense_backend(char** argv);

}  // namespace pxp
