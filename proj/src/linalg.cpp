#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include <unistd.h>

#include "pxpscar/errors.hpp"
#include "pxpscar/linalg.hpp"

namespace pxp {

namespace {

void check_info(lapack_int info, const char* routine) {
    if (info != 0)
        fail(ErrorKind::NumericFailure, std::string(routine) + " failed with info = " + std::to_string(info));
}

DenseEigen<double> symmetric_solve(Eigen::MatrixXd&& a, bool want_vectors);

void check_backend() {
    if (!dense_backend_ok())
        fail(ErrorKind::NumericFailure,
             "the BLAS/LAPACK backend failed its self-test; with OpenBLAS set OPENBLAS_CORETYPE (e.g. Haswell)");
}

}  // namespace

bool dense_backend_ok() {
    static const bool ok = [] {
        const int n = 300;
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = std::sin(1.0 + i * j % 17) + (i == j ? 0.01 * i : 0.0) + std::cos(i + j);
        const Eigen::MatrixXd a0 = a;
        const auto e = symmetric_solve(std::move(a), true);
        const double res = (a0 * e.vectors - e.vectors * e.values.asDiagonal()).norm();
        const double orth = (e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).norm();
        return res < 1e-9 * a0.norm() && orth < 1e-9;
    }();
    return ok;
}

void ensure_dense_backend(char** argv) {
    if (dense_backend_ok() || std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
    setenv("OPENBLAS_CORETYPE", "Haswell", 0);
    execv("/proc/self/exe", argv);
}

DenseEigen<double> eigh(Eigen::MatrixXd&& a, bool want_vectors) {
    check_backend();
    return symmetric_solve(std::move(a), want_vectors);
}

namespace {

DenseEigen<double> symmetric_solve(Eigen::MatrixXd&& a, bool want_vectors) {
    require(a.rows() == a.cols(), "eigh needs a square matrix");
    DenseEigen<double> out;
    const auto n = static_cast<lapack_int>(a.rows());
    out.values.resize(n);
    if (n == 0) return out;
    lapack_int found = 0;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    if (want_vectors) out.vectors.resize(n, n);
    check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0,
                              0.0, &found, out.values.data(), want_vectors ? out.vectors.data() : nullptr, n,
                              support.data()),
               "dsyevr");
    a.resize(0, 0);
    return out;
}

}  // namespace

DenseEigen<std::complex<double>> eigh(Eigen::MatrixXcd&& a, bool want_vectors) {
    check_backend();
    require(a.rows() == a.cols(), "eigh needs a square matrix");
    DenseEigen<std::complex<double>> out;
    const auto n = static_cast<lapack_int>(a.rows());
    out.values.resize(n);
    if (n == 0) return out;
    lapack_int found = 0;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    if (want_vectors) out.vectors.resize(n, n);
    check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0,
                              0.0, &found, out.values.data(), want_vectors ? out.vectors.data() : nullptr, n,
                              support.data()),
               "zheevr");
    a.resize(0, 0);
    return out;
}

DenseEigen<double> eigh_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, bool want_vectors) {
    check_backend();
    const auto n = static_cast<lapack_int>(diag.size());
    require(offdiag.size() + 1 == diag.size() || (n == 0 && offdiag.size() == 0), "tridiagonal size mismatch");
    DenseEigen<double> out;
    out.values = diag;
    if (n == 0) return out;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e.head(n - 1) = offdiag;
    if (want_vectors) out.vectors.resize(n, n);
    lapack_int found = 0;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    Eigen::VectorXd d = diag;
    check_info(LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0,
                              0.0, &found, out.values.data(), want_vectors ? out.vectors.data() : nullptr, n,
                              support.data()),
               "dstevr");
    return out;
}

}  // namespace pxp
