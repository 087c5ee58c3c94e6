#include "pxpscar/sparse.hpp"

namespace pxp {

SparseOperator sparse_product(const SparseOperator& a, const SparseOperator& b) {
    require(a.cols() == b.rows(), "non-conformable sparse product");
    SparseOperator::EigenType p = (a.eigen() * b.eigen()).pruned();
    return SparseOperator::from_eigen(p);
}

SparseOperator sparse_sum(const SparseOperator& a, const SparseOperator& b, double alpha, double beta) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "non-conformable sparse sum");
    SparseOperator::EigenType s = alpha * a.eigen() + beta * b.eigen();
    return SparseOperator::from_eigen(s);
}

}  // namespace pxp
