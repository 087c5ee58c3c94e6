#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pxpscar/errors.hpp"

namespace pxp {

/// Compressed-row sparse matrix with 32-bit indices so that it can be mapped
/// into Eigen without copying. Column indices are sorted within each row.
template <class Scalar>
class CsrMatrix {
public:
    using Index = std::int32_t;
    using EigenType = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

    CsrMatrix() : row_ptr_(1, 0) {}

    CsrMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_index,
              std::vector<Scalar> values)
        : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col_index)),
          val_(std::move(values)) {
        require(row_ptr_.size() == static_cast<std::size_t>(rows_) + 1, "row pointer size mismatch");
        require(col_.size() == val_.size(), "column/value size mismatch");
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return val_.size(); }

    std::span<const Index> row_ptr() const noexcept { return row_ptr_; }
    std::span<const Index> col_index() const noexcept { return col_; }
    std::span<const Scalar> values() const noexcept { return val_; }

    /// y = A x. Rows are independent, so the result does not depend on the
    /// number of threads.
    template <class VecIn, class VecOut>
    void apply(const VecIn& x, VecOut& y) const {
        using Out = typename VecOut::Scalar;
        y.resize(rows_);
#pragma omp parallel for schedule(static)
        for (Index r = 0; r < rows_; ++r) {
            Out acc{0};
            for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += val_[p] * x(col_[p]);
            y(r) = acc;
        }
    }

    template <class Vec>
    Vec operator*(const Vec& x) const {
        Vec y;
        apply(x, y);
        return y;
    }

    Scalar coeff(Index r, Index c) const {
        auto first = col_.begin() + row_ptr_[r];
        auto last = col_.begin() + row_ptr_[r + 1];
        auto it = std::lower_bound(first, last, c);
        if (it == last || *it != c) return Scalar{0};
        return val_[static_cast<std::size_t>(it - col_.begin())];
    }

    Eigen::Map<const EigenType> eigen() const {
        return Eigen::Map<const EigenType>(rows_, cols_, static_cast<Index>(nnz()), row_ptr_.data(), col_.data(),
                                           val_.data());
    }

    static CsrMatrix from_eigen(const EigenType& m) {
        EigenType c = m;
        c.makeCompressed();
        c.prune(Scalar{0});
        std::vector<Index> rp(c.outerIndexPtr(), c.outerIndexPtr() + c.rows() + 1);
        std::vector<Index> ci(c.innerIndexPtr(), c.innerIndexPtr() + c.nonZeros());
        std::vector<Scalar> v(c.valuePtr(), c.valuePtr() + c.nonZeros());
        return CsrMatrix(static_cast<Index>(c.rows()), static_cast<Index>(c.cols()), std::move(rp), std::move(ci),
                         std::move(v));
    }

    CsrMatrix adjoint() const {
        EigenType t = eigen().adjoint();
        return from_eigen(t);
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense() const {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d =
            Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows_, cols_);
        for (Index r = 0; r < rows_; ++r)
            for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_[p]) = val_[p];
        return d;
    }

    /// Exact (bitwise) Hermiticity: A(r,c) == conj(A(c,r)) for every stored entry.
    bool is_hermitian_exact() const {
        if (rows_ != cols_) return false;
        for (Index r = 0; r < rows_; ++r) {
            for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
                const Scalar mirror = coeff(col_[p], r);
                if (mirror != conj_if_complex(val_[p])) return false;
            }
        }
        return true;
    }

    Scalar trace() const {
        Scalar t{0};
        for (Index r = 0; r < std::min(rows_, cols_); ++r) t += coeff(r, r);
        return t;
    }

    /// One "row col value" line per stored entry, 0-based indices.
    void write_coordinates(std::ostream& os) const {
        os.precision(17);
        os << "# rows " << rows_ << " cols " << cols_ << " nnz " << nnz() << "\n";
        for (Index r = 0; r < rows_; ++r)
            for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
                os << r << ' ' << col_[p] << ' ';
                if constexpr (std::is_same_v<Scalar, double>) {
                    os << val_[p];
                } else {
                    os << val_[p].real() << ' ' << val_[p].imag();
                }
                os << '\n';
            }
    }

private:
    static Scalar conj_if_complex(const Scalar& s) {
        if constexpr (std::is_same_v<Scalar, double>) {
            return s;
        } else {
            return std::conj(s);
        }
    }

    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_;
    std::vector<Scalar> val_;
};

/// Two-pass parallel assembly. fill(row, entries) must append the (column,
/// value) pairs of one row deterministically; it is called twice per row.
template <class Scalar, class RowFill>
CsrMatrix<Scalar> assemble_rows(std::size_t rows, std::size_t cols, RowFill&& fill) {
    using Index = typename CsrMatrix<Scalar>::Index;
    using Entry = std::pair<Index, Scalar>;
    if (rows > static_cast<std::size_t>(std::numeric_limits<Index>::max()) ||
        cols > static_cast<std::size_t>(std::numeric_limits<Index>::max())) {
        fail(ErrorKind::TooLarge, "matrix dimension exceeds 32-bit index range");
    }
    auto merged = [&](std::size_t r, std::vector<Entry>& e) {
        e.clear();
        fill(r, e);
        // Stable, so duplicates are summed in insertion order.
        std::stable_sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
        std::size_t out = 0;
        for (std::size_t k = 0; k < e.size();) {
            Index c = e[k].first;
            Scalar v{0};
            for (; k < e.size() && e[k].first == c; ++k) v += e[k].second;
            if (v != Scalar{0}) e[out++] = {c, v};
        }
        e.resize(out);
    };
    const auto n = static_cast<std::int64_t>(rows);
    std::vector<std::int64_t> counts(rows + 1, 0);
#pragma omp parallel
    {
        std::vector<Entry> e;
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            merged(static_cast<std::size_t>(r), e);
            counts[static_cast<std::size_t>(r) + 1] = static_cast<std::int64_t>(e.size());
        }
    }
    for (std::size_t r = 0; r < rows; ++r) counts[r + 1] += counts[r];
    if (counts[rows] > std::numeric_limits<Index>::max()) {
        fail(ErrorKind::TooLarge, "number of nonzeros exceeds 32-bit index range");
    }
    std::vector<Index> row_ptr(counts.begin(), counts.end());
    std::vector<Index> col(static_cast<std::size_t>(counts[rows]));
    std::vector<Scalar> val(col.size());
#pragma omp parallel
    {
        std::vector<Entry> e;
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            merged(static_cast<std::size_t>(r), e);
            auto p = static_cast<std::size_t>(counts[static_cast<std::size_t>(r)]);
            for (const auto& [c, v] : e) {
                col[p] = c;
                val[p] = v;
                ++p;
            }
        }
    }
    return CsrMatrix<Scalar>(static_cast<Index>(rows), static_cast<Index>(cols), std::move(row_ptr), std::move(col),
                             std::move(val));
}

using SparseOperator = CsrMatrix<double>;
using ComplexSparseOperator = CsrMatrix<std::complex<double>>;

/// Products and sums through Eigen's sparse kernels.
SparseOperator sparse_product(const SparseOperator& a, const SparseOperator& b);
SparseOperator sparse_sum(const SparseOperator& a, const SparseOperator& b, double alpha = 1.0, double beta = 1.0);

}  // namespace pxp
