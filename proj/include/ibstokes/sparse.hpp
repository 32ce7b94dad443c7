#pragma once

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <vector>

#include "ibstokes/errors.hpp"

namespace ibstokes {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Compressed-row sparse matrix.  Built from triplets; duplicates are summed
/// in (row, col, insertion) order and entries that sum to zero are dropped.
class SparseMatrix {
public:
    SparseMatrix() : nrows_(0), ncols_(0), row_offsets_(1, 0) {}

    static SparseMatrix finalize(int rows, int cols, std::vector<Triplet> triplets) {
        for (const auto& t : triplets) {
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
                throw IndexOutOfRange("triplet index out of range");
        }
        std::stable_sort(triplets.begin(), triplets.end(),
                         [](const Triplet& a, const Triplet& b) {
                             return a.row != b.row ? a.row < b.row : a.col < b.col;
                         });
        SparseMatrix m;
        m.nrows_ = rows;
        m.ncols_ = cols;
        m.row_offsets_.assign(rows + 1, 0);
        m.cols_.reserve(triplets.size());
        m.values_.reserve(triplets.size());
        std::size_t k = 0;
        for (int r = 0; r < rows; ++r) {
            while (k < triplets.size() && triplets[k].row == r) {
                const int c = triplets[k].col;
                double v = triplets[k].value;
                ++k;
                while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
                    v += triplets[k].value;
                    ++k;
                }
                if (v != 0.0) {
                    m.cols_.push_back(c);
                    m.values_.push_back(v);
                }
            }
            m.row_offsets_[r + 1] = static_cast<int>(m.cols_.size());
        }
        return m;
    }

    int rows() const { return nrows_; }
    int cols() const { return ncols_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& col_indices() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    /// y += alpha * M x
    void multiply_add(const double* x, double* y, double alpha = 1.0) const {
        for (int r = 0; r < nrows_; ++r) {
            double sum = 0.0;
            for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
                sum += values_[k] * x[cols_[k]];
            y[r] += alpha * sum;
        }
    }

    /// y += alpha * M^T x
    void multiply_transpose_add(const double* x, double* y, double alpha = 1.0) const {
        for (int r = 0; r < nrows_; ++r) {
            const double xr = alpha * x[r];
            for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
                y[cols_[k]] += values_[k] * xr;
        }
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != ncols_) throw IndexOutOfRange("matvec size mismatch");
        std::vector<double> y(nrows_, 0.0);
        multiply_add(x.data(), y.data());
        return y;
    }

    std::vector<double> diagonal() const {
        const int n = std::min(nrows_, ncols_);
        std::vector<double> d(n, 0.0);
        for (int r = 0; r < n; ++r) {
            for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
                if (cols_[k] == r) d[r] = values_[k];
        }
        return d;
    }

private:
    int nrows_, ncols_;
    std::vector<int> row_offsets_;
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// Coordinate-format Matrix Market export.
inline void write_matrix_market(std::ostream& os, const SparseMatrix& m) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    const auto& offsets = m.row_offsets();
    const auto& cols = m.col_indices();
    const auto& values = m.values();
    os.precision(17);
    for (int r = 0; r < m.rows(); ++r) {
        for (int k = offsets[r]; k < offsets[r + 1]; ++k)
            os << r + 1 << ' ' << cols[k] + 1 << ' ' << values[k] << '\n';
    }
}

}  // namespace ibstokes
