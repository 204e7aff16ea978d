#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparselab {

using Index = std::ptrdiff_t;

// Dense row-major matrix. Double precision is the default everywhere; float
// instantiations exist for callers that trade precision for speed.
template <typename T>
class BasicMatrix {
public:
    BasicMatrix() = default;

    BasicMatrix(Index rows, Index cols, T fill = T{0})
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {
        if (rows < 0 || cols < 0) {
            throw std::invalid_argument("matrix dimensions must be nonnegative");
        }
    }

    static BasicMatrix identity(Index n) {
        BasicMatrix m(n, n);
        for (Index i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    static BasicMatrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        const Index r = static_cast<Index>(rows.size());
        const Index c = r > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
        BasicMatrix m(r, c);
        Index i = 0;
        for (const auto& row : rows) {
            if (static_cast<Index>(row.size()) != c) {
                throw std::invalid_argument("ragged initializer rows");
            }
            Index j = 0;
            for (const T& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index size() const { return rows_ * cols_; }
    bool empty() const { return size() == 0; }

    T& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    const T& operator()(Index r, Index c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

    T& operator[](Index flat) { return data_[static_cast<std::size_t>(flat)]; }
    const T& operator[](Index flat) const { return data_[static_cast<std::size_t>(flat)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T* row(Index r) { return data_.data() + r * cols_; }
    const T* row(Index r) const { return data_.data() + r * cols_; }

    void fill(T v) { data_.assign(data_.size(), v); }

    bool same_shape(const BasicMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const BasicMatrix& a, const BasicMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using MatrixF = BasicMatrix<float>;

namespace detail {
inline void check(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace detail

// C = A * B. Accumulation over k is sequential ascending for every output
// element, so results are identical to the naive triple loop bit for bit.
template <typename T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    detail::check(a.cols() == b.rows(), "matmul: inner dimensions differ");
    BasicMatrix<T> c(a.rows(), b.cols());
    const Index n = b.cols();
    for (Index i = 0; i < a.rows(); ++i) {
        T* ci = c.row(i);
        for (Index k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            const T* bk = b.row(k);
            for (Index j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// C = A^T * B without materializing the transpose; same k-ordering guarantee.
template <typename T>
BasicMatrix<T> matmul_tn(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    detail::check(a.rows() == b.rows(), "matmul_tn: inner dimensions differ");
    BasicMatrix<T> c(a.cols(), b.cols());
    const Index n = b.cols();
    for (Index k = 0; k < a.rows(); ++k) {
        const T* ak = a.row(k);
        const T* bk = b.row(k);
        for (Index i = 0; i < a.cols(); ++i) {
            T* ci = c.row(i);
            const T aki = ak[i];
            for (Index j = 0; j < n; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

template <typename T>
BasicMatrix<T> transpose(const BasicMatrix<T>& a) {
    BasicMatrix<T> t(a.cols(), a.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

template <typename T>
BasicMatrix<T> add(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    detail::check(a.same_shape(b), "add: shape mismatch");
    BasicMatrix<T> c = a;
    for (Index i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

template <typename T>
BasicMatrix<T> sub(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    detail::check(a.same_shape(b), "sub: shape mismatch");
    BasicMatrix<T> c = a;
    for (Index i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

template <typename T>
BasicMatrix<T> scale(const BasicMatrix<T>& a, T s) {
    BasicMatrix<T> c = a;
    for (Index i = 0; i < c.size(); ++i) c[i] *= s;
    return c;
}

template <typename T>
BasicMatrix<T> hadamard(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    detail::check(a.same_shape(b), "hadamard: shape mismatch");
    BasicMatrix<T> c = a;
    for (Index i = 0; i < c.size(); ++i) c[i] *= b[i];
    return c;
}

template <typename T>
bool all_finite(const BasicMatrix<T>& a) {
    for (Index i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

template <typename T>
T max_abs_diff(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    detail::check(a.same_shape(b), "max_abs_diff: shape mismatch");
    T m = T{0};
    for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Row-wise softmax with max subtraction; rows sum to 1 even for rows like
// [1000, 0].
template <typename T>
BasicMatrix<T> softmax_rows(const BasicMatrix<T>& m) {
    BasicMatrix<T> out(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
        const T* x = m.row(i);
        T* y = out.row(i);
        T mx = x[0];
        for (Index j = 1; j < m.cols(); ++j) mx = std::max(mx, x[j]);
        T sum = T{0};
        for (Index j = 0; j < m.cols(); ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        for (Index j = 0; j < m.cols(); ++j) y[j] /= sum;
    }
    return out;
}

}  // namespace sparselab
