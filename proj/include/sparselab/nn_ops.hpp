#pragma once

#include <numbers>
#include <utility>
#include <vector>

#include "sparselab/matrix.hpp"

namespace sparselab {

inline Matrix relu(const Matrix& x) {
    Matrix y = x;
    for (Index i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
    return y;
}

inline Matrix relu_backward(const Matrix& x, const Matrix& dy) {
    detail::check(x.same_shape(dy), "relu_backward: shape mismatch");
    Matrix dx = dy;
    for (Index i = 0; i < dx.size(); ++i)
        if (x[i] <= 0.0) dx[i] = 0.0;
    return dx;
}

// Exact GELU, x * Phi(x).
inline Matrix gelu(const Matrix& x) {
    Matrix y = x;
    for (Index i = 0; i < y.size(); ++i) {
        const double v = y[i];
        y[i] = 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
    }
    return y;
}

inline Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
    detail::check(x.same_shape(dy), "gelu_backward: shape mismatch");
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    Matrix dx(x.rows(), x.cols());
    for (Index i = 0; i < x.size(); ++i) {
        const double v = x[i];
        const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
        dx[i] = dy[i] * (cdf + v * pdf);
    }
    return dx;
}

// Mean cross-entropy from logits plus the gradient w.r.t. logits,
// (softmax - onehot) / batch. Log-sum-exp is max-shifted.
inline std::pair<double, Matrix> cross_entropy_from_logits(const Matrix& logits,
                                                           const std::vector<int>& labels) {
    detail::check(logits.rows() == static_cast<Index>(labels.size()),
                  "cross_entropy: labels/batch mismatch");
    const Index batch = logits.rows();
    const Index classes = logits.cols();
    Matrix dlogits(batch, classes);
    double loss = 0.0;
    for (Index i = 0; i < batch; ++i) {
        const double* x = logits.row(i);
        double mx = x[0];
        for (Index j = 1; j < classes; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (Index j = 0; j < classes; ++j) sum += std::exp(x[j] - mx);
        const double log_z = mx + std::log(sum);
        const int label = labels[static_cast<std::size_t>(i)];
        detail::check(label >= 0 && label < classes, "cross_entropy: label out of range");
        loss += log_z - x[label];
        double* d = dlogits.row(i);
        for (Index j = 0; j < classes; ++j) {
            d[j] = std::exp(x[j] - log_z) / static_cast<double>(batch);
        }
        d[label] -= 1.0 / static_cast<double>(batch);
    }
    return {loss / static_cast<double>(batch), dlogits};
}

// dS for y = softmax_rows(s): dy -> (dy - rowdot(dy, y)) * y.
inline Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy) {
    detail::check(y.same_shape(dy), "softmax_backward: shape mismatch");
    Matrix ds(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
        const double* yi = y.row(i);
        const double* di = dy.row(i);
        double dot = 0.0;
        for (Index j = 0; j < y.cols(); ++j) dot += yi[j] * di[j];
        double* o = ds.row(i);
        for (Index j = 0; j < y.cols(); ++j) o[j] = (di[j] - dot) * yi[j];
    }
    return ds;
}

}  // namespace sparselab
