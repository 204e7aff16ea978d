#pragma once

#include <functional>
#include <stdexcept>

#include "sparselab/matrix.hpp"

namespace sparselab {

// Central-difference gradient of a scalar function. The oracle every other
// module checks its analytic gradients against; keep it independent of the
// code paths it verifies.
inline Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, Matrix x,
                               double h = 1e-5) {
    if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
    Matrix g(x.rows(), x.cols());
    for (Index i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("finite_diff_grad: non-finite function value");
        }
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

struct GradCheckResult {
    double rel_err = 0.0;  // max abs error over the larger of the two vector sup-norms
    double max_abs_err = 0.0;
    Index worst_index = -1;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

inline GradCheckResult compare_grads(const Matrix& analytic, const Matrix& numeric) {
    detail::check(analytic.same_shape(numeric), "compare_grads: shape mismatch");
    GradCheckResult r;
    double scale = 0.0;
    for (Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic[i];
        const double n = numeric[i];
        const double abs_err = std::abs(a - n);
        scale = std::max({scale, std::abs(a), std::abs(n)});
        if (abs_err > r.max_abs_err) {
            r.max_abs_err = abs_err;
            r.worst_index = i;
            r.analytic_at_worst = a;
            r.numeric_at_worst = n;
        }
    }
    r.rel_err = scale > 0.0 ? r.max_abs_err / scale : r.max_abs_err;
    return r;
}

}  // namespace sparselab
