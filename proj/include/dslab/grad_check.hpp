#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dslab/tensor.hpp"

namespace dslab {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst;  // "leaf 1 [37]: analytic=..., numeric=..." for the max
    bool ok(double tol) const { return max_rel_err < tol; }
};

/// Compares reverse-mode gradients of a scalar functional against central
/// differences (f(x+eps e) - f(x-eps e)) / (2 eps) elementwise over every
/// leaf, reporting the worst relative error
///     |a - n| / max(1e-8, |a|, |n|).
/// `fn` must rebuild its graph from the passed leaves on each call; it is
/// invoked once recording and 2x(checked elements) more under NoGradGuard.
/// With max_checks_per_leaf > 0, elements are strided deterministically so
/// large parameter blocks stay affordable.
GradCheckResult grad_check(const std::function<Tensor(std::vector<Tensor>&)>& fn,
                           std::vector<Tensor> leaves, double eps = 1e-5,
                           int max_checks_per_leaf = 0);

}  // namespace dslab
