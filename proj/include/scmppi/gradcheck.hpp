#pragma once

#include <algorithm>
#include <cmath>

#include "scmppi/tensor.hpp"

namespace scmppi {

// Compares the tape's reverse-mode gradient at `point` against central
// finite differences. `build` must be callable on both float and double
// tapes: build(tape, leaf) -> scalar loss value id. The difference quotient
// runs on the double instantiation so the oracle is free of float32
// rounding noise.
//
// Returns max_i |analytic_i - fd_i| / max(1e-8, |analytic_i| + |fd_i|).
template <typename F>
double grad_check(F&& build, const Tensor& point, double epsilon = 1e-3) {
    TapeT<float> ft;
    const auto leaf = ft.leaf(point, true);
    const auto loss = build(ft, leaf);
    if (ft.val(loss).size() != 1) throw DataError("grad_check: function must return a scalar");
    ft.backward(loss);
    const std::vector<float> analytic = ft.grad(leaf);

    const TensorT<double> base = TensorT<double>::from(point);
    auto eval = [&](const TensorT<double>& x) {
        TapeT<double> dt;
        const auto l = dt.leaf(x, false);
        const auto out = build(dt, l);
        return static_cast<double>(dt.val(out).data[0]);
    };

    double worst = 0.0;
    TensorT<double> probe = base;
    for (std::size_t i = 0; i < probe.data.size(); ++i) {
        const double saved = probe.data[i];
        probe.data[i] = saved + epsilon;
        const double fp = eval(probe);
        probe.data[i] = saved - epsilon;
        const double fm = eval(probe);
        probe.data[i] = saved;
        const double fd = (fp - fm) / (2.0 * epsilon);
        const double a = static_cast<double>(analytic[i]);
        const double err = std::abs(a - fd) / std::max(1e-8, std::abs(a) + std::abs(fd));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace scmppi
