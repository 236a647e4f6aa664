#pragma once

#include <functional>
#include <vector>

#include "cogest/autodiff.hpp"
#include "cogest/rng.hpp"
#include "doctest.h"

// Shared helpers for the unit suites.

namespace testsupport {

using cogest::Rng;
using cogest::Tensor;

inline Tensor random_tensor(int rows, int cols, Rng& rng, double scale = 1.0) {
    Tensor t(rows, cols);
    for (double& x : t.v) x = rng.uniform(-scale, scale);
    return t;
}

// Checks reverse-mode gradients against central finite differences.  `build`
// receives leaf Vars in the same order as `inputs` and must return a scalar.
// Every input is treated as trainable.
inline void check_gradients(const std::vector<Tensor>& inputs,
                            const std::function<cogest::ad::Var(cogest::ad::Tape&, std::vector<cogest::ad::Var>&)>& build,
                            double h = 1e-5, double tol = 2e-4) {
    namespace ad = cogest::ad;

    auto eval = [&](const std::vector<Tensor>& vals) {
        ad::Tape tape;
        std::vector<ad::Var> leaves;
        leaves.reserve(vals.size());
        for (const Tensor& t : vals) leaves.push_back(tape.input(t));
        return build(tape, leaves).val()(0, 0);
    };

    // Analytic pass: bind every input as a Parameter so grads accumulate.
    std::vector<ad::Parameter> params;
    params.reserve(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) params.emplace_back("in" + std::to_string(i), inputs[i]);
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (auto& p : params) leaves.push_back(tape.param(p));
    ad::Var loss = build(tape, leaves);
    REQUIRE(loss.rows() == 1);
    REQUIRE(loss.cols() == 1);
    tape.backward(loss);

    std::vector<Tensor> work = inputs;
    for (size_t pi = 0; pi < inputs.size(); ++pi) {
        for (size_t j = 0; j < inputs[pi].v.size(); ++j) {
            const double orig = work[pi].v[j];
            work[pi].v[j] = orig + h;
            const double up = eval(work);
            work[pi].v[j] = orig - h;
            const double dn = eval(work);
            work[pi].v[j] = orig;
            const double numeric = (up - dn) / (2.0 * h);
            const double analytic = params[pi].grad.v[j];
            const double err = std::fabs(numeric - analytic);
            const double bound = tol * std::max({1.0, std::fabs(numeric), std::fabs(analytic)});
            if (err > bound) {
                CAPTURE(pi);
                CAPTURE(j);
                CAPTURE(numeric);
                CAPTURE(analytic);
                CHECK(err <= bound);
                return;  // one detailed failure beats a flood
            }
        }
    }
    CHECK(true);
}

}  // namespace testsupport
