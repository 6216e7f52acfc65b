#include "b2w/optim.hpp"

#include <cmath>

#include "b2w/errors.hpp"

namespace b2w {

bool adamw_step(std::vector<Tensor>& params, AdamWState& state, std::string* diagnostic) {
    if (!state.m.empty()) {
        if (state.m.size() != params.size()) {
            throw ShapeError("adamw_step: state holds " + std::to_string(state.m.size()) +
                             " moment buffers for " + std::to_string(params.size()) + " parameters");
        }
        for (std::size_t p = 0; p < params.size(); ++p) {
            if (state.m[p].size() != params[p].numel()) {
                throw ShapeError("adamw_step: moment buffer " + std::to_string(p) + " has " +
                                 std::to_string(state.m[p].size()) + " entries, parameter has " +
                                 std::to_string(params[p].numel()));
            }
        }
    }

    // Reject before touching anything so a bad step leaves no trace.
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto g = params[p].grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i])) {
                if (diagnostic != nullptr) {
                    *diagnostic = "non-finite gradient in parameter " + std::to_string(p) +
                                  " at element " + std::to_string(i);
                }
                return false;
            }
        }
    }

    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            state.m[p].assign(params[p].numel(), 0.0);
            state.v[p].assign(params[p].numel(), 0.0);
        }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto theta = params[p].data();
        auto g = params[p].grad();
        double* m = state.m[p].data();
        double* v = state.v[p].data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) +
                                    state.weight_decay * theta[i]);
        }
    }
    return true;
}

double clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
    double sq = 0.0;
    for (Tensor& p : params) {
        for (double g : p.grad()) {
            sq += g * g;
        }
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for (Tensor& p : params) {
            for (double& g : p.grad()) {
                g *= s;
            }
        }
    }
    return norm;
}

}  // namespace b2w
