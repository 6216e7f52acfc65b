#include "b2w/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "b2w/errors.hpp"

namespace b2w {

namespace {
thread_local Graph* g_active = nullptr;
}

Graph::Scope::Scope(Graph& g) : prev_(g_active) {
    g_active = &g;
}

Graph::Scope::~Scope() {
    g_active = prev_;
}

Graph* Graph::active() {
    return g_active;
}

void Graph::note(const Tensor& t) {
    if (t.defined() && seen_.insert(t.impl()).second) {
        touched_.push_back(t.impl_ptr());
    }
}

void Graph::record(std::function<void()> backward_step, std::initializer_list<Tensor> touched) {
    for (const Tensor& t : touched) {
        note(t);
    }
    tape_.push_back(std::move(backward_step));
}

void Graph::record(std::function<void()> backward_step, const std::vector<Tensor>& touched) {
    for (const Tensor& t : touched) {
        note(t);
    }
    tape_.push_back(std::move(backward_step));
}

void Graph::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward requires a defined scalar loss");
    }
    if (seen_.find(loss.impl()) == seen_.end()) {
        throw ContractError("backward: loss was not recorded on this graph");
    }
    for (const auto& impl : touched_) {
        impl->grad.assign(impl->data.size(), 0.0);
    }
    loss.impl()->grad[0] = 1.0;
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
        (*it)();
    }
}

void backward(Graph& graph, const Tensor& loss) {
    graph.backward(loss);
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
    x.set_requires_grad(true);
    std::vector<double> analytic;
    {
        Graph g;
        Graph::Scope scope(g);
        Tensor loss = f(x);
        g.backward(loss);
        auto gr = x.grad();
        analytic.assign(gr.begin(), gr.end());
    }
    // Central differences with no graph active: ops skip recording.
    double worst = 0.0;
    auto xv = x.data();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const double keep = xv[i];
        xv[i] = keep + eps;
        const double fp = f(x).item();
        xv[i] = keep - eps;
        const double fm = f(x).item();
        xv[i] = keep;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double err = std::abs(analytic[i] - numeric) /
                           std::max(1e-12, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

double grad_check_params(const std::function<Tensor()>& loss_fn, const std::vector<Tensor>& params,
                         double eps) {
    std::vector<std::vector<double>> analytic(params.size());
    {
        Graph g;
        Graph::Scope scope(g);
        Tensor loss = loss_fn();
        g.backward(loss);
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto gr = params[p].grad();
            analytic[p].assign(gr.begin(), gr.end());
        }
    }
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto xv = const_cast<Tensor&>(params[p]).data();
        for (std::size_t i = 0; i < xv.size(); ++i) {
            const double keep = xv[i];
            xv[i] = keep + eps;
            const double fp = loss_fn().item();
            xv[i] = keep - eps;
            const double fm = loss_fn().item();
            xv[i] = keep;
            const double numeric = (fp - fm) / (2.0 * eps);
            const double err = std::abs(analytic[p][i] - numeric) /
                               std::max(1e-12, std::abs(analytic[p][i]) + std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace b2w
