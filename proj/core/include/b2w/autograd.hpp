#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "b2w/tensor.hpp"

namespace b2w {

// Dynamic tape. Ops executed while a Graph is active append one entry
// each; backward replays the adjoints in exact reverse execution order,
// accumulating additively into every input's grad (fan-out sums).
//
// One graph per thread at a time; distinct graphs on distinct threads
// are independent.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // RAII activation. Ops record onto the innermost active graph.
    class Scope {
    public:
        explicit Scope(Graph& g);
        ~Scope();
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Graph* prev_;
    };

    static Graph* active();

    // Appends one tape entry. `touched` lists every tensor whose grad the
    // entry reads or writes; backward zeroes those before replay.
    void record(std::function<void()> backward_step, std::initializer_list<Tensor> touched);
    void record(std::function<void()> backward_step, const std::vector<Tensor>& touched);

    // Seeds d(loss)/d(loss)=1 and replays the tape in reverse. Requires a
    // scalar loss recorded on this graph.
    void backward(const Tensor& loss);

    std::size_t size() const { return tape_.size(); }

private:
    void note(const Tensor& t);

    std::vector<std::function<void()>> tape_;
    std::vector<std::shared_ptr<detail::TensorImpl>> touched_;
    std::unordered_set<detail::TensorImpl*> seen_;
};

// Convenience form matching the rest of the op vocabulary.
void backward(Graph& graph, const Tensor& loss);

// Max relative gradient error of a scalar-valued f at x, by central
// differences: max_i |a_i - n_i| / max(1e-12, |a_i| + |n_i|).
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps);

// Same check for a loss over a fixed set of parameters: one analytic
// backward, then central differences element by element.
double grad_check_params(const std::function<Tensor()>& loss_fn, const std::vector<Tensor>& params,
                         double eps);

}  // namespace b2w
