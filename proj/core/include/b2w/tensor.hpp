#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "b2w/rng.hpp"

namespace b2w {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

namespace detail {
struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // sized like data once touched by backward
    bool requires_grad = false;
};
}  // namespace detail

// Dense row-major fp64 tensor. Value-semantic handle onto shared storage,
// so ops can capture inputs on the autograd tape cheaply.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor randn(Shape shape, Rng& rng, double stddev, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor identity(std::size_t n, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t numel() const { return impl_->data.size(); }

    // Rank-1 tensors are treated as a single row.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<double> data() { return impl_->data; }
    std::span<const double> data() const { return impl_->data; }
    double item() const;  // numel()==1 only
    double at(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool v);

    // Gradient buffer; allocated zeroed on first access for grad-tracked
    // tensors. Populated by Graph::backward.
    std::span<double> grad();
    std::span<const double> grad() const;
    void zero_grad();

    Tensor clone() const;  // deep copy, grad not copied

    detail::TensorImpl* impl() const { return impl_.get(); }
    std::shared_ptr<detail::TensorImpl> impl_ptr() const { return impl_; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<detail::TensorImpl> impl_;
};

// ---- differentiable ops -------------------------------------------------
// Each op computes its result eagerly and, when a Graph is active and any
// input tracks gradients, records the adjoint step on the tape.

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k]x[k,n]
Tensor matmul_bt(const Tensor& a, const Tensor& b);  // a * b^T, [m,k]x[n,k]
Tensor add(const Tensor& a, const Tensor& b);        // same shape
Tensor add_rowwise(const Tensor& x, const Tensor& bias);  // [r,c] + [c]
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& x, double s);
Tensor gelu(const Tensor& x);  // exact erf form
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-12);
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets);
Tensor sum_all(const Tensor& x);  // -> scalar
Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& ids);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::size_t first, std::size_t width);
Tensor reshape(const Tensor& x, Shape shape);  // numel preserved; shares nothing, copies
Tensor dropout(const Tensor& x, double p, Rng& rng);  // inverted: kept entries scaled by 1/(1-p)

// Raw row-major matrix kernels (no autograd). C is accumulated into, so
// callers zero it first unless they want the sum.
namespace kernels {
void mm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void mm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void mm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
}  // namespace kernels

}  // namespace b2w
