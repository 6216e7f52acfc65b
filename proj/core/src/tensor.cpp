#include "b2w/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "b2w/autograd.hpp"
#include "b2w/errors.hpp"

namespace b2w {

namespace {

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) {
        n *= d;
    }
    return n;
}

void check_shape(const Shape& s) {
    if (s.empty()) {
        throw ShapeError("tensor shape must have at least one dimension");
    }
    for (std::size_t d : s) {
        if (d == 0) {
            throw ShapeError("tensor dimensions must be positive, got " + shape_str(s));
        }
    }
}

std::shared_ptr<detail::TensorImpl> make_impl(Shape shape, bool requires_grad) {
    check_shape(shape);
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data.assign(shape_numel(impl->shape), 0.0);
    impl->requires_grad = requires_grad;
    return impl;
}

bool track(const Tensor& t) { return t.requires_grad(); }

// Tape recording helper: compute grads only when a graph is listening.
bool recording(std::initializer_list<const Tensor*> inputs) {
    if (Graph::active() == nullptr) {
        return false;
    }
    for (const Tensor* t : inputs) {
        if (t->requires_grad()) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << (i ? "x" : "") << s[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return Tensor(make_impl(std::move(shape), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t(make_impl(std::move(shape), requires_grad));
    std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
    return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    Tensor t(make_impl(std::move(shape), requires_grad));
    if (values.size() != t.numel()) {
        throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(t.shape()));
    }
    t.impl_->data = std::move(values);
    return t;
}

Tensor Tensor::randn(Shape shape, Rng& rng, double stddev, bool requires_grad) {
    Tensor t(make_impl(std::move(shape), requires_grad));
    for (double& v : t.impl_->data) {
        v = rng.normal(0.0, stddev);
    }
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

Tensor Tensor::identity(std::size_t n, bool requires_grad) {
    Tensor t = zeros({n, n}, requires_grad);
    for (std::size_t i = 0; i < n; ++i) {
        t.impl_->data[i * n + i] = 1.0;
    }
    return t;
}

std::size_t Tensor::rows() const {
    const Shape& s = impl_->shape;
    return s.size() == 1 ? 1 : s[0];
}

std::size_t Tensor::cols() const {
    const Shape& s = impl_->shape;
    return s.size() == 1 ? s[0] : s[s.size() - 1];
}

double Tensor::item() const {
    if (numel() != 1) {
        throw ShapeError("item() requires a scalar tensor, got " + shape_str(shape()));
    }
    return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool v) {
    impl_->requires_grad = v;
    return *this;
}

std::span<double> Tensor::grad() {
    if (impl_->grad.size() != impl_->data.size()) {
        impl_->grad.assign(impl_->data.size(), 0.0);
    }
    return impl_->grad;
}

std::span<const double> Tensor::grad() const {
    const_cast<Tensor*>(this)->grad();
    return impl_->grad;
}

void Tensor::zero_grad() {
    impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor Tensor::clone() const {
    Tensor t(make_impl(impl_->shape, impl_->requires_grad));
    t.impl_->data = impl_->data;
    return t;
}

// ---- kernels --------------------------------------------------------------

namespace kernels {

void mm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) {
                continue;
            }
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void mm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    // c[i,j] += dot(a_row_i, b_row_j); b is [n,k]
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += arow[p] * brow[p];
            }
            crow[j] += acc;
        }
    }
}

void mm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    // c[i,j] += sum_p a[p,i] * b[p,j]; a is [k,m], b is [k,n]
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) {
                continue;
            }
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

}  // namespace kernels

// ---- ops ------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
    if (k != k2) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros({m, n}, track(a) || track(b));
    kernels::mm_nn(a.data().data(), b.data().data(), out.data().data(), m, k, n);
    if (recording({&a, &b})) {
        Graph::active()->record(
            [a, b, out, m, k, n]() {
                // dA = dC * B^T, dB = A^T * dC
                if (a.requires_grad()) {
                    kernels::mm_nt(out.grad().data(), b.data().data(),
                                   const_cast<Tensor&>(a).grad().data(), m, n, k);
                }
                if (b.requires_grad()) {
                    kernels::mm_tn(a.data().data(), out.grad().data(),
                                   const_cast<Tensor&>(b).grad().data(), k, m, n);
                }
            },
            {a, b, out});
    }
    return out;
}

Tensor matmul_bt(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (k != b.cols()) {
        throw ShapeError("matmul_bt: inner dimensions differ, " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros({m, n}, track(a) || track(b));
    kernels::mm_nt(a.data().data(), b.data().data(), out.data().data(), m, k, n);
    if (recording({&a, &b})) {
        Graph::active()->record(
            [a, b, out, m, k, n]() {
                // C = A B^T: dA = dC * B, dB = dC^T * A
                if (a.requires_grad()) {
                    kernels::mm_nn(out.grad().data(), b.data().data(),
                                   const_cast<Tensor&>(a).grad().data(), m, n, k);
                }
                if (b.requires_grad()) {
                    kernels::mm_tn(out.grad().data(), a.data().data(),
                                   const_cast<Tensor&>(b).grad().data(), n, m, k);
                }
            },
            {a, b, out});
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("add: shapes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros(a.shape(), track(a) || track(b));
    auto av = a.data(), bv = b.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] = av[i] + bv[i];
    }
    if (recording({&a, &b})) {
        Graph::active()->record(
            [a, b, out]() {
                auto g = out.grad();
                if (a.requires_grad()) {
                    auto ga = const_cast<Tensor&>(a).grad();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i];
                    }
                }
                if (b.requires_grad()) {
                    auto gb = const_cast<Tensor&>(b).grad();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        gb[i] += g[i];
                    }
                }
            },
            {a, b, out});
    }
    return out;
}

Tensor add_rowwise(const Tensor& x, const Tensor& bias) {
    const std::size_t r = x.rows(), c = x.cols();
    if (bias.numel() != c) {
        throw ShapeError("add_rowwise: bias " + shape_str(bias.shape()) + " does not match columns of " +
                         shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros(x.shape(), track(x) || track(bias));
    auto xv = x.data(), bv = bias.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            ov[i * c + j] = xv[i * c + j] + bv[j];
        }
    }
    if (recording({&x, &bias})) {
        Graph::active()->record(
            [x, bias, out, r, c]() {
                auto g = out.grad();
                if (x.requires_grad()) {
                    auto gx = const_cast<Tensor&>(x).grad();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        gx[i] += g[i];
                    }
                }
                if (bias.requires_grad()) {
                    auto gb = const_cast<Tensor&>(bias).grad();
                    for (std::size_t i = 0; i < r; ++i) {
                        for (std::size_t j = 0; j < c; ++j) {
                            gb[j] += g[i * c + j];
                        }
                    }
                }
            },
            {x, bias, out});
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return add(a, scale(b, -1.0));
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("mul: shapes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros(a.shape(), track(a) || track(b));
    auto av = a.data(), bv = b.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] = av[i] * bv[i];
    }
    if (recording({&a, &b})) {
        Graph::active()->record(
            [a, b, out]() {
                auto g = out.grad();
                if (a.requires_grad()) {
                    auto ga = const_cast<Tensor&>(a).grad();
                    auto bv2 = b.data();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i] * bv2[i];
                    }
                }
                if (b.requires_grad()) {
                    auto gb = const_cast<Tensor&>(b).grad();
                    auto av2 = a.data();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        gb[i] += g[i] * av2[i];
                    }
                }
            },
            {a, b, out});
    }
    return out;
}

Tensor scale(const Tensor& x, double s) {
    Tensor out = Tensor::zeros(x.shape(), track(x));
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] = xv[i] * s;
    }
    if (recording({&x})) {
        Graph::active()->record(
            [x, out, s]() {
                auto g = out.grad();
                auto gx = const_cast<Tensor&>(x).grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += g[i] * s;
                }
            },
            {x, out});
    }
    return out;
}

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Tensor gelu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape(), track(x));
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * kInvSqrt2));
    }
    if (recording({&x})) {
        Graph::active()->record(
            [x, out]() {
                auto g = out.grad();
                auto gx = const_cast<Tensor&>(x).grad();
                auto xv2 = x.data();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double v = xv2[i];
                    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                    gx[i] += g[i] * (cdf + v * pdf);
                }
            },
            {x, out});
    }
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out = Tensor::zeros(x.shape(), track(x));
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = xv.data() + i * c;
        double* orow = ov.data() + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) {
            mx = std::max(mx, row[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            orow[j] = std::exp(row[j] - mx);
            denom += orow[j];
        }
        for (std::size_t j = 0; j < c; ++j) {
            orow[j] /= denom;
        }
    }
    if (recording({&x})) {
        Graph::active()->record(
            [x, out, r, c]() {
                auto g = out.grad();
                auto y = out.data();
                auto gx = const_cast<Tensor&>(x).grad();
                for (std::size_t i = 0; i < r; ++i) {
                    const double* grow = g.data() + i * c;
                    const double* yrow = y.data() + i * c;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < c; ++j) {
                        dot += grow[j] * yrow[j];
                    }
                    double* gxrow = gx.data() + i * c;
                    for (std::size_t j = 0; j < c; ++j) {
                        gxrow[j] += yrow[j] * (grow[j] - dot);
                    }
                }
            },
            {x, out});
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t r = x.rows(), d = x.cols();
    if (gamma.numel() != d || beta.numel() != d) {
        throw ShapeError("layer_norm: gamma " + shape_str(gamma.shape()) + " / beta " +
                         shape_str(beta.shape()) + " do not match last dimension of " +
                         shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros(x.shape(), track(x) || track(gamma) || track(beta));
    // Cached per-row statistics for the backward pass.
    auto xhat = std::make_shared<std::vector<double>>(r * d);
    auto inv_std = std::make_shared<std::vector<double>>(r);
    auto xv = x.data();
    auto gv = gamma.data(), bv = beta.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = xv.data() + i * d;
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            mean += row[j];
        }
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = row[j] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(d);
        const double istd = 1.0 / std::sqrt(var + eps);
        (*inv_std)[i] = istd;
        for (std::size_t j = 0; j < d; ++j) {
            const double xh = (row[j] - mean) * istd;
            (*xhat)[i * d + j] = xh;
            ov[i * d + j] = gv[j] * xh + bv[j];
        }
    }
    if (recording({&x, &gamma, &beta})) {
        Graph::active()->record(
            [x, gamma, beta, out, xhat, inv_std, r, d]() {
                auto g = out.grad();
                auto gv2 = gamma.data();
                for (std::size_t i = 0; i < r; ++i) {
                    const double* grow = g.data() + i * d;
                    const double* xh = xhat->data() + i * d;
                    if (gamma.requires_grad()) {
                        auto gg = const_cast<Tensor&>(gamma).grad();
                        for (std::size_t j = 0; j < d; ++j) {
                            gg[j] += grow[j] * xh[j];
                        }
                    }
                    if (beta.requires_grad()) {
                        auto gb = const_cast<Tensor&>(beta).grad();
                        for (std::size_t j = 0; j < d; ++j) {
                            gb[j] += grow[j];
                        }
                    }
                    if (x.requires_grad()) {
                        // dxhat = g*gamma; dx = istd/d * (d*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
                        double s1 = 0.0, s2 = 0.0;
                        for (std::size_t j = 0; j < d; ++j) {
                            const double dxh = grow[j] * gv2[j];
                            s1 += dxh;
                            s2 += dxh * xh[j];
                        }
                        auto gx = const_cast<Tensor&>(x).grad();
                        double* gxrow = gx.data() + i * d;
                        const double istd = (*inv_std)[i];
                        const double dn = static_cast<double>(d);
                        for (std::size_t j = 0; j < d; ++j) {
                            const double dxh = grow[j] * gv2[j];
                            gxrow[j] += istd * (dxh - s1 / dn - xh[j] * s2 / dn);
                        }
                    }
                }
            },
            {x, gamma, beta, out});
    }
    return out;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
    const std::size_t n = logits.rows(), v = logits.cols();
    if (targets.size() != n) {
        throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(n) + " logit rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= v) {
            throw IndexError("cross_entropy: target id " + std::to_string(targets[i]) + " at row " +
                             std::to_string(i) + " outside vocab of size " + std::to_string(v));
        }
    }
    Tensor out = Tensor::zeros({1}, track(logits));
    // log-sum-exp per row with max shift; keep softmax rows for backward.
    auto probs = std::make_shared<std::vector<double>>(n * v);
    auto xv = logits.data();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = xv.data() + i * v;
        double mx = row[0];
        for (std::size_t j = 1; j < v; ++j) {
            mx = std::max(mx, row[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < v; ++j) {
            denom += std::exp(row[j] - mx);
        }
        const double lse = mx + std::log(denom);
        total += lse - row[static_cast<std::size_t>(targets[i])];
        double* prow = probs->data() + i * v;
        for (std::size_t j = 0; j < v; ++j) {
            prow[j] = std::exp(row[j] - lse);
        }
    }
    out.data()[0] = total / static_cast<double>(n);
    if (recording({&logits})) {
        Graph::active()->record(
            [logits, out, probs, targets, n, v]() {
                const double g = out.grad()[0] / static_cast<double>(n);
                auto gx = const_cast<Tensor&>(logits).grad();
                for (std::size_t i = 0; i < n; ++i) {
                    const double* prow = probs->data() + i * v;
                    double* gxrow = gx.data() + i * v;
                    for (std::size_t j = 0; j < v; ++j) {
                        gxrow[j] += g * prow[j];
                    }
                    gxrow[static_cast<std::size_t>(targets[i])] -= g;
                }
            },
            {logits, out});
    }
    return out;
}

Tensor sum_all(const Tensor& x) {
    Tensor out = Tensor::zeros({1}, track(x));
    double acc = 0.0;
    for (double v : x.data()) {
        acc += v;
    }
    out.data()[0] = acc;
    if (recording({&x})) {
        Graph::active()->record(
            [x, out]() {
                const double g = out.grad()[0];
                auto gx = const_cast<Tensor&>(x).grad();
                for (double& v : gx) {
                    v += g;
                }
            },
            {x, out});
    }
    return out;
}

Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& ids) {
    const std::size_t rows = table.rows(), d = table.cols();
    if (ids.empty()) {
        throw ContractError("gather_rows: empty id list");
    }
    for (std::size_t id : ids) {
        if (id >= rows) {
            throw IndexError("gather_rows: row " + std::to_string(id) + " outside table with " +
                             std::to_string(rows) + " rows");
        }
    }
    Tensor out = Tensor::zeros({ids.size(), d}, track(table));
    auto tv = table.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::memcpy(ov.data() + i * d, tv.data() + ids[i] * d, d * sizeof(double));
    }
    if (recording({&table})) {
        Graph::active()->record(
            [table, out, ids, d]() {
                auto g = out.grad();
                auto gt = const_cast<Tensor&>(table).grad();
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const double* grow = g.data() + i * d;
                    double* trow = gt.data() + ids[i] * d;
                    for (std::size_t j = 0; j < d; ++j) {
                        trow[j] += grow[j];
                    }
                }
            },
            {table, out});
    }
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw ContractError("concat_rows: no parts");
    }
    const std::size_t c = parts[0].cols();
    std::size_t total = 0;
    bool rg = false;
    for (const Tensor& p : parts) {
        if (p.cols() != c) {
            throw ShapeError("concat_rows: column mismatch, " + shape_str(p.shape()) + " vs " +
                             shape_str(parts[0].shape()));
        }
        total += p.rows();
        rg = rg || p.requires_grad();
    }
    Tensor out = Tensor::zeros({total, c}, rg);
    auto ov = out.data();
    std::size_t r0 = 0;
    for (const Tensor& p : parts) {
        std::memcpy(ov.data() + r0 * c, p.data().data(), p.numel() * sizeof(double));
        r0 += p.rows();
    }
    if (Graph::active() != nullptr && rg) {
        std::vector<Tensor> touched = parts;
        touched.push_back(out);
        Graph::active()->record(
            [parts, out, c]() {
                auto gout = out.grad();
                std::size_t r = 0;
                for (const Tensor& p : parts) {
                    if (p.requires_grad()) {
                        auto gp = const_cast<Tensor&>(p).grad();
                        const double* src = gout.data() + r * c;
                        for (std::size_t i = 0; i < gp.size(); ++i) {
                            gp[i] += src[i];
                        }
                    }
                    r += p.rows();
                }
            },
            touched);
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw ContractError("concat_cols: no parts");
    }
    const std::size_t r = parts[0].rows();
    std::size_t total = 0;
    bool rg = false;
    for (const Tensor& p : parts) {
        if (p.rows() != r) {
            throw ShapeError("concat_cols: row mismatch, " + shape_str(p.shape()) + " vs " +
                             shape_str(parts[0].shape()));
        }
        total += p.cols();
        rg = rg || p.requires_grad();
    }
    Tensor out = Tensor::zeros({r, total}, rg);
    auto ov = out.data();
    std::size_t c0 = 0;
    for (const Tensor& p : parts) {
        const std::size_t pc = p.cols();
        auto pv = p.data();
        for (std::size_t i = 0; i < r; ++i) {
            std::memcpy(ov.data() + i * total + c0, pv.data() + i * pc, pc * sizeof(double));
        }
        c0 += pc;
    }
    if (Graph::active() != nullptr && rg) {
        std::vector<Tensor> touched = parts;
        touched.push_back(out);
        Graph::active()->record(
            [parts, out, r, total]() {
                auto gout = out.grad();
                std::size_t c = 0;
                for (const Tensor& p : parts) {
                    const std::size_t pc = p.cols();
                    if (p.requires_grad()) {
                        auto gp = const_cast<Tensor&>(p).grad();
                        for (std::size_t i = 0; i < r; ++i) {
                            const double* src = gout.data() + i * total + c;
                            double* dst = gp.data() + i * pc;
                            for (std::size_t j = 0; j < pc; ++j) {
                                dst[j] += src[j];
                            }
                        }
                    }
                    c += pc;
                }
            },
            touched);
    }
    return out;
}

Tensor slice_cols(const Tensor& x, std::size_t first, std::size_t width) {
    const std::size_t r = x.rows(), c = x.cols();
    if (first + width > c || width == 0) {
        throw IndexError("slice_cols: [" + std::to_string(first) + ", " + std::to_string(first + width) +
                         ") outside " + shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros({r, width}, track(x));
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < r; ++i) {
        std::memcpy(ov.data() + i * width, xv.data() + i * c + first, width * sizeof(double));
    }
    if (recording({&x})) {
        Graph::active()->record(
            [x, out, first, width, r, c]() {
                auto g = out.grad();
                auto gx = const_cast<Tensor&>(x).grad();
                for (std::size_t i = 0; i < r; ++i) {
                    const double* src = g.data() + i * width;
                    double* dst = gx.data() + i * c + first;
                    for (std::size_t j = 0; j < width; ++j) {
                        dst[j] += src[j];
                    }
                }
            },
            {x, out});
    }
    return out;
}

Tensor dropout(const Tensor& x, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0) {
        throw ConfigError("dropout rate must lie in [0,1), got " + std::to_string(p));
    }
    if (p == 0.0) {
        return scale(x, 1.0);
    }
    const double keep_scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(x.numel());
    for (double& m : *mask) {
        m = rng.uniform() < p ? 0.0 : keep_scale;
    }
    Tensor out = Tensor::zeros(x.shape(), track(x));
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] = xv[i] * (*mask)[i];
    }
    if (recording({&x})) {
        Graph::active()->record(
            [x, out, mask]() {
                auto g = out.grad();
                auto gx = const_cast<Tensor&>(x).grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += g[i] * (*mask)[i];
                }
            },
            {x, out});
    }
    return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
    Tensor out = Tensor::zeros(shape, track(x));
    if (out.numel() != x.numel()) {
        throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    }
    std::memcpy(out.data().data(), x.data().data(), x.numel() * sizeof(double));
    if (recording({&x})) {
        Graph::active()->record(
            [x, out]() {
                auto g = out.grad();
                auto gx = const_cast<Tensor&>(x).grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += g[i];
                }
            },
            {x, out});
    }
    return out;
}

}  // namespace b2w
