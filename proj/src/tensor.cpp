#include "dslab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace dslab {

namespace {

// Training allocates and frees multi-megabyte activation buffers every
// step; without this glibc serves them via mmap/munmap and each reuse
// refaults the pages. Keeping freed blocks in the arena trades a larger
// resident set for a large constant-factor speedup.
struct AllocatorTuning {
    AllocatorTuning() {
#ifdef __GLIBC__
        mallopt(M_MMAP_MAX, 0);
        mallopt(M_TRIM_THRESHOLD, -1);
#endif
    }
};
const AllocatorTuning g_allocator_tuning;

}  // namespace

std::int64_t shape_size(const Shape& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d < 1) fail(ErrorCode::ShapeMismatch, "non-positive dimension in " + shape_string(shape));
        n *= d;
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
    out << ']';
    return out.str();
}

namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<TensorData> make_data(Shape shape, std::vector<double> values, bool requires_grad) {
    auto data = std::make_shared<TensorData>();
    data->shape = std::move(shape);
    data->values = std::move(values);
    data->requires_grad = requires_grad;
    return data;
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_recording_enabled() { return g_grad_enabled; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    const auto n = std::size_t(shape_size(shape));
    return Tensor(make_data(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = std::size_t(shape_size(shape));
    return Tensor(make_data(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    if (std::size_t(shape_size(shape)) != values.size())
        fail(ErrorCode::ShapeMismatch, "value count " + std::to_string(values.size()) +
                                           " does not match shape " + shape_string(shape));
    return Tensor(make_data(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar_of(double value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

double Tensor::scalar() const {
    if (size() != 1) fail(ErrorCode::ShapeMismatch, "scalar() on tensor " + shape_string(shape()));
    return data_->values[0];
}

std::span<const double> Tensor::grad() const {
    if (!data_ || data_->grad.empty())
        fail(ErrorCode::InvalidArgument, "no gradient present; run backward() first");
    return data_->grad;
}

Tensor Tensor::clone() const {
    return Tensor(make_data(data_->shape, data_->values, data_->requires_grad));
}

namespace detail {

// Records `node` on `out` when grads are enabled and any input needs them.
Tensor finish_op(std::shared_ptr<TensorData> out,
                 std::vector<std::shared_ptr<TensorData>> inputs,
                 std::function<void(TensorData&)> backward_fn) {
    bool needs = false;
    if (g_grad_enabled)
        for (const auto& in : inputs)
            if (in->requires_grad) needs = true;
    if (needs) {
        out->requires_grad = true;
        auto node = std::make_shared<TensorNode>();
        node->inputs = std::move(inputs);
        node->backward = std::move(backward_fn);
        out->node = std::move(node);
    }
    return Tensor(std::move(out));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + shape_string(a.shape()) + " vs " +
                                           shape_string(b.shape()));
}

}  // namespace detail

using detail::check_same_shape;
using detail::finish_op;

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    const auto n = std::size_t(a.size());
    std::vector<double> out(n);
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] + pb[i];
    auto ad = a.data();
    auto bd = b.data();
    return finish_op(make_data(a.shape(), std::move(out), false), {ad, bd},
                     [ad, bd](TensorData& o) {
                         const double* g = o.grad.data();
                         const std::size_t count = o.values.size();
                         if (ad->requires_grad) {
                             ad->ensure_grad();
                             for (std::size_t i = 0; i < count; ++i) ad->grad[i] += g[i];
                         }
                         if (bd->requires_grad) {
                             bd->ensure_grad();
                             for (std::size_t i = 0; i < count; ++i) bd->grad[i] += g[i];
                         }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    const auto n = std::size_t(a.size());
    std::vector<double> out(n);
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] - pb[i];
    auto ad = a.data();
    auto bd = b.data();
    return finish_op(make_data(a.shape(), std::move(out), false), {ad, bd},
                     [ad, bd](TensorData& o) {
                         const double* g = o.grad.data();
                         const std::size_t count = o.values.size();
                         if (ad->requires_grad) {
                             ad->ensure_grad();
                             for (std::size_t i = 0; i < count; ++i) ad->grad[i] += g[i];
                         }
                         if (bd->requires_grad) {
                             bd->ensure_grad();
                             for (std::size_t i = 0; i < count; ++i) bd->grad[i] -= g[i];
                         }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    const auto n = std::size_t(a.size());
    std::vector<double> out(n);
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] * pb[i];
    auto ad = a.data();
    auto bd = b.data();
    return finish_op(make_data(a.shape(), std::move(out), false), {ad, bd},
                     [ad, bd](TensorData& o) {
                         const double* g = o.grad.data();
                         const std::size_t count = o.values.size();
                         if (ad->requires_grad) {
                             ad->ensure_grad();
                             for (std::size_t i = 0; i < count; ++i)
                                 ad->grad[i] += g[i] * bd->values[i];
                         }
                         if (bd->requires_grad) {
                             bd->ensure_grad();
                             for (std::size_t i = 0; i < count; ++i)
                                 bd->grad[i] += g[i] * ad->values[i];
                         }
                     });
}

Tensor scale(const Tensor& a, double factor) {
    const auto n = std::size_t(a.size());
    std::vector<double> out(n);
    const double* pa = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] * factor;
    auto ad = a.data();
    return finish_op(make_data(a.shape(), std::move(out), false), {ad}, [ad, factor](TensorData& o) {
        if (!ad->requires_grad) return;
        ad->ensure_grad();
        for (std::size_t i = 0; i < o.values.size(); ++i) ad->grad[i] += o.grad[i] * factor;
    });
}

Tensor relu(const Tensor& a) {
    const auto n = std::size_t(a.size());
    std::vector<double> out(n);
    const double* pa = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] > 0.0 ? pa[i] : 0.0;
    auto ad = a.data();
    return finish_op(make_data(a.shape(), std::move(out), false), {ad}, [ad](TensorData& o) {
        if (!ad->requires_grad) return;
        ad->ensure_grad();
        for (std::size_t i = 0; i < o.values.size(); ++i)
            if (ad->values[i] > 0.0) ad->grad[i] += o.grad[i];
    });
}

Tensor gelu(const Tensor& a) {
    static const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto n = std::size_t(a.size());
    std::vector<double> out(n);
    const double* pa = a.values().data();
    for (std::size_t i = 0; i < n; ++i)
        out[i] = 0.5 * pa[i] * (1.0 + std::erf(pa[i] * inv_sqrt2));
    auto ad = a.data();
    return finish_op(make_data(a.shape(), std::move(out), false), {ad}, [ad](TensorData& o) {
        if (!ad->requires_grad) return;
        ad->ensure_grad();
        for (std::size_t i = 0; i < o.values.size(); ++i) {
            const double x = ad->values[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
            const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
            ad->grad[i] += o.grad[i] * (cdf + x * pdf);
        }
    });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    auto ad = a.data();
    return finish_op(make_data({1}, {acc}, false), {ad}, [ad](TensorData& o) {
        if (!ad->requires_grad) return;
        ad->ensure_grad();
        const double g = o.grad[0];
        for (double& gi : ad->grad) gi += g;
    });
}

Tensor mean(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    const double inv = 1.0 / double(a.size());
    auto ad = a.data();
    return finish_op(make_data({1}, {acc * inv}, false), {ad}, [ad, inv](TensorData& o) {
        if (!ad->requires_grad) return;
        ad->ensure_grad();
        const double g = o.grad[0] * inv;
        for (double& gi : ad->grad) gi += g;
    });
}

Tensor l1_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "l1_loss");
    const auto n = std::size_t(pred.size());
    double acc = 0.0;
    const double* pp = pred.values().data();
    const double* pt = target.values().data();
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(pp[i] - pt[i]);
    const double inv = 1.0 / double(n);
    auto pd = pred.data();
    auto td = target.data();
    return finish_op(make_data({1}, {acc * inv}, false), {pd, td}, [pd, td, inv](TensorData& o) {
        const double g = o.grad[0] * inv;
        const std::size_t count = pd->values.size();
        // sign(0) = 0: subgradient at zero pinned to zero.
        if (pd->requires_grad) {
            pd->ensure_grad();
            for (std::size_t i = 0; i < count; ++i) {
                const double d = pd->values[i] - td->values[i];
                pd->grad[i] += d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
            }
        }
        if (td->requires_grad) {
            td->ensure_grad();
            for (std::size_t i = 0; i < count; ++i) {
                const double d = pd->values[i] - td->values[i];
                td->grad[i] -= d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
            }
        }
    });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "mse_loss");
    const auto n = std::size_t(pred.size());
    double acc = 0.0;
    const double* pp = pred.values().data();
    const double* pt = target.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pp[i] - pt[i];
        acc += d * d;
    }
    const double inv = 1.0 / double(n);
    auto pd = pred.data();
    auto td = target.data();
    return finish_op(make_data({1}, {acc * inv}, false), {pd, td}, [pd, td, inv](TensorData& o) {
        const double g = 2.0 * o.grad[0] * inv;
        const std::size_t count = pd->values.size();
        if (pd->requires_grad) {
            pd->ensure_grad();
            for (std::size_t i = 0; i < count; ++i)
                pd->grad[i] += g * (pd->values[i] - td->values[i]);
        }
        if (td->requires_grad) {
            td->ensure_grad();
            for (std::size_t i = 0; i < count; ++i)
                td->grad[i] -= g * (pd->values[i] - td->values[i]);
        }
    });
}

void backward(const Tensor& root) {
    if (!root.defined()) fail(ErrorCode::InvalidArgument, "backward on undefined tensor");
    if (root.size() != 1)
        fail(ErrorCode::NonScalarRoot, "backward root has shape " + shape_string(root.shape()));
    auto root_data = root.data();
    if (root_data->node && root_data->node->consumed)
        fail(ErrorCode::GraphConsumed, "backward already ran on this graph");

    // Iterative post-order DFS: topological order of the recorded graph.
    std::vector<TensorData*> order;
    std::unordered_set<TensorData*> visited;
    struct Frame {
        TensorData* data;
        std::size_t next_input;
    };
    std::vector<Frame> stack;
    if (root_data->node) stack.push_back({root_data.get(), 0});
    visited.insert(root_data.get());
    while (!stack.empty()) {
        Frame& frame = stack.back();
        TensorNode* node = frame.data->node.get();
        if (!node || frame.next_input >= node->inputs.size()) {
            order.push_back(frame.data);
            stack.pop_back();
            continue;
        }
        TensorData* input = node->inputs[frame.next_input++].get();
        if (input->node && visited.insert(input).second) stack.push_back({input, 0});
    }

    root_data->ensure_grad();
    root_data->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorData* data = *it;
        data->ensure_grad();
        data->node->backward(*data);
        data->node->consumed = true;
    }
}

}  // namespace dslab
