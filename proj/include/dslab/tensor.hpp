#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dslab/error.hpp"

namespace dslab {

using Shape = std::vector<int>;

std::int64_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

struct TensorData;

/// Operation record on the dynamic tape. Owned by the tensor it produced;
/// holds the input tensors so the upstream graph stays alive.
struct TensorNode {
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::function<void(TensorData& out)> backward;
    bool consumed = false;
};

struct TensorData {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::shared_ptr<TensorNode> node;  // null for leaves

    std::int64_t size() const { return std::int64_t(values.size()); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(values.size(), 0.0);
    }
};

/// Dense 64-bit tensor participating in a reverse-mode autodiff graph.
/// Value-semantics handle: copies share storage. The tape is dynamic --
/// every forward run records a fresh graph, consumed by backward().
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar_of(double value, bool requires_grad = false);

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return data_->shape; }
    std::int64_t size() const { return data_->size(); }
    bool requires_grad() const { return data_->requires_grad; }
    void set_requires_grad(bool value) { data_->requires_grad = value; }

    std::span<const double> values() const { return data_->values; }
    std::span<double> values_mut() { return data_->values; }
    double value_at(std::int64_t i) const { return data_->values[std::size_t(i)]; }

    /// Value of a size-1 tensor.
    double scalar() const;

    /// Gradient after backward(); throws when absent.
    std::span<const double> grad() const;
    bool has_grad() const { return data_ && !data_->grad.empty(); }
    void zero_grad() {
        if (data_) data_->grad.clear();
    }

    /// Deep copy of values (detached leaf, shares nothing).
    Tensor clone() const;

    std::shared_ptr<TensorData> data() const { return data_; }
    explicit Tensor(std::shared_ptr<TensorData> data) : data_(std::move(data)) {}

private:
    std::shared_ptr<TensorData> data_;
};

/// Two same-shape real tensors standing in for a complex tensor.
struct ComplexPair {
    Tensor re;
    Tensor im;
};

/// While alive, disables tape recording (evaluation-mode forwards).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_recording_enabled();

// ---- elementwise and reductions ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);  // exact erf form
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// ---- losses (mean over all elements; |d| subgradient at 0 is 0) ----
Tensor l1_loss(const Tensor& pred, const Tensor& target);
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// ---- structured ops ----
/// Cross-correlation with zero padding, stride 1. input N x C x H x W,
/// weight O x C x k x k (k odd), bias O. Output N x O x H' x W' with
/// H' = H + 2p - k + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding);

/// Sub-pixel rearrangement: N x (C*r^2) x H x W -> N x C x (rH) x (rW),
/// output(c, r*h+a, r*w+b) = input(c*r^2 + a*r + b, h, w).
Tensor pixel_shuffle(const Tensor& input, int factor);
Tensor pixel_unshuffle(const Tensor& input, int factor);

// ---- spectral ops ----
/// Unnormalized forward real DFT over the last two dims:
/// ... x H x W -> ComplexPair of ... x H x (floor(W/2)+1).
ComplexPair rfft2(const Tensor& input);

/// 1/(H*W)-normalized inverse of rfft2 onto a real ... x H x W tensor.
/// Defined for arbitrary half-spectra as the real-projection synthesis
/// x[u,v] = (1/(HW)) * sum_{h,w} m_w * Re(X[h,w] e^{i 2 pi (hu/H + wv/W)}),
/// where m_w doubles the columns with an implied conjugate mirror. This is
/// the exact inverse whenever the input is a valid rfft2 output.
Tensor irfft2(const ComplexPair& spectrum, int height, int width);

/// Mode-truncated analysis: the sub-block of rfft2(input) covering
/// spectral rows [row0, row0+rows) and columns [0, cols). Identical in
/// value to crop2d(rfft2(input), row0, rows, 0, cols) but never
/// materializes the full spectrum.
ComplexPair rfft2_rows(const Tensor& input, int row0, int rows, int cols);

/// Real synthesis of a block that conceptually sits at rows
/// [row0, row0+rows), columns [0, cols) of an otherwise zero
/// H x (floor(W/2)+1) half-spectrum. Identical in value to
/// irfft2(embed2d(block, H, halfW, row0, 0), H, W).
Tensor irfft2_block(const ComplexPair& block, int height, int width, int row0);

/// Per-mode complex channel mixing: input ... x C x m1 x m2 and weights
/// C x O x m1 x m2 give ... x O x m1 x m2 with out[o] = sum_c in[c]*w[c,o].
ComplexPair spectral_mix(const ComplexPair& modes, const ComplexPair& weights);

/// Block slice of the last two dims (any rank >= 2).
Tensor crop2d(const Tensor& input, int row0, int rows, int col0, int cols);
ComplexPair crop2d(const ComplexPair& input, int row0, int rows, int col0, int cols);

/// Embeds a block into a zero field of height x width at (row0, col0).
Tensor embed2d(const Tensor& block, int height, int width, int row0, int col0);
ComplexPair embed2d(const ComplexPair& block, int height, int width, int row0, int col0);

/// Reverse-mode sweep from a scalar root. Populates grads of every
/// requires_grad leaf; a second sweep over the same graph throws
/// GraphConsumed.
void backward(const Tensor& root);

}  // namespace dslab
