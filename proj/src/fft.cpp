#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "dslab/parallel.hpp"
#include "dslab/tensor.hpp"

namespace dslab {

namespace detail {
Tensor finish_op(std::shared_ptr<TensorData> out,
                 std::vector<std::shared_ptr<TensorData>> inputs,
                 std::function<void(TensorData&)> backward_fn);
}
using detail::finish_op;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Unit-circle samples. c/s hold cos/sin(2*pi*m/n) for incremental mod-n
// walks; cm/sm hold the full n x n harmonic table, row m = cos/sin of
// frequency m over one period, so inner DFT loops read contiguous rows.
struct Twiddle {
    std::vector<double> c, s;
    std::vector<double> cm, sm;
};

const Twiddle& twiddle(int n) {
    static std::mutex mu;
    static std::map<int, Twiddle> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        Twiddle t;
        t.c.resize(std::size_t(n));
        t.s.resize(std::size_t(n));
        for (int m = 0; m < n; ++m) {
            t.c[std::size_t(m)] = std::cos(kTwoPi * m / n);
            t.s[std::size_t(m)] = std::sin(kTwoPi * m / n);
        }
        t.cm.resize(std::size_t(n) * n);
        t.sm.resize(std::size_t(n) * n);
        for (int m = 0; m < n; ++m)
            for (int v = 0; v < n; ++v) {
                // Reduce m*v mod n first so the table matches the
                // incremental walk bit-for-bit.
                const int idx = int((std::int64_t(m) * v) % n);
                t.cm[std::size_t(m) * n + v] = t.c[std::size_t(idx)];
                t.sm[std::size_t(m) * n + v] = t.s[std::size_t(idx)];
            }
        it = cache.emplace(n, std::move(t)).first;
    }
    return it->second;
}

inline int half_bins(int w) { return w / 2 + 1; }

// Column weight of the irfft2 synthesis: bins with a distinct conjugate
// mirror count twice.
inline double mirror_weight(int w, int width) {
    const int wh = half_bins(width);
    return (w == 0 || (width % 2 == 0 && w == wh - 1)) ? 1.0 : 2.0;
}

// X[h,w] = sum_{u,v} x[u,v] e^{-i 2 pi (hu/H + wv/W)}, restricted to
// spectral rows [row0, row0+rows) and columns [0, cols); re/im are
// rows x cols. The full transform is row0 = 0, rows = h, cols = W/2+1.
void analyze_block(const double* x, int h, int w, int row0, int rows, int cols, double* re,
                   double* im) {
    const Twiddle& tw = twiddle(w);
    const Twiddle& th = twiddle(h);
    std::vector<double> t1r(std::size_t(h) * cols), t1i(std::size_t(h) * cols);
    for (int u = 0; u < h; ++u) {
        const double* row = x + std::size_t(u) * w;
        for (int b = 0; b < cols; ++b) {
            const double* cr = tw.cm.data() + std::size_t(b) * w;
            const double* sr = tw.sm.data() + std::size_t(b) * w;
            double ar = 0.0, ai = 0.0;
#pragma omp simd reduction(+ : ar, ai)
            for (int v = 0; v < w; ++v) {
                ar += row[v] * cr[v];
                ai += row[v] * sr[v];
            }
            t1r[std::size_t(u) * cols + b] = ar;
            t1i[std::size_t(u) * cols + b] = -ai;
        }
    }
    for (int hl = 0; hl < rows; ++hl) {
        const int hb = row0 + hl;
        double* rrow = re + std::size_t(hl) * cols;
        double* irow = im + std::size_t(hl) * cols;
        std::fill(rrow, rrow + cols, 0.0);
        std::fill(irow, irow + cols, 0.0);
        int idx = 0;
        for (int u = 0; u < h; ++u) {
            const double c = th.c[std::size_t(idx)];
            const double s = th.s[std::size_t(idx)];
            const double* ar = t1r.data() + std::size_t(u) * cols;
            const double* ai = t1i.data() + std::size_t(u) * cols;
            for (int b = 0; b < cols; ++b) {
                // (ar + i ai) * (c - i s)
                rrow[b] += ar[b] * c + ai[b] * s;
                irow[b] += ai[b] * c - ar[b] * s;
            }
            idx += hb;
            if (idx >= h) idx -= h;
        }
    }
}

// x[u,v] = scale * sum m_w(X) * Re(X[h,w] e^{+i 2 pi (hu/H + wv/W)}) over
// a block at spectral rows [row0, row0+rows), columns [0, cols) of an
// otherwise zero h x (w/2+1) half-spectrum. Either of re/im may be null
// (treated as zero). The full synthesis is row0 = 0, rows = h,
// cols = w/2+1.
void synthesize_block(const double* re, const double* im, int h, int w, int row0, int rows,
                      int cols, bool apply_mirror, double scale, double* x) {
    const Twiddle& tw = twiddle(w);
    const Twiddle& th = twiddle(h);
    // All-zero spectral rows contribute nothing; grads of mode-truncated
    // spectra are mostly zero rows, so skipping them is a large win.
    std::vector<unsigned char> re_nz(std::size_t(rows), 0), im_nz(std::size_t(rows), 0);
    for (int hl = 0; hl < rows; ++hl) {
        if (re != nullptr)
            for (int b = 0; b < cols; ++b)
                if (re[std::size_t(hl) * cols + b] != 0.0) {
                    re_nz[std::size_t(hl)] = 1;
                    break;
                }
        if (im != nullptr)
            for (int b = 0; b < cols; ++b)
                if (im[std::size_t(hl) * cols + b] != 0.0) {
                    im_nz[std::size_t(hl)] = 1;
                    break;
                }
    }
    std::vector<double> t1r(std::size_t(h) * cols, 0.0), t1i(std::size_t(h) * cols, 0.0);
    for (int u = 0; u < h; ++u) {
        double* tr = t1r.data() + std::size_t(u) * cols;
        double* ti = t1i.data() + std::size_t(u) * cols;
        int idx = int((std::int64_t(u) * row0) % h);
        for (int hl = 0; hl < rows; ++hl) {
            const double c = th.c[std::size_t(idx)];
            const double s = th.s[std::size_t(idx)];
            // (xr + i xi) * (c + i s)
            if (re != nullptr && re_nz[std::size_t(hl)]) {
                const double* xr = re + std::size_t(hl) * cols;
                for (int b = 0; b < cols; ++b) {
                    tr[b] += xr[b] * c;
                    ti[b] += xr[b] * s;
                }
            }
            if (im != nullptr && im_nz[std::size_t(hl)]) {
                const double* xi = im + std::size_t(hl) * cols;
                for (int b = 0; b < cols; ++b) {
                    tr[b] -= xi[b] * s;
                    ti[b] += xi[b] * c;
                }
            }
            idx += u;
            if (idx >= h) idx -= h;
        }
        if (apply_mirror)
            for (int b = 0; b < cols; ++b) {
                const double m = mirror_weight(b, w);
                tr[b] *= m;
                ti[b] *= m;
            }
    }
    for (int u = 0; u < h; ++u) {
        const double* tr = t1r.data() + std::size_t(u) * cols;
        const double* ti = t1i.data() + std::size_t(u) * cols;
        double* out = x + std::size_t(u) * w;
        for (int v = 0; v < w; ++v) {
            const double* cr = tw.cm.data() + std::size_t(v) * w;
            const double* sr = tw.sm.data() + std::size_t(v) * w;
            double accc = 0.0, accs = 0.0;
#pragma omp simd reduction(+ : accc, accs)
            for (int b = 0; b < cols; ++b) {
                accc += tr[b] * cr[b];
                accs += ti[b] * sr[b];
            }
            out[v] = scale * (accc - accs);
        }
    }
}

std::shared_ptr<TensorData> alloc_data(Shape shape) {
    auto data = std::make_shared<TensorData>();
    data->values.assign(std::size_t(shape_size(shape)), 0.0);
    data->shape = std::move(shape);
    return data;
}

struct PlaneDims {
    std::int64_t batch;
    int h, w;
};

PlaneDims plane_dims(const Shape& shape, const char* op) {
    if (shape.size() < 2)
        fail(ErrorCode::ShapeMismatch, std::string(op) + " needs rank >= 2, got " +
                                           shape_string(shape));
    PlaneDims d;
    d.h = shape[shape.size() - 2];
    d.w = shape[shape.size() - 1];
    d.batch = 1;
    for (std::size_t i = 0; i + 2 < shape.size(); ++i) d.batch *= shape[i];
    return d;
}

}  // namespace

ComplexPair rfft2(const Tensor& input) {
    const PlaneDims d = plane_dims(input.shape(), "rfft2");
    const int wh = half_bins(d.w);
    Shape out_shape = input.shape();
    out_shape.back() = wh;
    auto re = alloc_data(out_shape);
    auto im = alloc_data(out_shape);
    const std::size_t in_plane = std::size_t(d.h) * d.w;
    const std::size_t out_plane = std::size_t(d.h) * wh;
    const double* x = input.values().data();
    double* pr = re->values.data();
    double* pi = im->values.data();
    parallel_for(d.batch, [&](std::int64_t b) {
        analyze_block(x + std::size_t(b) * in_plane, d.h, d.w, 0, d.h, wh,
                      pr + std::size_t(b) * out_plane, pi + std::size_t(b) * out_plane);
    });
    auto xd = input.data();
    const int h = d.h, w = d.w;
    const std::int64_t batch = d.batch;
    // Two outputs share one input; each node pushes back only its own
    // output grad (the map is linear, so the contributions just add).
    auto backward_part = [xd, h, w, batch](bool is_re) {
        return [xd, h, w, batch, is_re](TensorData& o) {
            if (!xd->requires_grad) return;
            xd->ensure_grad();
            const int wh = half_bins(w);
            const std::size_t in_plane = std::size_t(h) * w;
            const std::size_t out_plane = std::size_t(h) * wh;
            const double* g = o.grad.data();
            std::vector<double> dx(std::size_t(batch) * in_plane);
            parallel_for(batch, [&](std::int64_t b) {
                const double* gp = g + std::size_t(b) * out_plane;
                synthesize_block(is_re ? gp : nullptr, is_re ? nullptr : gp, h, w, 0, h, wh,
                                 /*apply_mirror=*/false, 1.0, dx.data() + std::size_t(b) * in_plane);
            });
            for (std::size_t i = 0; i < dx.size(); ++i) xd->grad[i] += dx[i];
        };
    };
    Tensor tre = finish_op(std::move(re), {xd}, backward_part(true));
    Tensor tim = finish_op(std::move(im), {xd}, backward_part(false));
    return {tre, tim};
}

Tensor irfft2(const ComplexPair& spectrum, int height, int width) {
    if (spectrum.re.shape() != spectrum.im.shape())
        fail(ErrorCode::ShapeMismatch, "irfft2: re/im shapes differ");
    const PlaneDims d = plane_dims(spectrum.re.shape(), "irfft2");
    if (height < 1 || width < 1) fail(ErrorCode::InvalidArgument, "irfft2: bad target size");
    if (d.h != height || d.w != half_bins(width))
        fail(ErrorCode::ShapeMismatch, "irfft2: spectrum is " + shape_string(spectrum.re.shape()) +
                                           ", want last dims " + std::to_string(height) + " x " +
                                           std::to_string(half_bins(width)));
    Shape out_shape = spectrum.re.shape();
    out_shape.back() = width;
    auto out = alloc_data(out_shape);
    const int wh = half_bins(width);
    const std::size_t spec_plane = std::size_t(height) * wh;
    const std::size_t out_plane = std::size_t(height) * width;
    const double scale = 1.0 / (double(height) * double(width));
    const double* pr = spectrum.re.values().data();
    const double* pi = spectrum.im.values().data();
    double* px = out->values.data();
    parallel_for(d.batch, [&](std::int64_t b) {
        synthesize_block(pr + std::size_t(b) * spec_plane, pi + std::size_t(b) * spec_plane, height,
                         width, 0, height, wh, /*apply_mirror=*/true, scale,
                         px + std::size_t(b) * out_plane);
    });
    auto rd = spectrum.re.data();
    auto id = spectrum.im.data();
    const std::int64_t batch = d.batch;
    return finish_op(std::move(out), {rd, id}, [rd, id, height, width, batch](TensorData& o) {
        if (!rd->requires_grad && !id->requires_grad) return;
        const int wh = half_bins(width);
        const std::size_t spec_plane = std::size_t(height) * wh;
        const std::size_t out_plane = std::size_t(height) * width;
        const double scale = 1.0 / (double(height) * double(width));
        const double* g = o.grad.data();
        std::vector<double> ar(std::size_t(batch) * spec_plane), ai(ar.size());
        parallel_for(batch, [&](std::int64_t b) {
            analyze_block(g + std::size_t(b) * out_plane, height, width, 0, height, wh,
                          ar.data() + std::size_t(b) * spec_plane,
                          ai.data() + std::size_t(b) * spec_plane);
        });
        // dRe = (m_w/HW) Re(F g), dIm = (m_w/HW) Im(F g); the sign of the
        // Im part matches because both forward and analysis carry e^{-i..}
        // conventions that cancel.
        if (rd->requires_grad) rd->ensure_grad();
        if (id->requires_grad) id->ensure_grad();
        for (std::int64_t b = 0; b < batch; ++b)
            for (int hb = 0; hb < height; ++hb)
                for (int wb = 0; wb < wh; ++wb) {
                    const std::size_t i = std::size_t(b) * spec_plane + std::size_t(hb) * wh + wb;
                    const double f = mirror_weight(wb, width) * scale;
                    if (rd->requires_grad) rd->grad[i] += f * ar[i];
                    if (id->requires_grad) id->grad[i] += f * ai[i];
                }
    });
}

ComplexPair rfft2_rows(const Tensor& input, int row0, int rows, int cols) {
    const PlaneDims d = plane_dims(input.shape(), "rfft2_rows");
    const int wh = half_bins(d.w);
    if (row0 < 0 || rows < 1 || row0 + rows > d.h)
        fail(ErrorCode::InvalidArgument, "rfft2_rows: rows [" + std::to_string(row0) + ", " +
                                             std::to_string(row0 + rows) + ") outside [0, " +
                                             std::to_string(d.h) + ")");
    if (cols < 1 || cols > wh)
        fail(ErrorCode::InvalidArgument, "rfft2_rows: cols " + std::to_string(cols) +
                                             " outside [1, " + std::to_string(wh) + "]");
    Shape out_shape = input.shape();
    out_shape[out_shape.size() - 2] = rows;
    out_shape.back() = cols;
    auto re = alloc_data(out_shape);
    auto im = alloc_data(out_shape);
    const std::size_t in_plane = std::size_t(d.h) * d.w;
    const std::size_t out_plane = std::size_t(rows) * cols;
    const double* x = input.values().data();
    double* pr = re->values.data();
    double* pi = im->values.data();
    parallel_for(d.batch, [&](std::int64_t b) {
        analyze_block(x + std::size_t(b) * in_plane, d.h, d.w, row0, rows, cols,
                      pr + std::size_t(b) * out_plane, pi + std::size_t(b) * out_plane);
    });
    auto xd = input.data();
    const int h = d.h, w = d.w;
    const std::int64_t batch = d.batch;
    // As in rfft2: two nodes share one input, each pushes back only its
    // own output grad. The adjoint of a block analysis is a block
    // synthesis without mirror weights or 1/(HW) scaling.
    auto backward_part = [xd, h, w, row0, rows, cols, batch](bool is_re) {
        return [xd, h, w, row0, rows, cols, batch, is_re](TensorData& o) {
            if (!xd->requires_grad) return;
            xd->ensure_grad();
            const std::size_t in_plane = std::size_t(h) * w;
            const std::size_t out_plane = std::size_t(rows) * cols;
            const double* g = o.grad.data();
            std::vector<double> dx(std::size_t(batch) * in_plane);
            parallel_for(batch, [&](std::int64_t b) {
                const double* gp = g + std::size_t(b) * out_plane;
                synthesize_block(is_re ? gp : nullptr, is_re ? nullptr : gp, h, w, row0, rows,
                                 cols, /*apply_mirror=*/false, 1.0,
                                 dx.data() + std::size_t(b) * in_plane);
            });
            for (std::size_t i = 0; i < dx.size(); ++i) xd->grad[i] += dx[i];
        };
    };
    Tensor tre = finish_op(std::move(re), {xd}, backward_part(true));
    Tensor tim = finish_op(std::move(im), {xd}, backward_part(false));
    return {tre, tim};
}

Tensor irfft2_block(const ComplexPair& block, int height, int width, int row0) {
    if (block.re.shape() != block.im.shape())
        fail(ErrorCode::ShapeMismatch, "irfft2_block: re/im shapes differ");
    const PlaneDims d = plane_dims(block.re.shape(), "irfft2_block");
    if (height < 1 || width < 1) fail(ErrorCode::InvalidArgument, "irfft2_block: bad target size");
    const int rows = d.h, cols = d.w;
    if (row0 < 0 || row0 + rows > height)
        fail(ErrorCode::InvalidArgument, "irfft2_block: rows [" + std::to_string(row0) + ", " +
                                             std::to_string(row0 + rows) + ") outside [0, " +
                                             std::to_string(height) + ")");
    if (cols > half_bins(width))
        fail(ErrorCode::ShapeMismatch, "irfft2_block: block has " + std::to_string(cols) +
                                           " columns, spectrum only " +
                                           std::to_string(half_bins(width)));
    Shape out_shape = block.re.shape();
    out_shape[out_shape.size() - 2] = height;
    out_shape.back() = width;
    auto out = alloc_data(out_shape);
    const std::size_t spec_plane = std::size_t(rows) * cols;
    const std::size_t out_plane = std::size_t(height) * width;
    const double scale = 1.0 / (double(height) * double(width));
    const double* pr = block.re.values().data();
    const double* pi = block.im.values().data();
    double* px = out->values.data();
    parallel_for(d.batch, [&](std::int64_t b) {
        synthesize_block(pr + std::size_t(b) * spec_plane, pi + std::size_t(b) * spec_plane,
                         height, width, row0, rows, cols, /*apply_mirror=*/true, scale,
                         px + std::size_t(b) * out_plane);
    });
    auto rd = block.re.data();
    auto id = block.im.data();
    const std::int64_t batch = d.batch;
    return finish_op(
        std::move(out), {rd, id}, [rd, id, height, width, row0, rows, cols, batch](TensorData& o) {
            if (!rd->requires_grad && !id->requires_grad) return;
            const std::size_t spec_plane = std::size_t(rows) * cols;
            const std::size_t out_plane = std::size_t(height) * width;
            const double scale = 1.0 / (double(height) * double(width));
            const double* g = o.grad.data();
            std::vector<double> ar(std::size_t(batch) * spec_plane), ai(ar.size());
            parallel_for(batch, [&](std::int64_t b) {
                analyze_block(g + std::size_t(b) * out_plane, height, width, row0, rows, cols,
                              ar.data() + std::size_t(b) * spec_plane,
                              ai.data() + std::size_t(b) * spec_plane);
            });
            if (rd->requires_grad) rd->ensure_grad();
            if (id->requires_grad) id->ensure_grad();
            for (std::int64_t b = 0; b < batch; ++b)
                for (int hl = 0; hl < rows; ++hl)
                    for (int wb = 0; wb < cols; ++wb) {
                        const std::size_t i =
                            std::size_t(b) * spec_plane + std::size_t(hl) * cols + wb;
                        const double f = mirror_weight(wb, width) * scale;
                        if (rd->requires_grad) rd->grad[i] += f * ar[i];
                        if (id->requires_grad) id->grad[i] += f * ai[i];
                    }
        });
}

namespace {

struct MixDims {
    std::int64_t batch;
    int cin, cout, m1, m2;
};

MixDims mix_dims(const ComplexPair& modes, const ComplexPair& weights) {
    if (modes.re.shape() != modes.im.shape())
        fail(ErrorCode::ShapeMismatch, "spectral_mix: modes re/im shapes differ");
    if (weights.re.shape() != weights.im.shape())
        fail(ErrorCode::ShapeMismatch, "spectral_mix: weights re/im shapes differ");
    const Shape& ms = modes.re.shape();
    const Shape& ws = weights.re.shape();
    if (ms.size() < 3)
        fail(ErrorCode::ShapeMismatch, "spectral_mix: modes need rank >= 3, got " +
                                           shape_string(ms));
    if (ws.size() != 4)
        fail(ErrorCode::ShapeMismatch, "spectral_mix: weights must be C x O x m1 x m2, got " +
                                           shape_string(ws));
    MixDims d;
    d.m2 = ms[ms.size() - 1];
    d.m1 = ms[ms.size() - 2];
    d.cin = ms[ms.size() - 3];
    d.batch = 1;
    for (std::size_t i = 0; i + 3 < ms.size(); ++i) d.batch *= ms[i];
    d.cout = ws[1];
    if (ws[0] != d.cin || ws[2] != d.m1 || ws[3] != d.m2)
        fail(ErrorCode::ShapeMismatch, "spectral_mix: modes " + shape_string(ms) +
                                           " incompatible with weights " + shape_string(ws));
    return d;
}

}  // namespace

ComplexPair spectral_mix(const ComplexPair& modes, const ComplexPair& weights) {
    const MixDims d = mix_dims(modes, weights);
    const std::size_t plane = std::size_t(d.m1) * d.m2;
    Shape out_shape = modes.re.shape();
    out_shape[out_shape.size() - 3] = d.cout;
    auto out_re = alloc_data(out_shape);
    auto out_im = alloc_data(out_shape);
    const double* ir = modes.re.values().data();
    const double* ii = modes.im.values().data();
    const double* wr = weights.re.values().data();
    const double* wi = weights.im.values().data();
    double* orr = out_re->values.data();
    double* oi = out_im->values.data();
    parallel_for(d.batch, [&](std::int64_t b) {
        for (int o = 0; o < d.cout; ++o) {
            double* pre = orr + (std::size_t(b) * d.cout + o) * plane;
            double* pim = oi + (std::size_t(b) * d.cout + o) * plane;
            for (int c = 0; c < d.cin; ++c) {
                const double* xr = ir + (std::size_t(b) * d.cin + c) * plane;
                const double* xi = ii + (std::size_t(b) * d.cin + c) * plane;
                const double* ar = wr + (std::size_t(c) * d.cout + o) * plane;
                const double* ai = wi + (std::size_t(c) * d.cout + o) * plane;
                for (std::size_t p = 0; p < plane; ++p) {
                    pre[p] += xr[p] * ar[p] - xi[p] * ai[p];
                    pim[p] += xr[p] * ai[p] + xi[p] * ar[p];
                }
            }
        }
    });
    auto xrd = modes.re.data();
    auto xid = modes.im.data();
    auto wrd = weights.re.data();
    auto wid = weights.im.data();
    // Same split as rfft2: one node per output, each consuming only its
    // own grad. For the out_re node (G = d out_re):
    //   d in_re += G * w_re, d in_im -= G * w_im,
    //   d w_re  += G * in_re, d w_im -= G * in_im.
    // For the out_im node (G = d out_im):
    //   d in_re += G * w_im, d in_im += G * w_re,
    //   d w_re  += G * in_im, d w_im += G * in_re.
    auto backward_part = [xrd, xid, wrd, wid, d, plane](bool is_re) {
        return [xrd, xid, wrd, wid, d, plane, is_re](TensorData& o) {
            const double* g = o.grad.data();
            const bool need_x = xrd->requires_grad || xid->requires_grad;
            const bool need_w = wrd->requires_grad || wid->requires_grad;
            if (need_x) {
                xrd->ensure_grad();
                xid->ensure_grad();
                parallel_for(d.batch, [&](std::int64_t b) {
                    for (int c = 0; c < d.cin; ++c) {
                        double* dxr = xrd->grad.data() + (std::size_t(b) * d.cin + c) * plane;
                        double* dxi = xid->grad.data() + (std::size_t(b) * d.cin + c) * plane;
                        for (int ocur = 0; ocur < d.cout; ++ocur) {
                            const double* gp = g + (std::size_t(b) * d.cout + ocur) * plane;
                            const double* ar =
                                wrd->values.data() + (std::size_t(c) * d.cout + ocur) * plane;
                            const double* ai =
                                wid->values.data() + (std::size_t(c) * d.cout + ocur) * plane;
                            if (is_re)
                                for (std::size_t p = 0; p < plane; ++p) {
                                    dxr[p] += gp[p] * ar[p];
                                    dxi[p] -= gp[p] * ai[p];
                                }
                            else
                                for (std::size_t p = 0; p < plane; ++p) {
                                    dxr[p] += gp[p] * ai[p];
                                    dxi[p] += gp[p] * ar[p];
                                }
                        }
                    }
                });
            }
            if (need_w) {
                wrd->ensure_grad();
                wid->ensure_grad();
                parallel_for(d.cout, [&](std::int64_t ocur) {
                    for (int c = 0; c < d.cin; ++c) {
                        double* dwr = wrd->grad.data() + (std::size_t(c) * d.cout + ocur) * plane;
                        double* dwi = wid->grad.data() + (std::size_t(c) * d.cout + ocur) * plane;
                        for (std::int64_t b = 0; b < d.batch; ++b) {
                            const double* gp = g + (std::size_t(b) * d.cout + ocur) * plane;
                            const double* xr =
                                xrd->values.data() + (std::size_t(b) * d.cin + c) * plane;
                            const double* xi =
                                xid->values.data() + (std::size_t(b) * d.cin + c) * plane;
                            if (is_re)
                                for (std::size_t p = 0; p < plane; ++p) {
                                    dwr[p] += gp[p] * xr[p];
                                    dwi[p] -= gp[p] * xi[p];
                                }
                            else
                                for (std::size_t p = 0; p < plane; ++p) {
                                    dwr[p] += gp[p] * xi[p];
                                    dwi[p] += gp[p] * xr[p];
                                }
                        }
                    }
                });
            }
        };
    };
    Tensor tre = finish_op(std::move(out_re), {xrd, xid, wrd, wid}, backward_part(true));
    Tensor tim = finish_op(std::move(out_im), {xrd, xid, wrd, wid}, backward_part(false));
    return {tre, tim};
}

Tensor crop2d(const Tensor& input, int row0, int rows, int col0, int cols) {
    const PlaneDims d = plane_dims(input.shape(), "crop2d");
    if (row0 < 0 || rows < 1 || col0 < 0 || cols < 1 || row0 + rows > d.h || col0 + cols > d.w)
        fail(ErrorCode::InvalidArgument,
             "crop2d: block [" + std::to_string(row0) + "+" + std::to_string(rows) + ", " +
                 std::to_string(col0) + "+" + std::to_string(cols) + "] outside " +
                 std::to_string(d.h) + " x " + std::to_string(d.w));
    Shape out_shape = input.shape();
    out_shape[out_shape.size() - 2] = rows;
    out_shape[out_shape.size() - 1] = cols;
    auto out = alloc_data(out_shape);
    const std::size_t in_plane = std::size_t(d.h) * d.w;
    const std::size_t out_plane = std::size_t(rows) * cols;
    const double* x = input.values().data();
    double* y = out->values.data();
    for (std::int64_t b = 0; b < d.batch; ++b)
        for (int r = 0; r < rows; ++r) {
            const double* src = x + std::size_t(b) * in_plane + std::size_t(row0 + r) * d.w + col0;
            double* dst = y + std::size_t(b) * out_plane + std::size_t(r) * cols;
            std::copy(src, src + cols, dst);
        }
    auto xd = input.data();
    const int h = d.h, w = d.w;
    const std::int64_t batch = d.batch;
    return finish_op(std::move(out), {xd},
                     [xd, h, w, batch, row0, rows, col0, cols](TensorData& o) {
                         if (!xd->requires_grad) return;
                         xd->ensure_grad();
                         const std::size_t in_plane = std::size_t(h) * w;
                         const std::size_t out_plane = std::size_t(rows) * cols;
                         const double* g = o.grad.data();
                         for (std::int64_t b = 0; b < batch; ++b)
                             for (int r = 0; r < rows; ++r) {
                                 const double* src =
                                     g + std::size_t(b) * out_plane + std::size_t(r) * cols;
                                 double* dst = xd->grad.data() + std::size_t(b) * in_plane +
                                               std::size_t(row0 + r) * w + col0;
                                 for (int c = 0; c < cols; ++c) dst[c] += src[c];
                             }
                     });
}

Tensor embed2d(const Tensor& block, int height, int width, int row0, int col0) {
    const PlaneDims d = plane_dims(block.shape(), "embed2d");
    if (row0 < 0 || col0 < 0 || height < 1 || width < 1 || row0 + d.h > height ||
        col0 + d.w > width)
        fail(ErrorCode::InvalidArgument,
             "embed2d: block " + std::to_string(d.h) + " x " + std::to_string(d.w) + " at (" +
                 std::to_string(row0) + ", " + std::to_string(col0) + ") outside " +
                 std::to_string(height) + " x " + std::to_string(width));
    Shape out_shape = block.shape();
    out_shape[out_shape.size() - 2] = height;
    out_shape[out_shape.size() - 1] = width;
    auto out = alloc_data(out_shape);
    const std::size_t in_plane = std::size_t(d.h) * d.w;
    const std::size_t out_plane = std::size_t(height) * width;
    const double* x = block.values().data();
    double* y = out->values.data();
    for (std::int64_t b = 0; b < d.batch; ++b)
        for (int r = 0; r < d.h; ++r) {
            const double* src = x + std::size_t(b) * in_plane + std::size_t(r) * d.w;
            double* dst = y + std::size_t(b) * out_plane + std::size_t(row0 + r) * width + col0;
            std::copy(src, src + d.w, dst);
        }
    auto xd = block.data();
    const int bh = d.h, bw = d.w;
    const std::int64_t batch = d.batch;
    return finish_op(std::move(out), {xd},
                     [xd, bh, bw, batch, height, width, row0, col0](TensorData& o) {
                         if (!xd->requires_grad) return;
                         xd->ensure_grad();
                         const std::size_t in_plane = std::size_t(bh) * bw;
                         const std::size_t out_plane = std::size_t(height) * width;
                         const double* g = o.grad.data();
                         for (std::int64_t b = 0; b < batch; ++b)
                             for (int r = 0; r < bh; ++r) {
                                 const double* src = g + std::size_t(b) * out_plane +
                                                     std::size_t(row0 + r) * width + col0;
                                 double* dst =
                                     xd->grad.data() + std::size_t(b) * in_plane + std::size_t(r) * bw;
                                 for (int c = 0; c < bw; ++c) dst[c] += src[c];
                             }
                     });
}

ComplexPair crop2d(const ComplexPair& input, int row0, int rows, int col0, int cols) {
    return {crop2d(input.re, row0, rows, col0, cols), crop2d(input.im, row0, rows, col0, cols)};
}

ComplexPair embed2d(const ComplexPair& block, int height, int width, int row0, int col0) {
    return {embed2d(block.re, height, width, row0, col0),
            embed2d(block.im, height, width, row0, col0)};
}

}  // namespace dslab
