#include "dslab/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_set>
#include <vector>

#include "dslab/rng.hpp"
#include "dslab/tensor.hpp"

namespace dslab {

namespace {

// Stream ids for seed splitting within a training run.
constexpr std::uint64_t kStreamInit = 0;
constexpr std::uint64_t kStreamShuffle = 1;
constexpr std::uint64_t kStreamPatch = 2;

constexpr int kEvalBatch = 32;

void check_disjoint(const std::vector<int>& a, const std::vector<int>& b, const char* what) {
    std::unordered_set<int> seen(a.begin(), a.end());
    for (int y : b)
        if (seen.count(y)) fail(ErrorCode::InvalidArgument, std::string("split years overlap: ") + what);
}

void check_unique(const std::vector<int>& years, const char* what) {
    std::unordered_set<int> seen;
    for (int y : years)
        if (!seen.insert(y).second)
            fail(ErrorCode::InvalidArgument, std::string("duplicate year in ") + what);
}

/// Model-specific input/output contract used by every training, validation,
/// and inference path. Coarse-eating models receive their field with a
/// 1-pixel replicate-clamped halo and the upsampled border is cropped back
/// off, so edge pixels are always predicted from context instead of the
/// zero padding inside the convolutions. Refined-input models predict the
/// residual over their already-interpolated input, so an untrained network
/// starts at the interpolation baseline rather than at noise.
Tensor forward_model(const ModelConfig& model, const ModelParams& params, const Tensor& input) {
    if (const auto* e = std::get_if<EdsrConfig>(&model)) {
        Tensor y = edsr_forward(*e, params, input);
        const int f = e->factor;
        return crop2d(y, f, y.shape()[2] - 2 * f, f, y.shape()[3] - 2 * f);
    }
    return add(fno_forward(std::get<FnoConfig>(model), params, input), input);
}

/// Writes a (rows+2) x (cols+2) standardized copy of the window at
/// (r0, c0) whose indices are clamped to the field, i.e. a replicate halo
/// at the true borders and real neighbors elsewhere.
void copy_with_halo(std::span<const double> field, int fh, int fw, int r0, int c0, int rows,
                    int cols, const Standardizer& stdzr, double* dst) {
    for (int r = -1; r <= rows; ++r) {
        const int sr = std::clamp(r0 + r, 0, fh - 1);
        for (int c = -1; c <= cols; ++c) {
            const int sc = std::clamp(c0 + c, 0, fw - 1);
            *dst++ = stdzr.standardize(field[std::size_t(sr) * fw + sc]);
        }
    }
}

ModelParams snapshot(const ModelParams& params) {
    ModelParams out;
    for (const auto& [name, tensor] : params.entries()) out.add(name, tensor.clone());
    return out;
}

struct BatchSource {
    const PairSet* pairs = nullptr;
    // Refined coarse fields at fine resolution, indexed like pairs; empty
    // for models that consume the coarse grid directly.
    const std::vector<std::vector<double>>* refined = nullptr;

    bool uses_refined() const { return refined != nullptr; }
    bool halo() const { return !uses_refined(); }
    int input_h() const { return uses_refined() ? pairs->fine_h : pairs->coarse_h; }
    int input_w() const { return uses_refined() ? pairs->fine_w : pairs->coarse_w; }
    const std::vector<double>& input_field(int idx) const {
        return uses_refined() ? (*refined)[std::size_t(idx)] : pairs->pairs[std::size_t(idx)].coarse;
    }
};

/// Standardized full-image batch: inputs N x 1 x ih x iw, targets
/// N x 1 x fh x fw.
std::pair<Tensor, Tensor> full_batch(const BatchSource& src, std::span<const int> indices,
                                     const Standardizer& stdzr) {
    const int n = int(indices.size());
    const int ih = src.input_h(), iw = src.input_w();
    const int th = src.halo() ? ih + 2 : ih, tw = src.halo() ? iw + 2 : iw;
    const int fh = src.pairs->fine_h, fw = src.pairs->fine_w;
    Tensor input = Tensor::zeros({n, 1, th, tw});
    Tensor target = Tensor::zeros({n, 1, fh, fw});
    auto in = input.values_mut();
    auto tg = target.values_mut();
    for (int i = 0; i < n; ++i) {
        const auto& field = src.input_field(indices[std::size_t(i)]);
        const auto& fine = src.pairs->pairs[std::size_t(indices[std::size_t(i)])].fine;
        const std::size_t ibase = std::size_t(i) * th * tw;
        const std::size_t tbase = std::size_t(i) * fh * fw;
        if (src.halo()) {
            copy_with_halo(field, ih, iw, 0, 0, ih, iw, stdzr, in.data() + ibase);
        } else {
            for (std::size_t j = 0; j < field.size(); ++j)
                in[ibase + j] = stdzr.standardize(field[j]);
        }
        for (std::size_t j = 0; j < fine.size(); ++j) tg[tbase + j] = stdzr.standardize(fine[j]);
    }
    return {std::move(input), std::move(target)};
}

/// Standardized patch batch. Each element gets its own aligned coarse
/// crop of `patch` x `patch` coarse pixels; inputs that work at fine
/// resolution receive the matching window of the pre-refined field.
std::pair<Tensor, Tensor> patch_batch(const BatchSource& src, std::span<const int> indices,
                                      const Standardizer& stdzr, int patch, Rng& rng) {
    const int n = int(indices.size());
    const int f = src.pairs->factor;
    const int pc = patch;            // coarse-side patch
    const int pf = patch * f;        // fine-side patch
    const int ip = src.uses_refined() ? pf : pc + 2;
    const int ch = src.pairs->coarse_h, cw = src.pairs->coarse_w;
    Tensor input = Tensor::zeros({n, 1, ip, ip});
    Tensor target = Tensor::zeros({n, 1, pf, pf});
    auto in = input.values_mut();
    auto tg = target.values_mut();
    for (int i = 0; i < n; ++i) {
        const int idx = indices[std::size_t(i)];
        const int r0 = int(rng.below(std::uint64_t(ch - pc + 1)));
        const int c0 = int(rng.below(std::uint64_t(cw - pc + 1)));
        const auto& field = src.input_field(idx);
        const auto& fine = src.pairs->pairs[std::size_t(idx)].fine;
        if (src.halo()) {
            copy_with_halo(field, ch, cw, r0, c0, pc, pc, stdzr,
                           in.data() + std::size_t(i) * ip * ip);
        } else {
            const int iw = src.input_w();
            for (int r = 0; r < ip; ++r)
                for (int c = 0; c < ip; ++c)
                    in[(std::size_t(i) * ip + r) * ip + c] =
                        stdzr.standardize(field[std::size_t(r0 * f + r) * iw + (c0 * f + c)]);
        }
        for (int r = 0; r < pf; ++r)
            for (int c = 0; c < pf; ++c)
                tg[(std::size_t(i) * pf + r) * pf + c] = stdzr.standardize(
                    fine[std::size_t(r0 * f + r) * src.pairs->fine_w + (c0 * f + c)]);
    }
    return {std::move(input), std::move(target)};
}

std::vector<std::vector<double>> refine_inputs(const PairSet& pairs,
                                               const std::vector<std::vector<int>*>& index_sets) {
    ResamplePlan plan{KernelKind::BicubicKeys, pairs.factor, ResampleDirection::Refine};
    std::vector<std::vector<double>> refined(pairs.pairs.size());
    const std::size_t fine = std::size_t(pairs.fine_h) * pairs.fine_w;
    for (const auto* set : index_sets)
        for (int idx : *set) {
            auto& dst = refined[std::size_t(idx)];
            if (!dst.empty()) continue;
            dst.resize(fine);
            refine_field(pairs.pairs[std::size_t(idx)].coarse, pairs.coarse_h, pairs.coarse_w,
                         plan, dst);
        }
    return refined;
}

}  // namespace

void SplitSpec::validate() const {
    if (train_years.empty()) fail(ErrorCode::InvalidArgument, "split has no training years");
    if (val_years.empty()) fail(ErrorCode::InvalidArgument, "split has no validation years");
    check_unique(train_years, "train_years");
    check_unique(val_years, "val_years");
    check_unique(test_years, "test_years");
    check_disjoint(train_years, val_years, "train/val");
    check_disjoint(train_years, test_years, "train/test");
    check_disjoint(val_years, test_years, "val/test");
}

LossKind loss_from_name(const std::string& name) {
    if (name == "l1") return LossKind::L1;
    if (name == "mse") return LossKind::Mse;
    fail(ErrorCode::InvalidArgument, "unknown loss: " + name);
}

std::string loss_name(LossKind kind) { return kind == LossKind::L1 ? "l1" : "mse"; }

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "adamw") return OptimizerKind::AdamW;
    fail(ErrorCode::InvalidArgument, "unknown optimizer: " + name);
}

std::string optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "adamw";
}

std::string model_kind_name(const ModelConfig& model) {
    return std::holds_alternative<EdsrConfig>(model) ? "edsr" : "fno";
}

void TrainConfig::validate() const {
    std::visit([](const auto& m) { m.validate(); }, model);
    if (const auto* e = std::get_if<EdsrConfig>(&model); e && e->factor != factor)
        fail(ErrorCode::InvalidArgument, "model upsampling factor does not match pair factor");
    if (!(lr >= 0.0) || !(lr_min >= 0.0) || lr_min > lr)
        fail(ErrorCode::InvalidArgument, "require 0 <= lr_min <= lr");
    if (!(weight_decay >= 0.0)) fail(ErrorCode::InvalidArgument, "weight_decay must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        fail(ErrorCode::InvalidArgument, "betas must lie in [0, 1)");
    if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
    if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be at least 1");
    if (batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be at least 1");
    if (patch < 0) fail(ErrorCode::InvalidArgument, "patch must be >= 0");
    if (factor < 1) fail(ErrorCode::InvalidArgument, "factor must be at least 1");
}

PairSet build_pairs(const DailyGridSeries& hr, int factor, KernelKind kernel) {
    if (factor < 1) fail(ErrorCode::InvalidArgument, "pair factor must be at least 1");
    if (hr.height() % factor != 0 || hr.width() % factor != 0)
        fail(ErrorCode::NonDivisibleFactor, "factor must divide the grid dimensions");
    ResamplePlan plan{kernel, factor, ResampleDirection::Coarsen};
    PairSet out;
    out.fine_h = hr.height();
    out.fine_w = hr.width();
    out.coarse_h = hr.height() / factor;
    out.coarse_w = hr.width() / factor;
    out.factor = factor;
    out.pairs.reserve(std::size_t(hr.days()));
    for (int t = 0; t < hr.days(); ++t) {
        TrainPair p;
        p.date = hr.date_of_index(t);
        auto fine = hr.day(t);
        p.fine.assign(fine.begin(), fine.end());
        p.coarse.resize(std::size_t(out.coarse_h) * out.coarse_w);
        coarsen_field(fine, hr.height(), hr.width(), plan, p.coarse);
        out.pairs.push_back(std::move(p));
    }
    return out;
}

std::vector<int> pairs_in_years(const PairSet& pairs, const std::vector<int>& years) {
    std::unordered_set<int> wanted(years.begin(), years.end());
    std::vector<int> out;
    for (int i = 0; i < int(pairs.pairs.size()); ++i)
        if (wanted.count(pairs.pairs[std::size_t(i)].date.year())) out.push_back(i);
    return out;
}

Standardizer fit_standardizer(const DailyGridSeries& hr, const SplitSpec& split) {
    split.validate();
    std::unordered_set<int> train(split.train_years.begin(), split.train_years.end());
    double sum = 0.0;
    std::int64_t n = 0;
    for (int t = 0; t < hr.days(); ++t) {
        if (!train.count(hr.date_of_index(t).year())) continue;
        for (double v : hr.day(t))
            if (std::isfinite(v)) {
                sum += v;
                ++n;
            }
    }
    if (n == 0) fail(ErrorCode::EmptyTrainSet, "no finite training-year pixels to standardize");
    const double mean = sum / double(n);
    double ss = 0.0;
    for (int t = 0; t < hr.days(); ++t) {
        if (!train.count(hr.date_of_index(t).year())) continue;
        for (double v : hr.day(t))
            if (std::isfinite(v)) ss += (v - mean) * (v - mean);
    }
    Standardizer out;
    out.mean = mean;
    out.std = std::max(std::sqrt(ss / double(n)), Standardizer::kEpsilon);
    return out;
}

double cosine_lr(int t, int total, double lr_max, double lr_min) {
    if (total < 1 || t < 0 || t > total)
        fail(ErrorCode::InvalidArgument, "cosine_lr requires 0 <= t <= total, total >= 1");
    return lr_min +
           0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * double(t) / double(total)));
}

void adam_step(ModelParams& params, AdamState& state, double lr, double beta1, double beta2,
               double eps, double weight_decay, OptimizerKind mode, int t) {
    if (t < 1) fail(ErrorCode::InvalidArgument, "adam_step time index must be >= 1");
    auto& entries = params.entries();
    if (state.m.empty() && state.v.empty()) {
        state.m.resize(entries.size());
        state.v.resize(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            state.m[i].assign(std::size_t(entries[i].second.size()), 0.0);
            state.v[i].assign(std::size_t(entries[i].second.size()), 0.0);
        }
    }
    if (state.m.size() != entries.size() || state.v.size() != entries.size())
        fail(ErrorCode::ShapeMismatch, "optimizer state does not match parameter entries");
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Tensor& p = entries[i].second;
        auto values = p.values_mut();
        if (state.m[i].size() != values.size() || state.v[i].size() != values.size())
            fail(ErrorCode::ShapeMismatch, "optimizer state shape mismatch for " + entries[i].first);
        std::span<const double> grad;
        std::vector<double> zeros;
        if (p.has_grad()) {
            grad = p.grad();
        } else {
            zeros.assign(values.size(), 0.0);
            grad = zeros;
        }
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < values.size(); ++j) {
            double g = grad[j];
            if (mode == OptimizerKind::Adam) g += weight_decay * values[j];
            m[j] = beta1 * m[j] + (1.0 - beta1) * g;
            v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
            double update = (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
            if (mode == OptimizerKind::AdamW) update += weight_decay * values[j];
            values[j] -= lr * update;
        }
    }
}

std::pair<ModelParams, TrainReport> train(const TrainConfig& config, const PairSet& pairs,
                                          const SplitSpec& split, const Standardizer& stdzr) {
    config.validate();
    split.validate();
    if (pairs.pairs.empty()) fail(ErrorCode::InvalidArgument, "no training pairs");
    if (pairs.factor != config.factor)
        fail(ErrorCode::InvalidArgument, "pair set factor does not match training config");
    if (config.patch > 0 && (config.patch > pairs.coarse_h || config.patch > pairs.coarse_w))
        fail(ErrorCode::InvalidArgument, "patch exceeds the coarse grid");

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> train_idx = pairs_in_years(pairs, split.train_years);
    std::vector<int> val_idx = pairs_in_years(pairs, split.val_years);
    if (train_idx.empty()) fail(ErrorCode::EmptyTrainSet, "no pairs fall in the training years");
    if (val_idx.empty()) fail(ErrorCode::InvalidArgument, "no pairs fall in the validation years");

    const bool is_fno = std::holds_alternative<FnoConfig>(config.model);
    std::vector<std::vector<double>> refined;
    BatchSource source{&pairs, nullptr};
    if (is_fno) {
        std::vector<std::vector<int>*> sets{&train_idx, &val_idx};
        refined = refine_inputs(pairs, sets);
        source.refined = &refined;
    }

    ModelParams params = is_fno
                             ? init_fno(std::get<FnoConfig>(config.model),
                                        derive_seed(config.seed, kStreamInit))
                             : init_edsr(std::get<EdsrConfig>(config.model),
                                         derive_seed(config.seed, kStreamInit));
    params.set_requires_grad(true);

    Rng shuffle_rng(derive_seed(config.seed, kStreamShuffle));
    Rng patch_rng(derive_seed(config.seed, kStreamPatch));
    AdamState state;
    TrainReport report;
    ModelParams best;
    double best_rmse = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<int> order = train_idx;
    int step = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = cosine_lr(epoch - 1, config.epochs, config.lr, config.lr_min);
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t at = 0; at < order.size(); at += std::size_t(config.batch_size)) {
            const std::size_t nb = std::min(order.size() - at, std::size_t(config.batch_size));
            std::span<const int> chunk(order.data() + at, nb);
            auto [input, target] = config.patch > 0
                                       ? patch_batch(source, chunk, stdzr, config.patch, patch_rng)
                                       : full_batch(source, chunk, stdzr);
            params.zero_grad();
            Tensor pred = forward_model(config.model, params, input);
            Tensor loss = config.loss == LossKind::L1 ? l1_loss(pred, target)
                                                      : mse_loss(pred, target);
            const double value = loss.scalar();
            ++step;
            if (!std::isfinite(value))
                fail(ErrorCode::DivergedAtStep, "non-finite training loss at step " +
                                                    std::to_string(step) + " (epoch " +
                                                    std::to_string(epoch) + ")");
            backward(loss);
            adam_step(params, state, lr, config.beta1, config.beta2, config.eps,
                      config.weight_decay, config.optimizer, step);
            loss_sum += value * double(nb);
        }
        const double train_loss = loss_sum / double(order.size());
        const double val = validate_rmse(config.model, params, pairs, val_idx, stdzr);
        if (!std::isfinite(val))
            fail(ErrorCode::DivergedAtStep,
                 "non-finite validation RMSE after epoch " + std::to_string(epoch));
        report.epochs.push_back({epoch, train_loss, val, lr});
        if (val < best_rmse) {
            best_rmse = val;
            best_epoch = epoch;
            best = snapshot(params);
        }
    }

    report.best_epoch = best_epoch;
    report.best_val_rmse = best_rmse;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(best), std::move(report)};
}

double validate_rmse(const ModelConfig& model, const ModelParams& params, const PairSet& pairs,
                     const std::vector<int>& indices, const Standardizer& stdzr) {
    if (indices.empty()) fail(ErrorCode::InvalidArgument, "validate_rmse: no pairs selected");
    NoGradGuard guard;
    const bool is_fno = std::holds_alternative<FnoConfig>(model);
    std::vector<std::vector<double>> refined;
    BatchSource source{&pairs, nullptr};
    if (is_fno) {
        std::vector<int> copy = indices;
        std::vector<std::vector<int>*> sets{&copy};
        refined = refine_inputs(pairs, sets);
        source.refined = &refined;
    }
    const std::size_t fine = std::size_t(pairs.fine_h) * pairs.fine_w;
    double ss = 0.0;
    for (std::size_t at = 0; at < indices.size(); at += kEvalBatch) {
        const std::size_t nb = std::min(indices.size() - at, std::size_t(kEvalBatch));
        std::span<const int> chunk(indices.data() + at, nb);
        auto [input, target] = full_batch(source, chunk, stdzr);
        Tensor pred = forward_model(model, params, input);
        auto pv = pred.values();
        for (std::size_t i = 0; i < nb; ++i) {
            const auto& truth = pairs.pairs[std::size_t(chunk[i])].fine;
            const std::size_t base = i * fine;
            for (std::size_t j = 0; j < fine; ++j) {
                const double d = stdzr.destandardize(pv[base + j]) - truth[j];
                ss += d * d;
            }
        }
    }
    return std::sqrt(ss / (double(indices.size()) * double(fine)));
}

double refine_baseline_rmse(const PairSet& pairs, const std::vector<int>& indices,
                            KernelKind kernel) {
    if (indices.empty()) fail(ErrorCode::InvalidArgument, "refine_baseline_rmse: no pairs selected");
    ResamplePlan plan{kernel, pairs.factor, ResampleDirection::Refine};
    const std::size_t fine = std::size_t(pairs.fine_h) * pairs.fine_w;
    std::vector<double> up(fine);
    double ss = 0.0;
    for (int idx : indices) {
        const auto& p = pairs.pairs[std::size_t(idx)];
        refine_field(p.coarse, pairs.coarse_h, pairs.coarse_w, plan, up);
        for (std::size_t j = 0; j < fine; ++j) {
            const double d = up[j] - p.fine[j];
            ss += d * d;
        }
    }
    return std::sqrt(ss / (double(indices.size()) * double(fine)));
}

DailyGridSeries downscale_series(const ModelConfig& model, const ModelParams& params,
                                 const Standardizer& stdzr, const DailyGridSeries& coarse,
                                 int factor) {
    if (factor < 1) fail(ErrorCode::InvalidArgument, "downscale factor must be at least 1");
    if (const auto* e = std::get_if<EdsrConfig>(&model); e && e->factor != factor)
        fail(ErrorCode::InvalidArgument, "model upsampling factor does not match request");
    NoGradGuard guard;
    const bool is_fno = std::holds_alternative<FnoConfig>(model);
    const int ch = coarse.height(), cw = coarse.width();
    const int fh = ch * factor, fw = cw * factor;
    DailyGridSeries out = DailyGridSeries::filled(coarse.days(), fh, fw, coarse.start_date(),
                                                  coarse.transform().refined(factor), 0.0);
    ResamplePlan plan{KernelKind::BicubicKeys, factor, ResampleDirection::Refine};
    std::vector<double> scratch(is_fno ? std::size_t(fh) * fw : 0);
    const int ih = is_fno ? fh : ch + 2;
    const int iw = is_fno ? fw : cw + 2;
    for (int at = 0; at < coarse.days(); at += kEvalBatch) {
        const int nb = std::min(coarse.days() - at, kEvalBatch);
        Tensor input = Tensor::zeros({nb, 1, ih, iw});
        auto in = input.values_mut();
        for (int i = 0; i < nb; ++i) {
            auto field = coarse.day(at + i);
            const std::size_t base = std::size_t(i) * ih * iw;
            if (is_fno) {
                refine_field(field, ch, cw, plan, scratch);
                for (std::size_t j = 0; j < scratch.size(); ++j)
                    in[base + j] = stdzr.standardize(scratch[j]);
            } else {
                copy_with_halo(field, ch, cw, 0, 0, ch, cw, stdzr, in.data() + base);
            }
        }
        Tensor pred = forward_model(model, params, input);
        auto pv = pred.values();
        for (int i = 0; i < nb; ++i) {
            auto dst = out.day(at + i);
            const std::size_t base = std::size_t(i) * fh * fw;
            for (std::size_t j = 0; j < dst.size(); ++j)
                dst[j] = stdzr.destandardize(pv[base + j]);
        }
    }
    return out;
}

std::vector<SweepEntry> sweep(const std::vector<TrainConfig>& grid, const PairSet& pairs,
                              const SplitSpec& split, const Standardizer& stdzr) {
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "sweep requires at least one config");
    std::vector<SweepEntry> entries;
    entries.reserve(grid.size());
    for (const auto& config : grid) {
        auto [params, report] = train(config, pairs, split, stdzr);
        SweepEntry e;
        e.config = config;
        e.report = std::move(report);
        e.param_count = params.value_count();
        e.params = std::move(params);
        entries.push_back(std::move(e));
    }
    std::vector<int> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[std::size_t(i)] = int(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ea = entries[std::size_t(a)];
        const auto& eb = entries[std::size_t(b)];
        if (ea.report.best_val_rmse != eb.report.best_val_rmse)
            return ea.report.best_val_rmse < eb.report.best_val_rmse;
        if (ea.param_count != eb.param_count) return ea.param_count < eb.param_count;
        return a < b;
    });
    std::vector<SweepEntry> ranked;
    ranked.reserve(entries.size());
    for (int i : order) ranked.push_back(std::move(entries[std::size_t(i)]));
    return ranked;
}

}  // namespace dslab
