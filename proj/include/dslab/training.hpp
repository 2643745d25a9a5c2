#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dslab/grid.hpp"
#include "dslab/models.hpp"
#include "dslab/resample.hpp"

namespace dslab {

struct SplitSpec {
    std::vector<int> train_years;
    std::vector<int> val_years;
    std::vector<int> test_years;

    void validate() const;  // train/val nonempty, all three pairwise disjoint
};

/// Global scalar standardization fitted on training-year pixels only; the
/// same (mean, std) pair is applied to inputs and targets.
struct Standardizer {
    static constexpr double kEpsilon = 1e-8;

    double mean = 0.0;
    double std = 1.0;  // floored at kEpsilon

    double standardize(double v) const { return (v - mean) / std; }
    double destandardize(double v) const { return v * std + mean; }
};

enum class LossKind { L1, Mse };
enum class OptimizerKind { Adam, AdamW };

LossKind loss_from_name(const std::string& name);
std::string loss_name(LossKind kind);
OptimizerKind optimizer_from_name(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

using ModelConfig = std::variant<EdsrConfig, FnoConfig>;

std::string model_kind_name(const ModelConfig& model);  // "edsr" | "fno"

struct TrainConfig {
    ModelConfig model = EdsrConfig{};
    LossKind loss = LossKind::L1;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double lr = 1e-4;
    double lr_min = 0.0;  // cosine annealing floor
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int epochs = 1;
    int batch_size = 32;
    int patch = 0;  // train-time crop size in coarse pixels; 0 = full images
    int factor = 4;
    KernelKind kernel = KernelKind::CubicBSpline;  // coarsening kernel for pairs
    std::uint64_t seed = 1;

    void validate() const;
};

/// One training day: coarse input and fine target, tagged with its date so
/// split filtering stays calendar-aware.
struct TrainPair {
    Date date;
    std::vector<double> coarse;
    std::vector<double> fine;
};

struct PairSet {
    int coarse_h = 0, coarse_w = 0;
    int fine_h = 0, fine_w = 0;
    int factor = 1;
    std::vector<TrainPair> pairs;
};

/// One pair per day of `hr`; the input is the kernel-coarsened target.
PairSet build_pairs(const DailyGridSeries& hr, int factor, KernelKind kernel);

/// Indices of pairs whose calendar year is in `years`.
std::vector<int> pairs_in_years(const PairSet& pairs, const std::vector<int>& years);

/// Mean and population std over all finite training-year pixels of `hr`.
/// Throws EmptyTrainSet when the training years contribute nothing.
Standardizer fit_standardizer(const DailyGridSeries& hr, const SplitSpec& split);

/// lr_min + 0.5 * (lr_max - lr_min) * (1 + cos(pi t / T)), no restarts.
double cosine_lr(int t, int total, double lr_max, double lr_min);

/// First/second moment buffers, entry-aligned with the ModelParams order.
struct AdamState {
    std::vector<std::vector<double>> m, v;
};

/// Bias-corrected Adam step at time t >= 1 reading gradients from the
/// param tensors. Adam folds weight decay into the gradient (L2); AdamW
/// decays the weights directly (decoupled).
void adam_step(ModelParams& params, AdamState& state, double lr, double beta1, double beta2,
               double eps, double weight_decay, OptimizerKind mode, int t);

struct EpochMetrics {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_rmse = 0.0;  // destandardized °C
    double lr = 0.0;
};

struct TrainReport {
    std::vector<EpochMetrics> epochs;
    int best_epoch = 0;
    double best_val_rmse = 0.0;
    double wall_seconds = 0.0;
};

/// Full deterministic training loop; returns the best-epoch parameter
/// snapshot (argmin validation RMSE, ties to the earliest epoch).
/// Non-finite loss aborts with DivergedAtStep.
std::pair<ModelParams, TrainReport> train(const TrainConfig& config, const PairSet& pairs,
                                          const SplitSpec& split, const Standardizer& stdzr);

/// Pixel RMSE of the model over the given pair indices, in °C.
double validate_rmse(const ModelConfig& model, const ModelParams& params, const PairSet& pairs,
                     const std::vector<int>& indices, const Standardizer& stdzr);

/// RMSE of plain kernel refinement over the given pair indices — the
/// model-free baseline the models must beat.
double refine_baseline_rmse(const PairSet& pairs, const std::vector<int>& indices,
                            KernelKind kernel);

/// Applies a trained model day by day to a coarse series. The FNO path
/// performs its bicubic pre-refine internally.
DailyGridSeries downscale_series(const ModelConfig& model, const ModelParams& params,
                                 const Standardizer& stdzr, const DailyGridSeries& coarse,
                                 int factor);

struct SweepEntry {
    TrainConfig config;
    TrainReport report;
    ModelParams params;
    std::int64_t param_count = 0;
};

/// Trains every config and ranks by best validation RMSE; ties prefer
/// fewer parameters, then earlier config order.
std::vector<SweepEntry> sweep(const std::vector<TrainConfig>& grid, const PairSet& pairs,
                              const SplitSpec& split, const Standardizer& stdzr);

// ---- config and run-directory serialization ----

/// Canonical JSON for TrainConfig (+ split); parsing is strict: unknown
/// keys are rejected, as are missing required ones.
std::string train_config_to_json(const TrainConfig& config, const SplitSpec& split);
std::pair<TrainConfig, SplitSpec> train_config_from_json_text(const std::string& text,
                                                              const std::string& origin);

/// Everything `downscale` needs to rebuild the model: kind + config,
/// standardizer, factor, and pair kernel.
struct ModelMeta {
    ModelConfig model;
    Standardizer stdzr;
    int factor = 4;
    KernelKind kernel = KernelKind::CubicBSpline;
};

std::string model_meta_to_json(const ModelMeta& meta);
ModelMeta model_meta_from_json_text(const std::string& text, const std::string& origin);

/// Writes config.json, metrics.csv (epoch,train_loss,val_rmse,lr),
/// best.prm and model_meta.json into `dir` (created if needed).
void write_run_dir(const std::string& dir, const TrainConfig& config, const SplitSpec& split,
                   const Standardizer& stdzr, const TrainReport& report, const ModelParams& best);

}  // namespace dslab
