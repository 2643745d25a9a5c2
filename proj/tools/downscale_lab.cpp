#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dslab/error.hpp"
#include "dslab/evaluation.hpp"
#include "dslab/grid_io.hpp"
#include "dslab/indicators.hpp"
#include "dslab/models.hpp"
#include "dslab/resample.hpp"
#include "dslab/stations.hpp"
#include "dslab/synth.hpp"
#include "dslab/training.hpp"

#include "../src/byteio.hpp"

namespace {

using namespace dslab;

/// Tool-level usage problems (bad flag combinations, unparsable values)
/// that CLI11 cannot catch declaratively. Mapped to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_year_range(const std::string& text) {
    const auto dash = text.find('-');
    try {
        if (dash == std::string::npos) {
            const int y = std::stoi(text);
            return {y, y};
        }
        const int a = std::stoi(text.substr(0, dash));
        const int b = std::stoi(text.substr(dash + 1));
        if (b < a) throw UsageError("--years range is reversed: " + text);
        return {a, b};
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("cannot parse --years value: " + text);
    }
}

std::vector<std::pair<std::string, std::string>> parse_grid_list(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t at = 0;
    while (at <= text.size()) {
        std::size_t end = text.find(',', at);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(at, end - at);
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq != std::string::npos)
                out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
            else
                out.emplace_back(std::filesystem::path(item).stem().string(), item);
        }
        at = end + 1;
    }
    if (out.empty()) throw UsageError("--grids needs at least one [name=]path entry");
    return out;
}

void ramp_pixel(double s, unsigned char* px) {
    if (s < 0.0) s = 0.0;
    if (s > 1.0) s = 1.0;
    double r, g, b;
    if (s < 0.5) {  // blue -> white
        const double u = s / 0.5;
        r = u;
        g = u;
        b = 1.0;
    } else {  // white -> red
        const double u = (s - 0.5) / 0.5;
        r = 1.0;
        g = 1.0 - u;
        b = 1.0 - u;
    }
    px[0] = (unsigned char)std::lround(255.0 * r);
    px[1] = (unsigned char)std::lround(255.0 * g);
    px[2] = (unsigned char)std::lround(255.0 * b);
}

// ---- subcommand drivers ----

struct SynthArgs {
    std::string config;
    std::string out_hr;
    std::string out_proj;
    int proj_factor = 4;
    bool shuffle_years = false;
    std::string stations_out;
    std::string obs_out;
    int n_stations = 24;
    double obs_noise = 0.0;
};

void run_synth(const SynthArgs& a) {
    const SynthConfig cfg =
        synth_config_from_json_text(byteio::slurp_text(a.config), a.config);
    const DailyGridSeries hr = synth_hr(cfg);
    write_grid(hr, a.out_hr);
    if (!a.out_proj.empty()) {
        const DailyGridSeries proj =
            synth_projection(hr, a.proj_factor, cfg.bias_c, a.shuffle_years, cfg.seed);
        write_grid(proj, a.out_proj);
    }
    if (!a.stations_out.empty() || !a.obs_out.empty()) {
        if (a.stations_out.empty() || a.obs_out.empty())
            throw UsageError("--stations-out and --obs-out must be given together");
        const StationSet set = synth_stations(hr, a.n_stations, cfg.seed, a.obs_noise);
        write_stations(set, a.stations_out);
        write_observations(set, a.obs_out);
    }
}

struct ResampleArgs {
    std::string in;
    std::string out;
    int factor = 4;
    std::string kernel;
};

void run_resample(const ResampleArgs& a, ResampleDirection direction) {
    const DailyGridSeries in = read_grid(a.in);
    ResamplePlan plan;
    plan.kind = kernel_from_name(a.kernel);
    plan.factor = a.factor;
    plan.direction = direction;
    const DailyGridSeries out =
        direction == ResampleDirection::Coarsen ? coarsen(in, plan) : refine(in, plan);
    write_grid(out, a.out);
}

struct TrainArgs {
    std::string config;
    std::string hr;
    std::string run_dir;
};

void run_train(const TrainArgs& a) {
    auto [config, split] = train_config_from_json_text(byteio::slurp_text(a.config), a.config);
    const DailyGridSeries hr = read_grid(a.hr);
    const PairSet pairs = build_pairs(hr, config.factor, config.kernel);
    const Standardizer stdzr = fit_standardizer(hr, split);
    auto [best, report] = train(config, pairs, split, stdzr);
    write_run_dir(a.run_dir, config, split, stdzr, report, best);
    std::printf("%s: best epoch %d, val RMSE %.6f C, %lld params, %.1f s\n",
                model_kind_name(config.model).c_str(), report.best_epoch, report.best_val_rmse,
                (long long)best.value_count(), report.wall_seconds);
}

struct DownscaleArgs {
    std::string run_dir;
    std::string in;
    std::string out;
};

void run_downscale(const DownscaleArgs& a) {
    const std::filesystem::path run(a.run_dir);
    const std::string meta_path = (run / "model_meta.json").string();
    const ModelMeta meta = model_meta_from_json_text(byteio::slurp_text(meta_path), meta_path);
    const ModelParams params = load_params((run / "best.prm").string());
    const DailyGridSeries coarse = read_grid(a.in);
    const DailyGridSeries fine =
        downscale_series(meta.model, params, meta.stdzr, coarse, meta.factor);
    write_grid(fine, a.out);
}

struct IndicatorArgs {
    std::string grid;
    std::string obs;
    std::string stations;
    std::string out;
};

void run_indicators(const IndicatorArgs& a) {
    if (a.grid.empty() == a.obs.empty())
        throw UsageError("give exactly one of --grid or --obs");
    StationSet set = read_stations(a.stations);
    std::vector<IndicatorRow> rows;
    std::optional<DailyGridSeries> grid;
    if (!a.grid.empty()) grid.emplace(read_grid(a.grid));
    if (!a.obs.empty()) read_observations(a.obs, set);
    for (const Station& st : set.stations()) {
        const DailySeries series =
            grid ? station_pixel_series(*grid, st) : station_observation_series(st);
        for (IndicatorKind kind : all_indicators())
            for (const IndicatorValue& v : compute_indicator(kind, series))
                rows.push_back({st.id, kind, v});
    }
    write_indicator_csv(rows, a.out);
}

struct EvaluateArgs {
    std::string grids;
    std::string stations;
    std::string obs;
    std::string years;
    std::string out;
};

void run_evaluate(const EvaluateArgs& a) {
    const auto methods = parse_grid_list(a.grids);
    const auto [y0, y1] = parse_year_range(a.years);
    StationSet set = read_stations(a.stations);
    read_observations(a.obs, set);
    std::vector<EvalReport> reports;
    reports.reserve(methods.size());
    for (const auto& [name, path] : methods) {
        const DailyGridSeries grid = read_grid(path);
        reports.push_back(evaluate_method(name, grid, set, all_indicators(), y0, y1));
    }
    write_report_csv(reports, a.out);
}

struct PlotArgs {
    std::string in;
    std::string out;
    int day = 0;
    std::string date;
};

void run_plot(const PlotArgs& a) {
    const DailyGridSeries grid = read_grid(a.in);
    int t = a.day;
    if (!a.date.empty()) t = date_to_index(grid, Date::parse(a.date));
    if (t < 0 || t >= grid.days())
        fail(ErrorCode::OutOfRange, "--day outside the series: " + std::to_string(t));
    const auto field = grid.day(t);
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    for (double v : field) {
        if (!std::isfinite(v)) continue;
        if (!seen) {
            lo = hi = v;
            seen = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const int w = grid.width(), h = grid.height();
    char header[160];
    std::snprintf(header, sizeof header, "P6\n# min %.17g\n# max %.17g\n%d %d\n255\n", lo, hi, w,
                  h);
    std::vector<char> bytes(header, header + std::strlen(header));
    const std::size_t at = bytes.size();
    bytes.resize(at + std::size_t(3) * w * h);
    auto* px = reinterpret_cast<unsigned char*>(bytes.data() + at);
    const bool flat = !(hi > lo);
    for (std::size_t i = 0; i < field.size(); ++i, px += 3) {
        const double v = field[i];
        if (!std::isfinite(v)) {
            px[0] = px[1] = px[2] = 128;
            continue;
        }
        ramp_pixel(flat ? 0.5 : (v - lo) / (hi - lo), px);
    }
    byteio::spill(a.out, bytes);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical downscaling laboratory"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic daily temperature dataset");
    synth->add_option("--config", synth_args.config, "synthesis config JSON")->required();
    synth->add_option("--out-hr", synth_args.out_hr, "output high-resolution GRD1")->required();
    synth->add_option("--out-proj", synth_args.out_proj,
                      "optional coarse projection branch GRD1");
    synth->add_option("--proj-factor", synth_args.proj_factor, "projection coarsening factor");
    synth->add_flag("--shuffle-years", synth_args.shuffle_years,
                    "permute projection years within equal-length classes");
    synth->add_option("--stations-out", synth_args.stations_out, "station list CSV");
    synth->add_option("--obs-out", synth_args.obs_out, "station observation CSV");
    synth->add_option("--n-stations", synth_args.n_stations, "number of stations");
    synth->add_option("--obs-noise", synth_args.obs_noise, "station observation noise std, C");
    synth->callback([&] { run_synth(synth_args); });

    ResampleArgs coarsen_args;
    coarsen_args.kernel = "cubic_spline";
    auto* coarsen_cmd = app.add_subcommand("coarsen", "coarsen a grid by an integer factor");
    coarsen_cmd->add_option("--in", coarsen_args.in, "input GRD1")->required();
    coarsen_cmd->add_option("--out", coarsen_args.out, "output GRD1")->required();
    coarsen_cmd->add_option("--factor", coarsen_args.factor, "coarsening factor");
    coarsen_cmd->add_option("--kernel", coarsen_args.kernel,
                            "bilinear | bicubic | cubic_spline");
    coarsen_cmd->callback([&] { run_resample(coarsen_args, ResampleDirection::Coarsen); });

    ResampleArgs refine_args;
    refine_args.kernel = "bicubic";
    auto* refine_cmd = app.add_subcommand("refine", "refine a grid by an integer factor");
    refine_cmd->add_option("--in", refine_args.in, "input GRD1")->required();
    refine_cmd->add_option("--out", refine_args.out, "output GRD1")->required();
    refine_cmd->add_option("--factor", refine_args.factor, "refinement factor");
    refine_cmd->add_option("--kernel", refine_args.kernel, "bilinear | bicubic | cubic_spline");
    refine_cmd->callback([&] { run_resample(refine_args, ResampleDirection::Refine); });

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a super-resolution model");
    train_cmd->add_option("--config", train_args.config, "training config JSON")->required();
    train_cmd->add_option("--hr", train_args.hr, "high-resolution GRD1 to build pairs from")
        ->required();
    train_cmd->add_option("--run-dir", train_args.run_dir, "output run directory")->required();
    train_cmd->callback([&] { run_train(train_args); });

    DownscaleArgs down_args;
    auto* down_cmd = app.add_subcommand("downscale", "apply a trained model to a coarse grid");
    down_cmd->add_option("--run-dir", down_args.run_dir, "training run directory")->required();
    down_cmd->add_option("--in", down_args.in, "coarse input GRD1")->required();
    down_cmd->add_option("--out", down_args.out, "downscaled output GRD1")->required();
    down_cmd->callback([&] { run_downscale(down_args); });

    IndicatorArgs ind_args;
    auto* ind_cmd = app.add_subcommand("indicators", "compute climate indicators per station");
    ind_cmd->add_option("--grid", ind_args.grid, "GRD1 to sample at station pixels");
    ind_cmd->add_option("--obs", ind_args.obs, "station observation CSV");
    ind_cmd->add_option("--stations", ind_args.stations, "station list CSV")->required();
    ind_cmd->add_option("--out", ind_args.out, "output indicator CSV")->required();
    ind_cmd->callback([&] { run_indicators(ind_args); });

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "station-based indicator RMSE per method");
    eval_cmd->add_option("--grids", eval_args.grids, "comma list of [method=]grid.grd")
        ->required();
    eval_cmd->add_option("--stations", eval_args.stations, "station list CSV")->required();
    eval_cmd->add_option("--obs", eval_args.obs, "station observation CSV")->required();
    eval_cmd->add_option("--years", eval_args.years, "evaluation years, A-B or single year")
        ->required();
    eval_cmd->add_option("--out", eval_args.out, "output report CSV")->required();
    eval_cmd->callback([&] { run_evaluate(eval_args); });

    PlotArgs plot_args;
    auto* plot_cmd = app.add_subcommand("plot", "render one day as a PPM image");
    plot_cmd->add_option("--in", plot_args.in, "input GRD1")->required();
    plot_cmd->add_option("--out", plot_args.out, "output PPM (P6)")->required();
    plot_cmd->add_option("--day", plot_args.day, "day index (default 0)");
    plot_cmd->add_option("--date", plot_args.date, "ISO date instead of --day");
    plot_cmd->callback([&] { run_plot(plot_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "downscale_lab: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "downscale_lab: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "downscale_lab: " << e.what() << "\n";
        return e.code() == ErrorCode::DivergedAtStep ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "downscale_lab: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
