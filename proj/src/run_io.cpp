#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

#include "dslab/synth.hpp"
#include "dslab/training.hpp"

#include "byteio.hpp"

namespace dslab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
    fail(ErrorCode::InvalidArgument, origin + ": " + what);
}

json parse_text(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) bad(origin, "malformed JSON");
    if (!j.is_object()) bad(origin, "top-level value must be an object");
    return j;
}

/// Strict-schema guard: every key present must be in `allowed`.
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& origin) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) bad(origin, "unknown key \"" + key + "\"");
    }
}

double get_num(const json& obj, const char* key, double dflt, const std::string& origin) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number()) bad(origin, std::string("\"") + key + "\" must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int dflt, const std::string& origin) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number_integer()) bad(origin, std::string("\"") + key + "\" must be an integer");
    return obj[key].get<int>();
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t dflt,
                      const std::string& origin) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer())
        bad(origin, std::string("\"") + key + "\" must be an integer");
    return obj[key].get<std::uint64_t>();
}

std::string get_str(const json& obj, const char* key, const std::string& dflt,
                    const std::string& origin) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_string()) bad(origin, std::string("\"") + key + "\" must be a string");
    return obj[key].get<std::string>();
}

std::vector<int> get_year_list(const json& obj, const char* key, const std::string& origin) {
    if (!obj.contains(key)) return {};
    if (!obj[key].is_array()) bad(origin, std::string("\"") + key + "\" must be an array of years");
    std::vector<int> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number_integer()) bad(origin, std::string("\"") + key + "\" must hold integers");
        out.push_back(v.get<int>());
    }
    return out;
}

json model_to_json(const ModelConfig& model) {
    json j;
    if (const auto* e = std::get_if<EdsrConfig>(&model)) {
        j["kind"] = "edsr";
        j["width"] = e->width;
        j["depth"] = e->depth;
        j["factor"] = e->factor;
        j["residual_scaling"] = e->residual_scaling;
    } else {
        const auto& f = std::get<FnoConfig>(model);
        j["kind"] = "fno";
        j["layers"] = f.layers;
        j["width"] = f.width;
        j["modes1"] = f.modes1;
        j["modes2"] = f.modes2;
        j["lift_width"] = f.lift_width;
        j["proj_width"] = f.proj_width;
        j["activation"] = activation_name(f.activation);
    }
    return j;
}

ModelConfig model_from_json(const json& obj, const std::string& origin) {
    if (!obj.is_object()) bad(origin, "\"model\" must be an object");
    const std::string kind = get_str(obj, "kind", "", origin);
    if (kind == "edsr") {
        check_keys(obj, {"kind", "width", "depth", "factor", "residual_scaling"}, origin);
        EdsrConfig e;
        e.width = get_int(obj, "width", e.width, origin);
        e.depth = get_int(obj, "depth", e.depth, origin);
        e.factor = get_int(obj, "factor", e.factor, origin);
        e.residual_scaling = get_num(obj, "residual_scaling", e.residual_scaling, origin);
        return e;
    }
    if (kind == "fno") {
        check_keys(obj,
                   {"kind", "layers", "width", "modes1", "modes2", "lift_width", "proj_width",
                    "activation"},
                   origin);
        FnoConfig f;
        f.layers = get_int(obj, "layers", f.layers, origin);
        f.width = get_int(obj, "width", f.width, origin);
        f.modes1 = get_int(obj, "modes1", f.modes1, origin);
        f.modes2 = get_int(obj, "modes2", f.modes2, origin);
        f.lift_width = get_int(obj, "lift_width", f.lift_width, origin);
        f.proj_width = get_int(obj, "proj_width", f.proj_width, origin);
        f.activation = activation_from_name(get_str(obj, "activation", "gelu", origin));
        return f;
    }
    bad(origin, "model \"kind\" must be \"edsr\" or \"fno\"");
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& config, const SplitSpec& split) {
    json j;
    j["model"] = model_to_json(config.model);
    j["loss"] = loss_name(config.loss);
    j["optimizer"] = optimizer_name(config.optimizer);
    j["lr"] = config.lr;
    j["lr_min"] = config.lr_min;
    j["weight_decay"] = config.weight_decay;
    j["beta1"] = config.beta1;
    j["beta2"] = config.beta2;
    j["eps"] = config.eps;
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["patch"] = config.patch;
    j["factor"] = config.factor;
    j["kernel"] = kernel_name(config.kernel);
    j["seed"] = config.seed;
    j["split"] = {{"train_years", split.train_years},
                  {"val_years", split.val_years},
                  {"test_years", split.test_years}};
    return j.dump(2) + "\n";
}

std::pair<TrainConfig, SplitSpec> train_config_from_json_text(const std::string& text,
                                                              const std::string& origin) {
    json j = parse_text(text, origin);
    check_keys(j,
               {"model", "loss", "optimizer", "lr", "lr_min", "weight_decay", "beta1", "beta2",
                "eps", "epochs", "batch_size", "patch", "factor", "kernel", "seed", "split"},
               origin);
    if (!j.contains("model")) bad(origin, "missing \"model\"");
    TrainConfig config;
    config.model = model_from_json(j["model"], origin);
    config.loss = loss_from_name(get_str(j, "loss", "l1", origin));
    config.optimizer = optimizer_from_name(get_str(j, "optimizer", "adam", origin));
    config.lr = get_num(j, "lr", config.lr, origin);
    config.lr_min = get_num(j, "lr_min", config.lr_min, origin);
    config.weight_decay = get_num(j, "weight_decay", config.weight_decay, origin);
    config.beta1 = get_num(j, "beta1", config.beta1, origin);
    config.beta2 = get_num(j, "beta2", config.beta2, origin);
    config.eps = get_num(j, "eps", config.eps, origin);
    config.epochs = get_int(j, "epochs", config.epochs, origin);
    config.batch_size = get_int(j, "batch_size", config.batch_size, origin);
    config.patch = get_int(j, "patch", config.patch, origin);
    config.factor = get_int(j, "factor", config.factor, origin);
    config.kernel = kernel_from_name(get_str(j, "kernel", kernel_name(config.kernel), origin));
    config.seed = get_u64(j, "seed", config.seed, origin);
    if (!j.contains("split")) bad(origin, "missing \"split\"");
    const json& s = j["split"];
    if (!s.is_object()) bad(origin, "\"split\" must be an object");
    check_keys(s, {"train_years", "val_years", "test_years"}, origin);
    SplitSpec split;
    split.train_years = get_year_list(s, "train_years", origin);
    split.val_years = get_year_list(s, "val_years", origin);
    split.test_years = get_year_list(s, "test_years", origin);
    config.validate();
    split.validate();
    return {config, split};
}

std::string model_meta_to_json(const ModelMeta& meta) {
    json j;
    j["model"] = model_to_json(meta.model);
    j["standardizer"] = {{"mean", meta.stdzr.mean}, {"std", meta.stdzr.std}};
    j["factor"] = meta.factor;
    j["kernel"] = kernel_name(meta.kernel);
    return j.dump(2) + "\n";
}

ModelMeta model_meta_from_json_text(const std::string& text, const std::string& origin) {
    json j = parse_text(text, origin);
    check_keys(j, {"model", "standardizer", "factor", "kernel"}, origin);
    if (!j.contains("model")) bad(origin, "missing \"model\"");
    if (!j.contains("standardizer")) bad(origin, "missing \"standardizer\"");
    ModelMeta meta;
    meta.model = model_from_json(j["model"], origin);
    const json& s = j["standardizer"];
    if (!s.is_object()) bad(origin, "\"standardizer\" must be an object");
    check_keys(s, {"mean", "std"}, origin);
    meta.stdzr.mean = get_num(s, "mean", 0.0, origin);
    meta.stdzr.std = get_num(s, "std", 1.0, origin);
    if (!(meta.stdzr.std > 0.0)) bad(origin, "standardizer std must be positive");
    meta.factor = get_int(j, "factor", meta.factor, origin);
    if (meta.factor < 1) bad(origin, "\"factor\" must be at least 1");
    meta.kernel = kernel_from_name(get_str(j, "kernel", kernel_name(meta.kernel), origin));
    return meta;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["height"] = cfg.height;
    j["width"] = cfg.width;
    j["years"] = cfg.years;
    j["start_year"] = cfg.start_year;
    j["mean_c"] = cfg.mean_c;
    j["amplitude_c"] = cfg.amplitude_c;
    j["peak_doy"] = cfg.peak_doy;
    j["lapse_amplitude_c"] = cfg.lapse_amplitude_c;
    j["noise_std_c"] = cfg.noise_std_c;
    j["noise_corr_len"] = cfg.noise_corr_len;
    j["bias_c"] = cfg.bias_c;
    return j.dump(2) + "\n";
}

SynthConfig synth_config_from_json_text(const std::string& text, const std::string& origin) {
    json j = parse_text(text, origin);
    check_keys(j,
               {"seed", "height", "width", "years", "start_year", "mean_c", "amplitude_c",
                "peak_doy", "lapse_amplitude_c", "noise_std_c", "noise_corr_len", "bias_c"},
               origin);
    SynthConfig cfg;
    cfg.seed = get_u64(j, "seed", cfg.seed, origin);
    cfg.height = get_int(j, "height", cfg.height, origin);
    cfg.width = get_int(j, "width", cfg.width, origin);
    cfg.years = get_int(j, "years", cfg.years, origin);
    cfg.start_year = get_int(j, "start_year", cfg.start_year, origin);
    cfg.mean_c = get_num(j, "mean_c", cfg.mean_c, origin);
    cfg.amplitude_c = get_num(j, "amplitude_c", cfg.amplitude_c, origin);
    cfg.peak_doy = get_int(j, "peak_doy", cfg.peak_doy, origin);
    cfg.lapse_amplitude_c = get_num(j, "lapse_amplitude_c", cfg.lapse_amplitude_c, origin);
    cfg.noise_std_c = get_num(j, "noise_std_c", cfg.noise_std_c, origin);
    cfg.noise_corr_len = get_num(j, "noise_corr_len", cfg.noise_corr_len, origin);
    cfg.bias_c = get_num(j, "bias_c", cfg.bias_c, origin);
    cfg.validate();
    return cfg;
}

void write_run_dir(const std::string& dir, const TrainConfig& config, const SplitSpec& split,
                   const Standardizer& stdzr, const TrainReport& report, const ModelParams& best) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create run directory " + dir);
    const std::filesystem::path base(dir);

    byteio::spill((base / "config.json").string(), train_config_to_json(config, split));

    std::string csv = "epoch,train_loss,val_rmse,lr\n";
    for (const auto& e : report.epochs) {
        csv += std::to_string(e.epoch);
        csv += ',';
        csv += format_g17(e.train_loss);
        csv += ',';
        csv += format_g17(e.val_rmse);
        csv += ',';
        csv += format_g17(e.lr);
        csv += '\n';
    }
    byteio::spill((base / "metrics.csv").string(), csv);

    save_params(best, (base / "best.prm").string());

    ModelMeta meta{config.model, stdzr, config.factor, config.kernel};
    byteio::spill((base / "model_meta.json").string(), model_meta_to_json(meta));
}

}  // namespace dslab
