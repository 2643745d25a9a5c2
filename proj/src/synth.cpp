#include "dslab/synth.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "dslab/resample.hpp"
#include "dslab/rng.hpp"

namespace dslab {

namespace {

// Sub-seed streams of the master seed. Day noise gets one stream per day
// so days can be generated independently.
constexpr std::uint64_t kStreamLapse = 0;
constexpr std::uint64_t kStreamStations = 1;
constexpr std::uint64_t kStreamStationNoise = 2;
constexpr std::uint64_t kStreamYearShuffle = 3;
constexpr std::uint64_t kStreamDayNoiseBase = 1000;

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kTropicalYear = 365.2425;

// Plane-wave pseudo-topography. Frequency bands (cycles per domain) are
// chosen so part of the spatial structure survives moderate coarsening
// attenuated rather than aliased: super-resolution then has something
// real to recover.
std::vector<double> make_lapse(const SynthConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, kStreamLapse));
    struct Component {
        double fr, fc, phase, amp;
    };
    struct Band {
        int lo, hi;
        double weight;
    };
    static const Band bands[3] = {{1, 2, 0.5}, {3, 5, 0.3}, {6, 7, 0.2}};
    std::vector<Component> comps;
    for (const Band& band : bands)
        for (int k = 0; k < 4; ++k) {
            Component c;
            c.fr = double(band.lo + std::int64_t(rng.below(std::uint64_t(band.hi - band.lo + 1))));
            c.fc = double(band.lo + std::int64_t(rng.below(std::uint64_t(band.hi - band.lo + 1))));
            if (rng.uniform() < 0.5) c.fc = -c.fc;
            c.phase = rng.uniform(0.0, kTwoPi);
            c.amp = cfg.lapse_amplitude_c * band.weight * rng.uniform(0.5, 1.0) / 4.0;
            comps.push_back(c);
        }
    std::vector<double> field(std::size_t(cfg.height) * cfg.width, 0.0);
    for (int r = 0; r < cfg.height; ++r)
        for (int c = 0; c < cfg.width; ++c) {
            double v = 0.0;
            for (const Component& comp : comps)
                v += comp.amp * std::cos(kTwoPi * (comp.fr * r / cfg.height +
                                                   comp.fc * c / cfg.width) +
                                         comp.phase);
            field[std::size_t(r) * cfg.width + c] = v;
        }
    return field;
}

// Separable Gaussian blur with edge replication; kernel normalized to 1.
void gaussian_smooth(std::vector<double>& field, int height, int width, double len) {
    if (len <= 0.0) return;
    const int radius = int(std::ceil(3.0 * len));
    std::vector<double> kernel(std::size_t(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[std::size_t(i + radius)] = std::exp(-0.5 * (double(i) / len) * (double(i) / len));
        total += kernel[std::size_t(i + radius)];
    }
    for (double& k : kernel) k /= total;

    std::vector<double> tmp(field.size());
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int cc = std::min(std::max(c + i, 0), width - 1);
                acc += kernel[std::size_t(i + radius)] * field[std::size_t(r) * width + cc];
            }
            tmp[std::size_t(r) * width + c] = acc;
        }
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int rr = std::min(std::max(r + i, 0), height - 1);
                acc += kernel[std::size_t(i + radius)] * tmp[std::size_t(rr) * width + c];
            }
            field[std::size_t(r) * width + c] = acc;
        }
}

}  // namespace

void SynthConfig::validate() const {
    if (height < 1 || width < 1) fail(ErrorCode::InvalidArgument, "synth grid must be nonempty");
    if (years < 2) fail(ErrorCode::InvalidArgument, "synth needs at least 2 years");
    if (peak_doy < 1 || peak_doy > 366)
        fail(ErrorCode::InvalidArgument, "peak_doy must be in [1, 366]");
    if (!(std::isfinite(mean_c) && std::isfinite(amplitude_c) && std::isfinite(lapse_amplitude_c) &&
          std::isfinite(noise_std_c) && std::isfinite(bias_c)))
        fail(ErrorCode::InvalidArgument, "synth parameters must be finite");
    if (noise_std_c < 0.0 || noise_corr_len < 0.0 || amplitude_c < 0.0)
        fail(ErrorCode::InvalidArgument, "synth noise/amplitude parameters must be >= 0");
}

DailyGridSeries synth_hr(const SynthConfig& cfg) {
    cfg.validate();
    int total_days = 0;
    for (int k = 0; k < cfg.years; ++k) total_days += days_in_year(cfg.start_year + k);
    const Date start(cfg.start_year, 1, 1);
    const std::size_t plane = std::size_t(cfg.height) * cfg.width;

    const std::vector<double> lapse = make_lapse(cfg);
    std::vector<double> values(std::size_t(total_days) * plane);
    std::vector<double> noise(plane);
    for (int d = 0; d < total_days; ++d) {
        const Date date = start.plus_days(d);
        const double season =
            cfg.amplitude_c *
            std::cos(kTwoPi * (date.day_of_year() - cfg.peak_doy) / kTropicalYear);
        const double base = cfg.mean_c + season;
        double* day = values.data() + std::size_t(d) * plane;
        if (cfg.noise_std_c > 0.0) {
            Rng rng(derive_seed(cfg.seed, kStreamDayNoiseBase + std::uint64_t(d)));
            for (double& n : noise) n = cfg.noise_std_c * rng.normal();
            gaussian_smooth(noise, cfg.height, cfg.width, cfg.noise_corr_len);
            for (std::size_t i = 0; i < plane; ++i) day[i] = base + lapse[i] + noise[i];
        } else {
            for (std::size_t i = 0; i < plane; ++i) day[i] = base + lapse[i];
        }
    }
    return DailyGridSeries(std::move(values), total_days, cfg.height, cfg.width, start,
                           GeoTransform(0.0, double(cfg.height), 1.0, 1.0));
}

DailyGridSeries synth_projection(const DailyGridSeries& hr, int factor, double bias,
                                 bool shuffle_years, std::uint64_t seed) {
    ResamplePlan plan;
    plan.kind = KernelKind::CubicBSpline;
    plan.factor = factor;
    plan.direction = ResampleDirection::Coarsen;
    DailyGridSeries coarse = coarsen(hr, plan);
    if (bias != 0.0)
        for (double& v : coarse.values()) v += bias;
    if (!shuffle_years) return coarse;

    // Year blocks, grouped by length so a permutation maps every calendar
    // slot to a block of identical length.
    struct Block {
        int start_day, length;
    };
    std::vector<Block> blocks;
    int year = coarse.start_date().year();
    if (coarse.start_date() != Date(year, 1, 1))
        fail(ErrorCode::InvalidArgument, "year shuffle requires a Jan 1 start");
    int offset = 0;
    while (offset < coarse.days()) {
        const int len = days_in_year(year);
        if (offset + len > coarse.days())
            fail(ErrorCode::InvalidArgument, "year shuffle requires whole years");
        blocks.push_back({offset, len});
        offset += len;
        ++year;
    }
    Rng rng(derive_seed(seed, kStreamYearShuffle));
    std::vector<double> shuffled(coarse.values().size());
    const std::size_t plane = std::size_t(coarse.height()) * coarse.width();
    for (int length : {365, 366}) {
        std::vector<int> members;
        for (int b = 0; b < int(blocks.size()); ++b)
            if (blocks[std::size_t(b)].length == length) members.push_back(b);
        std::vector<int> perm = members;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < members.size(); ++i) {
            const Block& dst = blocks[std::size_t(members[i])];
            const Block& src = blocks[std::size_t(perm[i])];
            std::copy(coarse.values().begin() + std::int64_t(src.start_day) * std::int64_t(plane),
                      coarse.values().begin() +
                          std::int64_t(src.start_day + src.length) * std::int64_t(plane),
                      shuffled.begin() + std::int64_t(dst.start_day) * std::int64_t(plane));
        }
    }
    return DailyGridSeries(std::move(shuffled), coarse.days(), coarse.height(), coarse.width(),
                           coarse.start_date(), coarse.transform());
}

StationSet synth_stations(const DailyGridSeries& hr, int count, std::uint64_t seed,
                          double noise_std) {
    const std::int64_t cells = std::int64_t(hr.height()) * hr.width();
    if (count < 1 || count > cells)
        fail(ErrorCode::CountTooLarge, "station count " + std::to_string(count) +
                                           " outside [1, " + std::to_string(cells) + "]");
    Rng place(derive_seed(seed, kStreamStations));
    std::vector<std::int64_t> cells_left(std::size_t(cells), 0);
    for (std::int64_t i = 0; i < cells; ++i) cells_left[std::size_t(i)] = i;
    // Partial Fisher-Yates: the first `count` entries become the draw.
    for (int i = 0; i < count; ++i) {
        const std::size_t j =
            std::size_t(i) + std::size_t(place.below(std::uint64_t(cells - i)));
        std::swap(cells_left[std::size_t(i)], cells_left[j]);
    }

    Rng noise(derive_seed(seed, kStreamStationNoise));
    StationSet set;
    for (int i = 0; i < count; ++i) {
        const std::int64_t cell = cells_left[std::size_t(i)];
        const int r = int(cell / hr.width());
        const int c = int(cell % hr.width());
        Station station;
        char id[16];
        std::snprintf(id, sizeof id, "st%03d", i);
        station.id = id;
        station.x = hr.transform().pixel_center_x(c);
        station.y = hr.transform().pixel_center_y(r);
        const std::int64_t start = hr.start_date().epoch_days();
        for (int t = 0; t < hr.days(); ++t) {
            double v = hr.at(t, r, c);
            if (noise_std > 0.0) v += noise_std * noise.normal();
            station.observations[start + t] = v;
        }
        set.add(std::move(station));
    }
    return set;
}

}  // namespace dslab
