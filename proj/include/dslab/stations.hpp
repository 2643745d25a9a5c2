#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dslab/date.hpp"
#include "dslab/error.hpp"

namespace dslab {

/// One weather station: planar location plus a possibly sparse daily record.
/// Observations are keyed by epoch day; absent keys mean missing.
struct Station {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    std::map<std::int64_t, double> observations;

    bool has_observation(const Date& d) const { return observations.count(d.epoch_days()) > 0; }
};

/// Ordered station list; the order is the canonical evaluation order.
class StationSet {
public:
    void add(Station station);

    std::size_t size() const { return stations_.size(); }
    const Station& at(std::size_t i) const { return stations_[i]; }
    Station& at(std::size_t i) { return stations_[i]; }
    const std::vector<Station>& stations() const { return stations_; }

    /// Index of the station with `id`; throws UnknownStation when absent.
    std::size_t index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) > 0; }

private:
    std::vector<Station> stations_;
    std::map<std::string, std::size_t> index_;
};

/// Stations CSV, header "id,x,y". Order in the file is preserved.
StationSet read_stations(const std::string& path);

/// Observations CSV, header "station_id,date,value_c", ISO-8601 dates.
/// Rows referencing unknown station ids are rejected (UnknownStation).
void read_observations(const std::string& path, StationSet& set);

void write_stations(const StationSet& set, const std::string& path);
void write_observations(const StationSet& set, const std::string& path);

}  // namespace dslab
