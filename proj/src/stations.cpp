#include "dslab/stations.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dslab {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

double parse_real(const std::string& text, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        fail(ErrorCode::MalformedRow,
             path + ":" + std::to_string(line_no) + ": expected a number, got '" + text + "'");
    return v;
}

}  // namespace

void StationSet::add(Station station) {
    if (index_.count(station.id))
        fail(ErrorCode::DuplicateStationId, "station id '" + station.id + "' already present");
    index_[station.id] = stations_.size();
    stations_.push_back(std::move(station));
}

std::size_t StationSet::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorCode::UnknownStation, "no station with id '" + id + "'");
    return it->second;
}

StationSet read_stations(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    StationSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "id,x,y")
                fail(ErrorCode::MalformedRow,
                     path + ":1: expected header 'id,x,y', got '" + line + "'");
            continue;
        }
        const auto fields = split_csv_row(line);
        if (fields.size() != 3)
            fail(ErrorCode::MalformedRow, path + ":" + std::to_string(line_no) + ": expected 3 fields, got " +
                                              std::to_string(fields.size()));
        if (fields[0].empty())
            fail(ErrorCode::MalformedRow, path + ":" + std::to_string(line_no) + ": empty station id");
        Station st;
        st.id = fields[0];
        st.x = parse_real(fields[1], path, line_no);
        st.y = parse_real(fields[2], path, line_no);
        if (!std::isfinite(st.x) || !std::isfinite(st.y))
            fail(ErrorCode::MalformedRow,
                 path + ":" + std::to_string(line_no) + ": non-finite coordinates");
        set.add(std::move(st));
    }
    return set;
}

void read_observations(const std::string& path, StationSet& set) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "station_id,date,value_c")
                fail(ErrorCode::MalformedRow,
                     path + ":1: expected header 'station_id,date,value_c', got '" + line + "'");
            continue;
        }
        const auto fields = split_csv_row(line);
        if (fields.size() != 3)
            fail(ErrorCode::MalformedRow, path + ":" + std::to_string(line_no) + ": expected 3 fields, got " +
                                              std::to_string(fields.size()));
        const std::size_t idx = set.index_of(fields[0]);
        Date date(1970, 1, 1);
        try {
            date = Date::parse(fields[1]);
        } catch (const Error&) {
            fail(ErrorCode::MalformedRow,
                 path + ":" + std::to_string(line_no) + ": bad date '" + fields[1] + "'");
        }
        const double value = parse_real(fields[2], path, line_no);
        set.at(idx).observations[date.epoch_days()] = value;
    }
}

void write_stations(const StationSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "id,x,y\n";
    char buf[64];
    for (const Station& st : set.stations()) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", st.x, st.y);
        out << st.id << ',' << buf << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

void write_observations(const StationSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "station_id,date,value_c\n";
    char buf[32];
    for (const Station& st : set.stations()) {
        for (const auto& [day, value] : st.observations) {
            std::snprintf(buf, sizeof(buf), "%.9g", value);
            out << st.id << ',' << Date::from_epoch_days(day).to_string() << ',' << buf << '\n';
        }
    }
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

}  // namespace dslab
