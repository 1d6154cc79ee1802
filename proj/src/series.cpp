#include "occu/series.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

#include "occu/csv.hpp"
#include "occu/error.hpp"

namespace occu {

namespace {

using namespace std::chrono;

std::int64_t days_from_ymd(int y, unsigned m, unsigned d) {
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date");
    }
    return sys_days{ymd}.time_since_epoch().count();
}

} // namespace

std::string format_timestamp(HourStamp stamp) {
    const auto day = day_of(stamp);
    const year_month_day ymd{sys_days{days{day}}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00:00", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour_of(stamp));
    return buf;
}

std::int64_t parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw DataError("malformed date '" + text + "' (expected YYYY-MM-DD)");
    }
    return days_from_ymd(y, m, d);
}

HourStamp parse_timestamp(const std::string& text) {
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    int h = 0;
    int mi = 0;
    int s = 0;
    char sep = 0;
    const int n = std::sscanf(text.c_str(), "%d-%u-%u%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n < 5 || (sep != 'T' && sep != ' ')) {
        throw DataError("malformed timestamp '" + text + "'");
    }
    if (h < 0 || h > 23 || mi != 0 || s != 0) {
        throw DataError("timestamp '" + text + "' is not on the hour");
    }
    return days_from_ymd(y, mo, d) * 24 + h;
}

DayType classify_day(std::int64_t day_index, const HolidaySet& holidays) {
    const weekday wd{sys_days{days{day_index}}};
    if (wd == Saturday || wd == Sunday || holidays.contains(day_index)) {
        return DayType::non_working;
    }
    return DayType::working;
}

HolidaySet load_holidays(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    HolidaySet out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#' || line == "date") {
            continue;
        }
        out.insert(parse_date(line.substr(0, line.find(','))));
    }
    return out;
}

void BuildingSeries::validate() const {
    const std::size_t n = size();
    auto check = [n](const auto& v, const char* name) {
        if (!v.empty() && v.size() != n) {
            throw DimensionError(std::string("series column '") + name + "' is misaligned");
        }
    };
    if (timestamps.size() != n || day_type.size() != n) {
        throw DimensionError("series timestamps, day types and loads are misaligned");
    }
    check(temperature, "temperature");
    check(occupancy, "occupancy");
    check(lighting, "lighting");
    check(plug, "plug");
    check(hvac, "hvac");
    for (std::size_t i = 1; i < n; ++i) {
        if (timestamps[i] != timestamps[i - 1] + 1) {
            throw DataError("series has a gap at " + format_timestamp(timestamps[i - 1]));
        }
    }
}

BuildingSeries BuildingSeries::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) {
        throw DimensionError("slice out of range");
    }
    auto cut = [begin, end](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if (v.empty()) {
            return V{};
        }
        return V(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end));
    };
    BuildingSeries out;
    out.timestamps = cut(timestamps);
    out.load = cut(load);
    out.temperature = cut(temperature);
    out.occupancy = cut(occupancy);
    out.lighting = cut(lighting);
    out.plug = cut(plug);
    out.hvac = cut(hvac);
    out.day_type = cut(day_type);
    return out;
}

BuildingSeries trim_to_whole_days(const BuildingSeries& series) {
    std::size_t begin = 0;
    while (begin < series.size() && hour_of(series.timestamps[begin]) != 0) {
        ++begin;
    }
    std::size_t end = begin + (series.size() - begin) / 24 * 24;
    if (begin != 0 || end != series.size()) {
        spdlog::warn("dropping {} leading and {} trailing hours outside whole days", begin,
                     series.size() - end);
    }
    return series.slice(begin, end);
}

BuildingSeries load_series_csv(const std::filesystem::path& path, const HolidaySet& holidays) {
    const CsvTable table = CsvTable::read(path);
    const auto c_time = table.require_column("timestamp");
    const auto c_load = table.require_column("load");
    const auto c_temp = table.column("temperature");
    const auto c_occ = table.column("occupancy");
    const auto c_light = table.column("lighting");
    const auto c_plug = table.column("plug");
    const auto c_hvac = table.column("hvac");
    const auto c_type = table.column("day_type");
    const bool systems = c_light && c_plug && c_hvac;

    BuildingSeries s;
    std::vector<std::size_t> src_line;
    auto push_row = [&](std::size_t r) {
        s.load.push_back(table.number(r, c_load));
        if (c_temp) {
            s.temperature.push_back(table.number(r, *c_temp));
        }
        if (c_occ) {
            s.occupancy.push_back(table.number(r, *c_occ));
        }
        if (systems) {
            s.lighting.push_back(table.number(r, *c_light));
            s.plug.push_back(table.number(r, *c_plug));
            s.hvac.push_back(table.number(r, *c_hvac));
        }
    };

    for (std::size_t r = 0; r < table.rows(); ++r) {
        const std::string where = path.string() + ":" + std::to_string(table.line_of(r));
        HourStamp stamp = 0;
        try {
            stamp = parse_timestamp(table.cell(r, c_time));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!s.timestamps.empty()) {
            const HourStamp prev = s.timestamps.back();
            if (stamp == prev) {
                throw DataError(where + ": duplicated timestamp " + table.cell(r, c_time));
            }
            if (stamp < prev) {
                throw DataError(where + ": timestamp " + table.cell(r, c_time) + " goes backwards");
            }
            const auto missing = static_cast<std::size_t>(stamp - prev - 1);
            if (missing > kMaxInterpolatedGap) {
                throw DataError(where + ": gap of " + std::to_string(missing) +
                                " missing hours before " + table.cell(r, c_time));
            }
            if (missing > 0) {
                spdlog::warn("{}: interpolating {} missing hour(s) before {}", where, missing,
                             table.cell(r, c_time));
            }
            for (std::size_t g = 1; g <= missing; ++g) {
                // Placeholder rows, filled by interpolation below.
                s.timestamps.push_back(prev + static_cast<HourStamp>(g));
                src_line.push_back(0);
                s.load.push_back(std::nan(""));
                if (c_temp) s.temperature.push_back(std::nan(""));
                if (c_occ) s.occupancy.push_back(std::nan(""));
                if (systems) {
                    s.lighting.push_back(std::nan(""));
                    s.plug.push_back(std::nan(""));
                    s.hvac.push_back(std::nan(""));
                }
            }
        }
        s.timestamps.push_back(stamp);
        src_line.push_back(table.line_of(r));
        push_row(r);
    }
    if (s.timestamps.empty()) {
        throw DataError(path.string() + ": no data rows");
    }

    auto interpolate = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (src_line[i] != 0) {
                continue;
            }
            std::size_t j = i;
            while (src_line[j] == 0) {
                ++j;
            }
            const double a = v[i - 1];
            const double b = v[j];
            const double span = static_cast<double>(j - i + 1);
            for (std::size_t k = i; k < j; ++k) {
                v[k] = a + (b - a) * static_cast<double>(k - i + 1) / span;
            }
            i = j;
        }
    };
    interpolate(s.load);
    interpolate(s.temperature);
    interpolate(s.occupancy);
    interpolate(s.lighting);
    interpolate(s.plug);
    interpolate(s.hvac);

    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool bad_load = !std::isfinite(s.load[i]);
        const bool bad_temp = !s.temperature.empty() && !std::isfinite(s.temperature[i]);
        if (bad_load || bad_temp) {
            throw DataError(path.string() + ": non-finite value at " + format_timestamp(s.timestamps[i]));
        }
        s.day_type.push_back(classify_day(day_of(s.timestamps[i]), holidays));
    }
    if (c_type) {
        // An explicit day_type column wins over the calendar rule.
        std::size_t r = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (src_line[i] == 0) {
                continue;
            }
            s.day_type[i] = day_type_from_string(table.cell(r, *c_type));
            ++r;
        }
    }
    s.validate();
    return s;
}

void write_series_csv(const std::filesystem::path& path, const BuildingSeries& series) {
    series.validate();
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "timestamp,load";
    if (series.has_temperature()) out << ",temperature";
    if (series.has_occupancy()) out << ",occupancy";
    if (series.has_systems()) out << ",lighting,plug,hvac";
    out << ",day_type\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_timestamp(series.timestamps[i]) << ',' << format_number(series.load[i]);
        if (series.has_temperature()) out << ',' << format_number(series.temperature[i]);
        if (series.has_occupancy()) out << ',' << format_number(series.occupancy[i]);
        if (series.has_systems()) {
            out << ',' << format_number(series.lighting[i]) << ',' << format_number(series.plug[i])
                << ',' << format_number(series.hvac[i]);
        }
        out << ',' << to_string(series.day_type[i]) << '\n';
    }
}

} // namespace occu
