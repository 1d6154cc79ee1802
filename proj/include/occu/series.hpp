#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "occu/gm.hpp"

namespace occu {

// Whole hours since 1970-01-01T00:00 (timezone-naive local time).
using HourStamp = std::int64_t;

std::string format_timestamp(HourStamp stamp);
// Accepts YYYY-MM-DDTHH[:MM[:SS]] (a space may replace the T); minutes and
// seconds must be zero.
HourStamp parse_timestamp(const std::string& text);
// YYYY-MM-DD -> days since epoch.
std::int64_t parse_date(const std::string& text);
inline std::int64_t day_of(HourStamp stamp) { return stamp >= 0 ? stamp / 24 : (stamp - 23) / 24; }
inline int hour_of(HourStamp stamp) { return static_cast<int>(stamp - day_of(stamp) * 24); }

using HolidaySet = std::set<std::int64_t>;

// Weekends and listed holidays are non-working.
DayType classify_day(std::int64_t day, const HolidaySet& holidays);
HolidaySet load_holidays(const std::filesystem::path& path);

// Aligned hourly series. Optional columns are either empty or full length.
struct BuildingSeries {
    std::vector<HourStamp> timestamps;
    std::vector<double> load;         // kW, the metered quantity
    std::vector<double> temperature;  // degC
    std::vector<double> occupancy;    // ratio in [0,1], ground truth
    std::vector<double> lighting;     // kW per system, synthetic data only
    std::vector<double> plug;
    std::vector<double> hvac;
    std::vector<DayType> day_type;

    std::size_t size() const { return load.size(); }
    bool has_temperature() const { return !temperature.empty(); }
    bool has_occupancy() const { return !occupancy.empty(); }
    bool has_systems() const { return !lighting.empty(); }

    // Number of complete days; valid only for series that start at hour 0.
    std::size_t days() const { return size() / 24; }

    void validate() const;
    BuildingSeries slice(std::size_t begin, std::size_t end) const;
    BuildingSeries slice_days(std::size_t first_day, std::size_t count) const {
        return slice(first_day * 24, (first_day + count) * 24);
    }
    bool operator==(const BuildingSeries&) const = default;
};

// Drops leading and trailing partial days.
BuildingSeries trim_to_whole_days(const BuildingSeries& series);

// Header: timestamp,load[,temperature][,occupancy][,lighting,plug,hvac][,day_type].
// Gaps of up to 3 missing hours are interpolated with a warning; larger gaps,
// duplicates and backwards steps are rejected with the offending line.
BuildingSeries load_series_csv(const std::filesystem::path& path, const HolidaySet& holidays = {});
void write_series_csv(const std::filesystem::path& path, const BuildingSeries& series);

inline constexpr std::size_t kMaxInterpolatedGap = 3;

} // namespace occu
