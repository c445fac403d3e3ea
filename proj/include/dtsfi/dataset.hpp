#pragma once

// Observed cumulative forwarding series and their CSV form.
//
// Grammar (UTF-8, LF newlines):
//   file    := { comment } [ header ] { row }
//   comment := "#" key ":" value       keys: info_id, post_time, note
//   header  := "elapsed_hours,cumulative_count"
//   row     := time "," count
//   time    := number | number "min" | number "h" | "Around " number "h"
// Minutes are converted to fractional hours. An "Around" prefix marks the row
// as approximate.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dtsfi/error.hpp"

namespace dtsfi {

struct Observation {
    double elapsed_hours = 0.0;
    double count = 0.0;
    bool approximate = false;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct ForwardingDataset {
    std::string info_id;
    std::string post_time;
    std::vector<Observation> observations;
    std::string provenance;

    bool empty() const { return observations.empty(); }
    std::size_t size() const { return observations.size(); }
    const Observation& front() const { return observations.front(); }
    const Observation& back() const { return observations.back(); }

    std::vector<double> times() const {
        std::vector<double> out;
        out.reserve(observations.size());
        for (const auto& o : observations) out.push_back(o.elapsed_hours);
        return out;
    }

    std::vector<double> counts() const {
        std::vector<double> out;
        out.reserve(observations.size());
        for (const auto& o : observations) out.push_back(o.count);
        return out;
    }

    /// Observation times shifted so the first row sits at zero.
    std::vector<double> times_since_first() const {
        std::vector<double> out = times();
        if (!out.empty()) {
            const double origin = out.front();
            for (double& t : out) t -= origin;
        }
        return out;
    }

    void validate() const {
        if (observations.empty()) throw ValidationError("dataset '" + info_id + "' has no observations");
        for (std::size_t i = 0; i < observations.size(); ++i) {
            const auto& o = observations[i];
            const std::string row = "dataset '" + info_id + "' row " + std::to_string(i + 1);
            if (!std::isfinite(o.elapsed_hours)) throw ValidationError(row + ": non-finite time");
            if (!(o.count >= 0.0) || o.count != std::floor(o.count))
                throw ValidationError(row + ": count must be a nonnegative integer");
            if (i == 0) continue;
            const auto& prev = observations[i - 1];
            if (o.elapsed_hours == prev.elapsed_hours) throw ValidationError(row + ": duplicate time");
            if (o.elapsed_hours < prev.elapsed_hours) throw ValidationError(row + ": time goes backwards");
            if (o.count < prev.count) throw ValidationError(row + ": cumulative count decreases");
        }
    }

    friend bool operator==(const ForwardingDataset&, const ForwardingDataset&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, const std::string& where) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ValidationError(where + ": cannot parse number '" + std::string(text) + "'");
    return value;
}

struct ParsedTime {
    double hours;
    bool approximate;
};

inline ParsedTime parse_time(std::string_view text, const std::string& where) {
    text = trim(text);
    bool approximate = false;
    if (text.starts_with("Around")) {
        approximate = true;
        text = trim(text.substr(6));
    }
    if (text.ends_with("min")) return {parse_number(text.substr(0, text.size() - 3), where) / 60.0, approximate};
    if (text.ends_with("h")) return {parse_number(text.substr(0, text.size() - 1), where), approximate};
    if (approximate) throw ValidationError(where + ": 'Around' must be followed by a labelled time (h or min)");
    return {parse_number(text, where), false};
}

inline std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

} // namespace detail

inline ForwardingDataset parse_dataset(std::istream& in, std::string info_id = {}) {
    ForwardingDataset ds;
    ds.info_id = std::move(info_id);
    std::string line;
    std::size_t line_no = 0;
    bool seen_row = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "line " + std::to_string(line_no);
        const std::string_view text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const std::string_view body = detail::trim(text.substr(1));
            const auto colon = body.find(':');
            if (colon == std::string_view::npos) continue;
            const std::string_view key = detail::trim(body.substr(0, colon));
            const std::string value(detail::trim(body.substr(colon + 1)));
            if (key == "info_id") ds.info_id = value;
            else if (key == "post_time") ds.post_time = value;
            else if (key == "note") ds.provenance = ds.provenance.empty() ? value : ds.provenance + "\n" + value;
            continue;
        }
        if (!seen_row && text.starts_with("elapsed_hours")) continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
            throw ValidationError(where + ": expected two comma-separated fields");
        const auto time = detail::parse_time(text.substr(0, comma), where);
        ds.observations.push_back({time.hours, detail::parse_number(text.substr(comma + 1), where), time.approximate});
        seen_row = true;
    }
    ds.validate();
    return ds;
}

inline ForwardingDataset parse_dataset(std::string_view text, std::string info_id = {}) {
    std::istringstream in{std::string(text)};
    return parse_dataset(in, std::move(info_id));
}

/// Inverse of parse_dataset. Approximate rows keep their "Around" label.
inline void write_dataset(std::ostream& out, const ForwardingDataset& ds) {
    if (!ds.info_id.empty()) out << "# info_id: " << ds.info_id << '\n';
    if (!ds.post_time.empty()) out << "# post_time: " << ds.post_time << '\n';
    std::istringstream notes(ds.provenance);
    for (std::string note; std::getline(notes, note);) out << "# note: " << note << '\n';
    out << "elapsed_hours,cumulative_count\n";
    for (const auto& o : ds.observations) {
        if (o.approximate) out << "Around " << detail::format_number(o.elapsed_hours) << 'h';
        else out << detail::format_number(o.elapsed_hours);
        out << ',' << detail::format_number(o.count) << '\n';
    }
}

inline std::string to_csv(const ForwardingDataset& ds) {
    std::ostringstream out;
    write_dataset(out, ds);
    return out.str();
}

} // namespace dtsfi
