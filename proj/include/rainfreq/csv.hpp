#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rainfreq/errors.hpp"

namespace rainfreq {

/// A parsed delimited file: '#' metadata/comment lines, one header row,
/// then data rows. No quoting; none of the project formats need it.
struct CsvTable {
    std::vector<std::string> comments; ///< leading '#' lines, verbatim
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw input_error("csv: missing required column '" + name + "'");
    }
    bool has_column(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

namespace csv_detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace csv_detail

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(csv_detail::trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline CsvTable read_csv(std::istream& in, const std::string& name = "<stream>") {
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const std::string trimmed = csv_detail::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            if (!have_header) t.comments.push_back(trimmed);
            continue;
        }
        if (!have_header) {
            t.header = split_csv_line(trimmed);
            have_header = true;
        } else {
            t.rows.push_back(split_csv_line(trimmed));
        }
    }
    if (!have_header) throw input_error("csv: no header row in " + name);
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file: " + path);
    return read_csv(in, path);
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("cannot parse number '" + s + "' in " + context);
    }
}

inline int parse_int(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("cannot parse integer '" + s + "' in " + context);
    }
}

} // namespace rainfreq
