#pragma once

// Minimal CSV reading/writing for the small fixed-layout files used here.
// Numbers are written with shortest round-trip formatting (std::to_chars).

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "cmcds/errors.hpp"

namespace cmcds::csv {

inline std::vector<std::string> splitLine(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parseDouble(const std::string& field, const std::string& file, std::size_t line) {
    const std::string t = trim(field);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ParseError(file, line, "expected a number, got '" + field + "'");
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lineNumbers; // source line of each row

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<int>(i);
        return -1;
    }
};

inline Table readFile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open file: " + path);
    Table t;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (trim(line).empty()) continue;
        auto fields = splitLine(line);
        if (t.header.empty()) {
            t.header = fields;
        } else {
            if (fields.size() != t.header.size())
                throw ParseError(path, lineNo, "expected " + std::to_string(t.header.size()) +
                                               " fields, got " + std::to_string(fields.size()));
            t.rows.push_back(std::move(fields));
            t.lineNumbers.push_back(lineNo);
        }
    }
    if (t.header.empty())
        throw ValidationError("empty file: " + path);
    return t;
}

/// Shortest representation that round-trips through double.
inline std::string formatDouble(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_)
            throw ValidationError("cannot open file for writing: " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n'; // LF endings
    }

    const std::string& path() const { return path_; }

private:
    std::ofstream out_;
    std::string path_;
};

} // namespace cmcds::csv
