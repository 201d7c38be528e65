#ifndef TEQ_CSV_HPP
#define TEQ_CSV_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "teq/error.hpp"

namespace teq {

// Minimal RFC-4180-ish CSV reader: quoted fields, embedded commas/quotes,
// CRLF endings, UTF-8 BOM on the first line. Good enough for GTFS and the
// population files this project consumes.
class CsvReader {
public:
    explicit CsvReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw invalid_input("cannot open file: " + path);
        std::string header_line;
        do {
            if (!read_raw_line(header_line)) throw invalid_input(path + ": empty file");
            strip_bom(header_line);
        } while (!header_line.empty() && header_line[0] == '#');
        split(header_line, header_);
        for (std::size_t i = 0; i < header_.size(); ++i) {
            trim(header_[i]);
            index_[header_[i]] = i;
        }
    }

    const std::string& path() const { return path_; }
    std::size_t line_number() const { return line_no_; }
    const std::vector<std::string>& header() const { return header_; }
    bool has_column(const std::string& name) const { return index_.count(name) > 0; }

    // Reads the next record, false at EOF. Blank lines are skipped.
    bool next() {
        std::string line;
        while (read_raw_line(line)) {
            if (line.empty()) continue;
            split(line, row_);
            return true;
        }
        return false;
    }

    std::optional<std::string> get(const std::string& col) const {
        auto it = index_.find(col);
        if (it == index_.end() || it->second >= row_.size()) return std::nullopt;
        return row_[it->second];
    }

    std::string require(const std::string& col) const {
        auto v = get(col);
        if (!v || v->empty()) fail("missing value for column '" + col + "'");
        return *v;
    }

    double require_double(const std::string& col) const {
        return parse_double(require(col), col);
    }

    double parse_double(const std::string& s, const std::string& col) const {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            fail("bad number '" + s + "' in column '" + col + "'");
        return v;
    }

    long long require_int(const std::string& col) const {
        const std::string s = require(col);
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            fail("bad integer '" + s + "' in column '" + col + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw invalid_input(path_ + ":" + std::to_string(line_no_) + ": " + msg);
    }

private:
    bool read_raw_line(std::string& out) {
        out.clear();
        // A quoted field may contain newlines; keep reading until quotes balance.
        std::string part;
        bool first = true;
        while (std::getline(in_, part)) {
            ++line_no_;
            if (!part.empty() && part.back() == '\r') part.pop_back();
            if (first) { out = part; first = false; }
            else { out += '\n'; out += part; }
            if (count_quotes(out) % 2 == 0) return true;
        }
        return !first;
    }

    static std::size_t count_quotes(const std::string& s) {
        std::size_t n = 0;
        for (char c : s) if (c == '"') ++n;
        return n;
    }

    static void strip_bom(std::string& s) {
        if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF &&
            static_cast<unsigned char>(s[1]) == 0xBB &&
            static_cast<unsigned char>(s[2]) == 0xBF)
            s.erase(0, 3);
    }

    static void trim(std::string& s) {
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t b = 0;
        while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
        s.erase(0, b);
    }

    static void split(const std::string& line, std::vector<std::string>& out) {
        out.clear();
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') { field += '"'; ++i; }
                    else quoted = false;
                } else field += c;
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                out.push_back(field);
                field.clear();
            } else field += c;
        }
        out.push_back(field);
    }

    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0; // incremented per physical line; header is line 1
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> row_;
};

// Shortest round-trippable decimal representation, stable across platforms
// for a given binary. Used everywhere a double lands in an output file so
// that reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
        if (std::strtod(cand, nullptr) == v) return cand;
    }
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    bool needs = false;
    for (char c : s)
        if (c == ',' || c == '"' || c == '\n') { needs = true; break; }
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace teq

#endif
