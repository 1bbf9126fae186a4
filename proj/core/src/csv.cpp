#include "csv.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "defirisk/error.h"

namespace defirisk::csv {

namespace {

std::vector<std::string> split_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;  // quoted fields keep their inner whitespace
    auto flush = [&] {
        out.push_back(was_quoted ? cur : trim(cur));
        cur.clear();
        was_quoted = false;
    };
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && !was_quoted && trim(cur).empty()) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            flush();
        } else if (was_quoted) {
            if (c != ' ' && c != '\t' && c != '\r') {
                throw Error(Errc::ParseError, where(path, lineno) + ": text after closing quote");
            }
        } else {
            cur += c;
        }
    }
    if (quoted) throw Error(Errc::ParseError, where(path, lineno) + ": unterminated quoted field");
    flush();
    return out;
}

}  // namespace

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::vector<Row> read(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_line(line, path, lineno);
        if (!have_header) {
            if (fields != expected_header) {
                throw Error(Errc::ParseError, where(path, lineno) + ": expected header '" + join(expected_header) + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != expected_header.size()) {
            throw Error(Errc::ParseError, where(path, lineno) + ": expected " + std::to_string(expected_header.size()) +
                                              " fields, got " + std::to_string(fields.size()));
        }
        rows.push_back(Row{lineno, std::move(fields)});
    }
    if (in.bad()) throw Error(Errc::IoError, "read failed on " + path.string());
    if (!have_header) throw Error(Errc::ParseError, path.string() + ": missing header");
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos && trim(field) == field) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
        out << content;
        out.flush();
        if (!out) throw Error(Errc::IoError, "write failed on " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot write " + path.string());
    }
}

}  // namespace defirisk::csv
