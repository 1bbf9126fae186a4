#include "defirisk/fetch.h"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "csv.h"
#include "defirisk/error.h"

namespace defirisk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class HttplibTransport final : public HttpTransport {
public:
    std::string get(const std::string& base_url, const std::string& target, std::chrono::seconds timeout) override {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_follow_location(true);
        auto res = client.Get(target);
        if (!res) {
            throw Error(Errc::NetworkError, base_url + target + ": " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(Errc::NetworkError, base_url + target + ": HTTP " + std::to_string(res->status));
        }
        return res->body;
    }
};

std::mutex& key_mutex(const fs::path& key_path) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::mutex> registry;
    std::lock_guard lock(registry_mutex);
    return registry[key_path.string()];
}

fs::path temp_sibling(const fs::path& path) {
    static std::atomic<unsigned long> counter{0};
    auto tmp = path;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
           std::to_string(counter++);
    return tmp;
}

void atomic_write(const fs::path& path, const std::string& content) {
    const auto tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot write cache file " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(Errc::IoError, "write failed on cache file " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot move cache file into " + path.string());
    }
}

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sanitize_key(const std::string& key) {
    std::string out;
    for (char c : key) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}

std::string expand(std::string tmpl, const std::string& id, DateRange range) {
    auto replace_all = [&](const std::string& from, const std::string& to) {
        for (auto pos = tmpl.find(from); pos != std::string::npos; pos = tmpl.find(from, pos + to.size())) {
            tmpl.replace(pos, from.size(), to);
        }
    };
    replace_all("{id}", id);
    replace_all("{start}", format_date(range.start));
    replace_all("{end}", format_date(range.end));
    return tmpl;
}

json parse_payload(const std::string& payload, const std::string& source) {
    try {
        return json::parse(payload);
    } catch (const json::parse_error& e) {
        throw Error(Errc::MappingError, source + ": payload is not valid JSON (" + e.what() + ")");
    }
}

const json& records_at(const json& doc, const std::string& path, const std::string& source) {
    const json* node = &doc;
    std::string rest = path;
    while (!rest.empty()) {
        const auto dot = rest.find('.');
        const std::string part = rest.substr(0, dot);
        rest = dot == std::string::npos ? std::string{} : rest.substr(dot + 1);
        if (!node->is_object() || !node->contains(part)) {
            throw Error(Errc::MappingError, source + ": missing field '" + path + "'");
        }
        node = &(*node)[part];
    }
    if (!node->is_array()) {
        throw Error(Errc::MappingError, source + ": '" + (path.empty() ? "<root>" : path) + "' is not an array");
    }
    return *node;
}

std::string record_where(const std::string& source, std::size_t index) {
    return source + " record " + std::to_string(index);
}

const json& require_field(const json& rec, const std::string& field, const std::string& where) {
    if (!rec.is_object() || !rec.contains(field) || rec[field].is_null()) {
        throw Error(Errc::MappingError, where + ": missing field '" + field + "'");
    }
    return rec[field];
}

double as_number(const json& v, const std::string& field, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        if (auto d = csv::parse_double(csv::trim(v.get<std::string>()))) return *d;
    }
    throw Error(Errc::MappingError, where + ": field '" + field + "' is not numeric");
}

Date as_date(const json& v, const std::string& field, const std::string& where) {
    if (v.is_number_integer() || v.is_number_unsigned()) {
        // Unix seconds, floored to the UTC day.
        const auto secs = std::chrono::sys_seconds{std::chrono::seconds{v.get<std::int64_t>()}};
        return std::chrono::floor<std::chrono::days>(secs);
    }
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.size() > 10 && (s[10] == 'T' || s[10] == ' ')) s.resize(10);
        try {
            return parse_date(s);
        } catch (const Error&) {
        }
    }
    throw Error(Errc::MappingError, where + ": field '" + field + "' is not a date");
}

DatedSeries map_dated(const std::string& payload, const std::string& records_path, const std::string& date_field,
                      const std::string& value_field, double scale, DateRange range, const std::string& source) {
    const json doc = parse_payload(payload, source);
    const json& records = records_at(doc, records_path, source);
    std::vector<DatedSeries::Entry> entries;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto where = record_where(source, i);
        const Date d = as_date(require_field(records[i], date_field, where), date_field, where);
        const double v = as_number(require_field(records[i], value_field, where), value_field, where) * scale;
        if (d < range.start || range.end < d) continue;
        entries.emplace_back(d, v);
    }
    try {
        return DatedSeries::from_unsorted(std::move(entries));
    } catch (const Error& e) {
        throw Error(e.code(), source + ": " + e.what());
    }
}

template <class F>
auto with_retries(const FetchSpec& spec, F&& fn) {
    auto delay = spec.retry_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const Error& e) {
            if (e.code() != Errc::NetworkError || attempt >= spec.max_retries) throw;
        }
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
}

std::string fetch_cached(const FetchSpec& spec, HttpTransport& transport, ResponseCache& cache,
                         const std::string& resource, const std::string& key, const std::string& target) {
    if (auto hit = cache.get(resource, key)) return *hit;
    std::string body =
        with_retries(spec, [&] { return transport.get(spec.base_url, target, spec.timeout); });
    cache.put(resource, key, body);
    return body;
}

}  // namespace

std::unique_ptr<HttpTransport> make_default_transport() { return std::make_unique<HttplibTransport>(); }

ResponseCache::ResponseCache(fs::path dir, std::chrono::seconds ttl) : dir_(std::move(dir)), ttl_(ttl) {
    if (ttl_.count() < 0) throw Error(Errc::InvalidArgument, "cache ttl must be >= 0");
}

fs::path ResponseCache::payload_path(const std::string& resource, const std::string& key) const {
    return dir_ / resource / (sanitize_key(key) + ".json");
}

fs::path ResponseCache::meta_path(const std::string& resource, const std::string& key) const {
    return dir_ / resource / (sanitize_key(key) + ".meta");
}

std::optional<std::string> ResponseCache::get(const std::string& resource, const std::string& key,
                                              Clock::time_point now) const {
    std::lock_guard lock(key_mutex(payload_path(resource, key)));
    auto meta = read_file(meta_path(resource, key));
    if (!meta) return std::nullopt;
    const std::string prefix = "fetched_at=";
    const auto text = csv::trim(*meta);
    if (text.rfind(prefix, 0) != 0) return std::nullopt;
    long long fetched = 0;
    try {
        fetched = std::stoll(text.substr(prefix.size()));
    } catch (...) {
        return std::nullopt;
    }
    const auto age = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count() - fetched;
    if (age < 0 || age > ttl_.count()) return std::nullopt;
    return read_file(payload_path(resource, key));
}

void ResponseCache::put(const std::string& resource, const std::string& key, const std::string& payload,
                        Clock::time_point now) {
    const auto payload_file = payload_path(resource, key);
    std::lock_guard lock(key_mutex(payload_file));
    std::error_code ec;
    fs::create_directories(payload_file.parent_path(), ec);
    if (ec) throw Error(Errc::IoError, "cannot create cache directory " + payload_file.parent_path().string());
    // Payload first: a meta file only ever points at a complete payload.
    atomic_write(payload_file, payload);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    atomic_write(meta_path(resource, key), "fetched_at=" + std::to_string(secs) + "\n");
}

std::vector<ProtocolRecord> map_scores_payload(const std::string& payload, const FieldMapping& fields,
                                               const std::string& source) {
    const json doc = parse_payload(payload, source);
    const json& records = records_at(doc, fields.scores_records, source);
    std::vector<ProtocolRecord> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto where = record_where(source, i);
        const json& rec = records[i];
        const json& id = require_field(rec, fields.id, where);
        ProtocolRecord p;
        p.id = id.is_string() ? id.get<std::string>() : id.dump();
        p.score = as_number(require_field(rec, fields.score, where), fields.score, where);
        p.name = rec.contains(fields.name) && rec[fields.name].is_string() ? rec[fields.name].get<std::string>() : p.id;
        p.chain = rec.contains(fields.chain) && rec[fields.chain].is_string() ? rec[fields.chain].get<std::string>()
                                                                              : std::string{};
        if (rec.contains(fields.tvl) && !rec[fields.tvl].is_null()) {
            p.tvl = as_number(rec[fields.tvl], fields.tvl, where);
        }
        out.push_back(std::move(p));
    }
    return out;
}

DatedSeries map_yields_payload(const std::string& payload, const FieldMapping& fields, DateRange range,
                               const std::string& source) {
    return map_dated(payload, fields.yields_records, fields.date, fields.apy, fields.apy_scale, range, source);
}

DatedSeries map_fx_payload(const std::string& payload, const FieldMapping& fields, DateRange range,
                           const std::string& source) {
    return map_dated(payload, fields.fx_records, fields.date, fields.rate, 1.0, range, source);
}

DataBundle fetch_remote(const FetchSpec& spec, const std::vector<std::string>& ids, DateRange range,
                        HttpTransport& transport) {
    if (spec.base_url.empty()) throw Error(Errc::InvalidArgument, "fetch spec has no base_url");
    if (range.end < range.start) throw Error(Errc::InvalidArgument, "fetch date range is reversed");
    ResponseCache cache(spec.cache_dir, spec.cache_ttl);
    const std::string span_key = format_date(range.start) + "_" + format_date(range.end);

    const std::string scores_target = expand(spec.scores_path, "", range);
    const auto scores_body = fetch_cached(spec, transport, cache, "scores", "all", scores_target);
    auto records = map_scores_payload(scores_body, spec.fields, spec.base_url + scores_target);

    if (!ids.empty()) {
        std::set<std::string> wanted(ids.begin(), ids.end());
        std::set<std::string> present;
        std::vector<ProtocolRecord> kept;
        for (auto& r : records) {
            present.insert(r.id);
            if (wanted.count(r.id)) kept.push_back(std::move(r));
        }
        for (const auto& id : wanted) {
            if (!present.count(id)) throw Error(Errc::UnknownProtocol, "'" + id + "' not in " + spec.base_url + scores_target);
        }
        records = std::move(kept);
    }

    DataBundle bundle;
    bundle.universe = validate_universe(std::move(records));
    for (const auto& id : bundle.universe.ids()) {
        const std::string target = expand(spec.yields_path, id, range);
        const auto body = fetch_cached(spec, transport, cache, "yields", id + "_" + span_key, target);
        auto series = map_yields_payload(body, spec.fields, range, spec.base_url + target);
        if (!series.empty()) bundle.panel.series.emplace(id, std::move(series));
    }
    if (!spec.fx_path.empty()) {
        const std::string target = expand(spec.fx_path, "", range);
        const auto body = fetch_cached(spec, transport, cache, "fx", span_key, target);
        bundle.panel.fx = map_fx_payload(body, spec.fields, range, spec.base_url + target);
    }
    bundle.validate();
    return bundle;
}

DataBundle fetch_remote(const FetchSpec& spec, const std::vector<std::string>& ids, DateRange range) {
    auto transport = make_default_transport();
    return fetch_remote(spec, ids, range, *transport);
}

FetchConfig load_fetch_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    FetchConfig cfg;
    bool have_start = false, have_end = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (csv::trim(line).empty()) continue;
        const auto eq = line.find('=');
        const auto at = csv::where(path, lineno);
        if (eq == std::string::npos) throw Error(Errc::ParseError, at + ": expected 'key = value'");
        const std::string key = csv::trim(line.substr(0, eq));
        const std::string value = csv::trim(line.substr(eq + 1));

        auto number = [&]() -> double {
            auto v = csv::parse_double(value);
            if (!v) throw Error(Errc::ParseError, at + ": '" + key + "' expects a number");
            return *v;
        };
        auto integer = [&]() -> long long {
            const double v = number();
            if (v != std::floor(v) || v < 0) throw Error(Errc::ParseError, at + ": '" + key + "' expects a non-negative integer");
            return static_cast<long long>(v);
        };
        auto date = [&]() -> Date {
            try {
                return parse_date(value);
            } catch (const Error&) {
                throw Error(Errc::ParseError, at + ": '" + key + "' expects YYYY-MM-DD");
            }
        };

        auto& s = cfg.spec;
        auto& f = s.fields;
        static const std::map<std::string, std::string FieldMapping::*> kFieldKeys{
            {"records.scores", &FieldMapping::scores_records}, {"records.yields", &FieldMapping::yields_records},
            {"records.fx", &FieldMapping::fx_records},         {"field.id", &FieldMapping::id},
            {"field.name", &FieldMapping::name},               {"field.chain", &FieldMapping::chain},
            {"field.score", &FieldMapping::score},             {"field.tvl", &FieldMapping::tvl},
            {"field.date", &FieldMapping::date},               {"field.apy", &FieldMapping::apy},
            {"field.rate", &FieldMapping::rate},
        };
        if (auto it = kFieldKeys.find(key); it != kFieldKeys.end()) {
            f.*(it->second) = value;
        } else if (key == "base_url") {
            s.base_url = value;
        } else if (key == "scores_path") {
            s.scores_path = value;
        } else if (key == "yields_path") {
            s.yields_path = value;
        } else if (key == "fx_path") {
            s.fx_path = value;
        } else if (key == "apy_scale") {
            f.apy_scale = number();
        } else if (key == "cache_dir") {
            fs::path p = value;
            s.cache_dir = p.is_relative() ? path.parent_path() / p : p;
        } else if (key == "cache_ttl_seconds") {
            s.cache_ttl = std::chrono::seconds{integer()};
        } else if (key == "max_retries") {
            s.max_retries = static_cast<int>(integer());
        } else if (key == "retry_backoff_ms") {
            s.retry_backoff = std::chrono::milliseconds{integer()};
        } else if (key == "timeout_seconds") {
            s.timeout = std::chrono::seconds{integer()};
        } else if (key == "ids") {
            cfg.ids.clear();
            std::stringstream ss(value);
            std::string id;
            while (std::getline(ss, id, ',')) {
                if (auto t = csv::trim(id); !t.empty()) cfg.ids.push_back(t);
            }
        } else if (key == "start") {
            cfg.range.start = date();
            have_start = true;
        } else if (key == "end") {
            cfg.range.end = date();
            have_end = true;
        } else if (key == "apy_convention") {
            try {
                cfg.apy_convention = parse_apy_convention(value);
            } catch (const Error&) {
                throw Error(Errc::ParseError, at + ": unknown apy_convention '" + value + "'");
            }
        } else if (key == "gap_fill_days") {
            cfg.gap_fill_days = static_cast<int>(integer());
        } else {
            throw Error(Errc::ParseError, at + ": unknown key '" + key + "'");
        }
    }
    if (cfg.spec.base_url.empty()) throw Error(Errc::ParseError, path.string() + ": base_url is required");
    if (!have_start || !have_end) throw Error(Errc::ParseError, path.string() + ": start and end are required");
    if (cfg.range.end < cfg.range.start) throw Error(Errc::ParseError, path.string() + ": start is after end");
    return cfg;
}

}  // namespace defirisk
