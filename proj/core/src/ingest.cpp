#include "defirisk/ingest.h"

#include <cmath>
#include <map>
#include <set>

#include "csv.h"
#include "defirisk/error.h"

namespace defirisk {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kScoresHeader{"protocol_id", "name", "chain", "score", "tvl"};
const std::vector<std::string> kYieldsHeader{"date", "protocol_id", "apy"};
const std::vector<std::string> kFxHeader{"date", "rate"};

Date parse_date_at(const std::string& text, const fs::path& path, std::size_t line) {
    try {
        return parse_date(text);
    } catch (const Error& e) {
        throw Error(Errc::ParseError, csv::where(path, line) + ": invalid date '" + text + "'");
    }
}

double parse_number_at(const std::string& text, const char* field, const fs::path& path, std::size_t line) {
    auto v = csv::parse_double(text);
    if (!v || !std::isfinite(*v)) {
        throw Error(Errc::ParseError, csv::where(path, line) + ": " + field + " '" + text + "' is not a number");
    }
    return *v;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(Errc::IoError, "cannot create directory " + dir.string());
}

}  // namespace

void DataBundle::validate() const {
    for (const auto& [id, s] : panel.series) {
        if (!universe.find(id)) throw Error(Errc::UnknownProtocol, "yield series for '" + id + "' has no score");
    }
    panel.validate();
}

double parse_apy(std::string_view text) {
    std::string t = csv::trim(text);
    bool percent = false;
    if (!t.empty() && t.back() == '%') {
        percent = true;
        t.pop_back();
    }
    auto v = csv::parse_double(csv::trim(t));
    if (!v || !std::isfinite(*v)) throw Error(Errc::ParseError, "apy '" + std::string(text) + "' is not a number");
    return percent ? *v / 100.0 : *v;
}

Universe load_scores(const fs::path& path) {
    const auto rows = csv::read(path, kScoresHeader);
    std::vector<ProtocolRecord> records;
    std::set<std::string> seen;
    for (const auto& row : rows) {
        const auto& f = row.fields;
        ProtocolRecord rec;
        rec.id = f[0];
        rec.name = f[1];
        rec.chain = f[2];
        if (rec.id.empty()) throw Error(Errc::ParseError, csv::where(path, row.line) + ": empty protocol_id");
        rec.score = parse_number_at(f[3], "score", path, row.line);
        if (!(rec.score > 0.0)) {
            throw Error(Errc::NonPositiveScore, "'" + rec.id + "' at " + csv::where(path, row.line));
        }
        if (!f[4].empty()) {
            rec.tvl = parse_number_at(f[4], "tvl", path, row.line);
            if (*rec.tvl < 0.0) throw Error(Errc::ParseError, csv::where(path, row.line) + ": negative tvl");
        }
        if (!seen.insert(rec.id).second) {
            throw Error(Errc::DuplicateId, "'" + rec.id + "' at " + csv::where(path, row.line));
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw Error(Errc::EmptyUniverse, path.string() + " has no protocol rows");
    return validate_universe(std::move(records));
}

YieldPanel load_yields(const fs::path& path, std::span<const std::string> ids) {
    const std::set<std::string> known(ids.begin(), ids.end());
    const auto rows = csv::read(path, kYieldsHeader);
    std::map<std::string, std::map<Date, double>> collected;
    for (const auto& row : rows) {
        const auto& f = row.fields;
        const Date d = parse_date_at(f[0], path, row.line);
        const std::string& id = f[1];
        if (!known.count(id)) throw Error(Errc::UnknownProtocol, "'" + id + "' at " + csv::where(path, row.line));
        double apy = 0.0;
        try {
            apy = parse_apy(f[2]);
        } catch (const Error&) {
            throw Error(Errc::ParseError, csv::where(path, row.line) + ": apy '" + f[2] + "' is not a number");
        }
        if (!(apy > -1.0)) throw Error(Errc::InvalidApy, "'" + f[2] + "' at " + csv::where(path, row.line));
        if (!collected[id].emplace(d, apy).second) {
            throw Error(Errc::DuplicateObservation,
                        "'" + id + "' on " + f[0] + " repeated at " + csv::where(path, row.line));
        }
    }
    YieldPanel panel;
    for (auto& [id, obs] : collected) {
        panel.series.emplace(id, DatedSeries(std::vector<DatedSeries::Entry>(obs.begin(), obs.end())));
    }
    return panel;
}

DatedSeries load_fx(const fs::path& path) {
    const auto rows = csv::read(path, kFxHeader);
    std::map<Date, double> obs;
    for (const auto& row : rows) {
        const Date d = parse_date_at(row.fields[0], path, row.line);
        const double rate = parse_number_at(row.fields[1], "rate", path, row.line);
        if (!(rate > 0.0)) throw Error(Errc::NonPositiveRate, "'" + row.fields[1] + "' at " + csv::where(path, row.line));
        if (!obs.emplace(d, rate).second) {
            throw Error(Errc::DuplicateObservation, row.fields[0] + " repeated at " + csv::where(path, row.line));
        }
    }
    return DatedSeries(std::vector<DatedSeries::Entry>(obs.begin(), obs.end()));
}

void write_scores(const Universe& universe, const fs::path& path) {
    std::string out = csv::join(kScoresHeader) + "\n";
    for (const auto& p : universe.protocols()) {
        out += csv::join({p.id, p.name, p.chain, csv::format_double(p.score),
                          p.tvl ? csv::format_double(*p.tvl) : std::string{}}) +
               "\n";
    }
    csv::write_file(path, out);
}

void write_yields(const YieldPanel& panel, const fs::path& path) {
    // Date-major order, ids sorted within a day.
    std::map<Date, std::vector<std::pair<std::string, double>>> by_date;
    for (const auto& [id, s] : panel.series) {
        for (const auto& [d, apy] : s.entries()) by_date[d].emplace_back(id, apy);
    }
    std::string out = csv::join(kYieldsHeader) + "\n";
    for (const auto& [d, obs] : by_date) {
        for (const auto& [id, apy] : obs) out += csv::join({format_date(d), id, csv::format_double(apy)}) + "\n";
    }
    csv::write_file(path, out);
}

void write_fx(const DatedSeries& fx, const fs::path& path) {
    std::string out = csv::join(kFxHeader) + "\n";
    for (const auto& [d, rate] : fx.entries()) out += format_date(d) + "," + csv::format_double(rate) + "\n";
    csv::write_file(path, out);
}

void write_bundle(const DataBundle& bundle, const fs::path& dir) {
    ensure_dir(dir);
    write_scores(bundle.universe, dir / kScoresFile);
    write_yields(bundle.panel, dir / kYieldsFile);
    if (bundle.panel.fx) write_fx(*bundle.panel.fx, dir / kFxFile);
}

DataBundle load_bundle(const fs::path& dir) {
    DataBundle bundle;
    bundle.universe = load_scores(dir / kScoresFile);
    const auto ids = bundle.universe.ids();
    bundle.panel = load_yields(dir / kYieldsFile, ids);
    if (fs::exists(dir / kFxFile)) bundle.panel.fx = load_fx(dir / kFxFile);
    bundle.validate();
    return bundle;
}

}  // namespace defirisk
