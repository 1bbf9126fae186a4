#include "defirisk/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.h"
#include "defirisk/error.h"

namespace defirisk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kLedgerHeader{"date",         "active_ids",  "weights",       "daily_return",
                                             "value_stable", "value_usd", "portfolio_risk"};

void require_rows(const BacktestLedger& ledger) {
    if (ledger.rows.empty()) throw Error(Errc::EmptyLedger, std::string("ledger for ") + to_string(ledger.method));
}

// Calls fn(key, first, last) for each calendar month of rows [first, last).
template <class F>
void for_each_month(const BacktestLedger& ledger, F&& fn) {
    require_rows(ledger);
    const auto& rows = ledger.rows;
    const Date last_date = rows.back().date;
    std::size_t first = 0;
    while (first < rows.size()) {
        const Date end = month_end(rows[first].date);
        std::size_t last = first;
        while (last < rows.size() && rows[last].date <= end) ++last;
        fn(std::min(end, last_date), first, last);
        first = last;
    }
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string join_ids(const std::vector<std::string>& ids, char sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(part);
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<MonthlyValue> monthly_performance(const BacktestLedger& ledger) {
    std::vector<MonthlyValue> out;
    for_each_month(ledger, [&](Date key, std::size_t first, std::size_t last) {
        double growth = 1.0;
        for (std::size_t t = first; t < last; ++t) growth *= 1.0 + ledger.rows[t].daily_return;
        out.push_back({key, growth - 1.0});
    });
    return out;
}

std::vector<MonthlyValue> monthly_avg_risk(const BacktestLedger& ledger) {
    std::vector<MonthlyValue> out;
    for_each_month(ledger, [&](Date key, std::size_t first, std::size_t last) {
        double sum = 0.0;
        for (std::size_t t = first; t < last; ++t) sum += ledger.rows[t].portfolio_risk;
        out.push_back({key, sum / static_cast<double>(last - first)});
    });
    return out;
}

MonthlyReport perf_risk_ratio(std::span<const MonthlyValue> perf, std::span<const MonthlyValue> risk) {
    if (perf.size() != risk.size()) {
        throw Error(Errc::MonthMisalignment, std::to_string(perf.size()) + " performance months vs " +
                                                 std::to_string(risk.size()) + " risk months");
    }
    MonthlyReport report;
    for (std::size_t i = 0; i < perf.size(); ++i) {
        if (perf[i].month_end != risk[i].month_end) {
            throw Error(Errc::MonthMisalignment, format_date(perf[i].month_end) + " vs " + format_date(risk[i].month_end));
        }
        if (risk[i].value == 0.0) throw Error(Errc::ZeroRisk, "average risk is zero for " + format_date(risk[i].month_end));
        report.rows.push_back({perf[i].month_end, perf[i].value, risk[i].value, perf[i].value / risk[i].value});
    }
    return report;
}

MonthlyReport monthly_report(const BacktestLedger& ledger) {
    auto report = perf_risk_ratio(monthly_performance(ledger), monthly_avg_risk(ledger));
    report.method = to_string(ledger.method);
    return report;
}

std::string ledger_file_name(Method method) { return std::string("ledger_") + to_string(method) + ".csv"; }

void write_ledger_csv(const BacktestLedger& ledger, const fs::path& path) {
    std::string out = csv::join(kLedgerHeader) + "\n";
    for (const auto& row : ledger.rows) {
        std::string weights;
        for (std::size_t i = 0; i < row.weights.size(); ++i) {
            if (i) weights += ';';
            weights += row.weights.ids()[i] + "=" + csv::format_double(row.weights[i]);
        }
        out += csv::join({format_date(row.date), join_ids(row.active_ids, ';'), weights,
                          csv::format_double(row.daily_return), csv::format_double(row.value_stable),
                          row.value_usd ? csv::format_double(*row.value_usd) : std::string{},
                          csv::format_double(row.portfolio_risk)}) +
               "\n";
    }
    csv::write_file(path, out);
}

BacktestLedger read_ledger_csv(const fs::path& path, Method method) {
    const auto rows = csv::read(path, kLedgerHeader);
    BacktestLedger ledger;
    ledger.method = method;
    auto number = [&](const std::string& text, std::size_t line) {
        auto v = csv::parse_double(text);
        if (!v) throw Error(Errc::ParseError, csv::where(path, line) + ": '" + text + "' is not a number");
        return *v;
    };
    for (const auto& r : rows) {
        const auto& f = r.fields;
        Date d;
        try {
            d = parse_date(f[0]);
        } catch (const Error&) {
            throw Error(Errc::ParseError, csv::where(path, r.line) + ": invalid date '" + f[0] + "'");
        }
        if (!ledger.rows.empty() && !(ledger.rows.back().date < d)) {
            throw Error(Errc::ParseError, csv::where(path, r.line) + ": dates must be strictly increasing");
        }
        std::vector<std::string> ids;
        std::vector<double> values;
        for (const auto& pair : split(f[2], ';')) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) throw Error(Errc::ParseError, csv::where(path, r.line) + ": bad weight '" + pair + "'");
            ids.push_back(pair.substr(0, eq));
            values.push_back(number(pair.substr(eq + 1), r.line));
        }
        LedgerRow row{d,
                      split(f[1], ';'),
                      WeightVector(std::move(ids), std::move(values)),
                      number(f[3], r.line),
                      number(f[4], r.line),
                      f[5].empty() ? std::nullopt : std::optional<double>(number(f[5], r.line)),
                      number(f[6], r.line)};
        ledger.rows.push_back(std::move(row));
    }
    if (ledger.rows.empty()) throw Error(Errc::EmptyLedger, path.string() + " has no rows");
    ledger.initial_value = ledger.rows.front().value_stable / (1.0 + ledger.rows.front().daily_return);
    return ledger;
}

std::vector<BacktestLedger> load_ledgers(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::IoError, "not a directory: " + dir.string());
    std::vector<BacktestLedger> out;
    for (Method m : {Method::Erc, Method::Ew, Method::Tvl}) {  // method-name order
        const auto path = dir / ledger_file_name(m);
        if (fs::exists(path)) out.push_back(read_ledger_csv(path, m));
    }
    if (out.empty()) throw Error(Errc::EmptyLedger, "no ledger_<method>.csv files in " + dir.string());
    return out;
}

std::string render_comparison_csv(const ComparisonTable& table) {
    std::vector<std::string> header{"date"};
    for (const auto& m : table.methods) {
        header.push_back("value_stable_" + m);
        header.push_back("value_usd_" + m);
        header.push_back("risk_" + m);
    }
    for (std::size_t k = 1; k < table.methods.size(); ++k) {
        header.push_back("value_diff_" + table.methods[k] + "_vs_" + table.methods[0]);
        header.push_back("risk_diff_" + table.methods[k] + "_vs_" + table.methods[0]);
    }
    std::string out = csv::join(header) + "\n";
    for (std::size_t t = 0; t < table.dates.size(); ++t) {
        std::vector<std::string> row{format_date(table.dates[t])};
        for (std::size_t k = 0; k < table.methods.size(); ++k) {
            row.push_back(csv::format_double(table.value_stable[k][t]));
            row.push_back(table.value_usd[k][t] ? csv::format_double(*table.value_usd[k][t]) : std::string{});
            row.push_back(csv::format_double(table.risk[k][t]));
        }
        for (std::size_t k = 0; k + 1 < table.methods.size(); ++k) {
            row.push_back(csv::format_double(table.value_diff[k][t]));
            row.push_back(csv::format_double(table.risk_diff[k][t]));
        }
        out += csv::join(row) + "\n";
    }
    return out;
}

std::string render_monthly_csv(std::span<const MonthlyReport> reports) {
    std::string out = "method,month_end,perf,avg_risk,ratio\n";
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            out += csv::join({r.method, format_date(row.month_end), csv::format_double(row.perf),
                              csv::format_double(row.avg_risk), csv::format_double(row.ratio)}) +
                   "\n";
        }
    }
    return out;
}

std::string render_monthly_json(std::span<const MonthlyReport> reports) {
    json doc = json::object();
    for (const auto& r : reports) {
        json rows = json::array();
        for (const auto& row : r.rows) {
            rows.push_back({{"month_end", format_date(row.month_end)},
                            {"perf", row.perf},
                            {"avg_risk", row.avg_risk},
                            {"ratio", row.ratio}});
        }
        doc[r.method] = std::move(rows);
    }
    return doc.dump(2) + "\n";
}

std::string render_monthly_tables(std::span<const MonthlyReport> reports) {
    if (reports.empty()) throw Error(Errc::EmptyLedger, "no monthly reports");
    const auto& base = reports.front().rows;
    for (const auto& r : reports) {
        bool same = r.rows.size() == base.size();
        for (std::size_t i = 0; same && i < base.size(); ++i) same = r.rows[i].month_end == base[i].month_end;
        if (!same) throw Error(Errc::MonthMisalignment, r.method + " covers different months");
    }
    auto table = [&](const char* title, auto cell) {
        std::string out = std::string(title) + "\n";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-12s", "month_end");
        out += buf;
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, " %10s", r.method.c_str());
            out += buf;
        }
        out += "\n";
        for (std::size_t i = 0; i < base.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%-12s", format_date(base[i].month_end).c_str());
            out += buf;
            for (const auto& r : reports) {
                std::snprintf(buf, sizeof buf, " %10s", cell(r.rows[i]).c_str());
                out += buf;
            }
            out += "\n";
        }
        return out;
    };
    std::string out = table("Monthly performance", [](const MonthlyRow& r) { return fixed(r.perf * 100.0, 4) + "%"; });
    out += "\n" + table("Monthly average risk", [](const MonthlyRow& r) { return fixed(r.avg_risk, 4); });
    out += "\n" + table("Monthly perf/risk", [](const MonthlyRow& r) { return fixed(r.ratio, 4); });
    return out;
}

std::string render_plot_json(std::span<const BacktestLedger> ledgers) {
    json doc = json::object();
    json dates = json::array();
    if (!ledgers.empty()) {
        for (const auto& row : ledgers.front().rows) dates.push_back(format_date(row.date));
    }
    doc["dates"] = std::move(dates);
    json series = json::object();
    for (const auto& l : ledgers) {
        std::set<std::string> all_ids;
        for (const auto& row : l.rows) all_ids.insert(row.active_ids.begin(), row.active_ids.end());
        json value = json::array(), usd = json::array(), risk = json::array();
        std::map<std::string, json> weights;
        for (const auto& id : all_ids) weights[id] = json::array();
        for (const auto& row : l.rows) {
            value.push_back(row.value_stable);
            usd.push_back(optional_number(row.value_usd));
            risk.push_back(row.portfolio_risk);
            for (const auto& id : all_ids) {
                const auto& ids = row.weights.ids();
                auto it = std::find(ids.begin(), ids.end(), id);
                weights[id].push_back(it == ids.end() ? 0.0 : row.weights[static_cast<std::size_t>(it - ids.begin())]);
            }
        }
        json w = json::object();
        for (auto& [id, arr] : weights) w[id] = std::move(arr);
        series[to_string(l.method)] = {{"value_stable", std::move(value)},
                                       {"value_usd", std::move(usd)},
                                       {"risk", std::move(risk)},
                                       {"weights", std::move(w)}};
    }
    doc["series"] = std::move(series);
    return doc.dump(2) + "\n";
}

std::vector<fs::path> emit_outputs(std::span<const BacktestLedger> ledgers, std::span<const MonthlyReport> reports,
                                   const fs::path& out_dir) {
    if (ledgers.empty()) throw Error(Errc::EmptyLedger, "no ledgers to write");
    if (reports.empty()) throw Error(Errc::EmptyLedger, "no monthly report to write");
    for (const auto& l : ledgers) require_rows(l);
    for (const auto& r : reports) {
        if (r.rows.empty()) throw Error(Errc::EmptyLedger, "monthly report for " + r.method + " is empty");
    }
    const auto table = compare_backtests(ledgers);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw Error(Errc::IoError, "cannot create output directory " + out_dir.string());

    std::vector<fs::path> written;
    for (const auto& l : ledgers) {
        written.push_back(out_dir / ledger_file_name(l.method));
        write_ledger_csv(l, written.back());
    }
    written.push_back(out_dir / "comparison.csv");
    csv::write_file(written.back(), render_comparison_csv(table));
    written.push_back(out_dir / "monthly_report.csv");
    csv::write_file(written.back(), render_monthly_csv(reports));
    written.push_back(out_dir / "plot_data.json");
    csv::write_file(written.back(), render_plot_json(ledgers));
    return written;
}

}  // namespace defirisk
