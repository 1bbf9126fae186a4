#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "defirisk/backtest.h"

namespace defirisk {

/// A value keyed by the last day of its calendar month, or by the last
/// ledger date for a trailing partial month.
struct MonthlyValue {
    Date month_end;
    double value = 0.0;

    bool operator==(const MonthlyValue&) const = default;
};

struct MonthlyRow {
    Date month_end;
    double perf = 0.0;
    double avg_risk = 0.0;
    double ratio = 0.0;

    bool operator==(const MonthlyRow&) const = default;
};

struct MonthlyReport {
    std::string method;
    std::vector<MonthlyRow> rows;

    bool operator==(const MonthlyReport&) const = default;
};

/// Compounded return per month: prod(1 + r_t) - 1. Throws EmptyLedger.
std::vector<MonthlyValue> monthly_performance(const BacktestLedger& ledger);

/// Arithmetic mean of the daily portfolio risk per month. Throws EmptyLedger.
std::vector<MonthlyValue> monthly_avg_risk(const BacktestLedger& ledger);

/// Pairs perf and risk month by month; ratio = perf / avg_risk.
/// Throws MonthMisalignment or ZeroRisk.
MonthlyReport perf_risk_ratio(std::span<const MonthlyValue> perf, std::span<const MonthlyValue> risk);

MonthlyReport monthly_report(const BacktestLedger& ledger);

// Ledger CSV: date,active_ids,weights,daily_return,value_stable,value_usd,portfolio_risk
// where active_ids is "a;b" and weights is "a=0.5;b=0.5".
std::string ledger_file_name(Method method);
void write_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path);
/// The initial value is recovered from the first row.
BacktestLedger read_ledger_csv(const std::filesystem::path& path, Method method);
/// Every ledger_<method>.csv in `dir`, ordered by method name.
std::vector<BacktestLedger> load_ledgers(const std::filesystem::path& dir);

std::string render_comparison_csv(const ComparisonTable& table);
std::string render_monthly_csv(std::span<const MonthlyReport> reports);
std::string render_monthly_json(std::span<const MonthlyReport> reports);
/// Human-readable performance, average risk and perf/risk tables with
/// percent/4-decimal display rounding. Throws MonthMisalignment when the
/// reports do not share months.
std::string render_monthly_tables(std::span<const MonthlyReport> reports);
/// Date-indexed value, risk and weight series per method.
std::string render_plot_json(std::span<const BacktestLedger> ledgers);

/// Writes ledger_<method>.csv per ledger, comparison.csv,
/// monthly_report.csv and plot_data.json into `out_dir`. Output bytes
/// depend only on the inputs. Throws EmptyLedger or IoError.
std::vector<std::filesystem::path> emit_outputs(std::span<const BacktestLedger> ledgers,
                                                std::span<const MonthlyReport> reports,
                                                const std::filesystem::path& out_dir);

}  // namespace defirisk
