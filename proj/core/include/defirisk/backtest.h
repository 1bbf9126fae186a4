#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defirisk/allocate.h"
#include "defirisk/date.h"
#include "defirisk/domain.h"

namespace defirisk {

enum class ApyConvention { Compound365, Simple365 };

const char* to_string(ApyConvention c);
/// Accepts "compound_365" or "simple_365".
ApyConvention parse_apy_convention(const std::string& text);

struct BacktestConfig {
    Date start;
    Date end;
    Method method = Method::Erc;
    double initial_value = 1.0;  // stablecoin units
    int max_gap_fill_days = 3;
    ApyConvention apy_convention = ApyConvention::Compound365;
    ErcSolverOptions solver;
};

/// Daily APY per protocol (annual fraction) plus an optional USD-per-
/// stablecoin rate series.
struct YieldPanel {
    std::map<std::string, DatedSeries> series;
    std::optional<DatedSeries> fx;

    /// Throws InvalidApy for apy <= -1 and NonPositiveRate for fx <= 0.
    void validate() const;

    bool operator==(const YieldPanel&) const = default;
};

struct LedgerRow {
    Date date;
    std::vector<std::string> active_ids;
    WeightVector weights;
    double daily_return = 0.0;
    double value_stable = 0.0;
    std::optional<double> value_usd;
    double portfolio_risk = 0.0;

    bool operator==(const LedgerRow&) const = default;
};

/// One row per day of the backtest, each row's return accrued over that day.
struct BacktestLedger {
    Method method = Method::Erc;
    double initial_value = 1.0;
    std::vector<LedgerRow> rows;

    bool operator==(const BacktestLedger&) const = default;
};

/// Converts an annual yield to a one-day rate. Throws InvalidApy for apy <= -1.
double daily_rate(double apy, ApyConvention convention);

/// Protocols with an APY observation on `date`, or a forward-fillable one
/// no more than `max_gap_fill_days` old. Throws NoActiveProtocols.
Universe active_universe(const YieldPanel& panel, const Universe& universe, Date date, int max_gap_fill_days);

/// Simulates daily rebalancing at midnight UTC over [start, end].
///
/// Each day the active set is recomputed, weights are derived over that
/// set only (ERC normalizes the active scores before solving), the day's
/// return is sum_i w_i * daily_rate(apy_i) and the stablecoin value
/// accrues. Rebalancing is frictionless. Portfolio risk is the linear
/// weighted normalized score over the active set.
BacktestLedger run_backtest(const BacktestConfig& config, const Universe& universe, const YieldPanel& panel);

/// Per-day alignment of several ledgers. Differences are taken against
/// the first ledger.
struct ComparisonTable {
    std::vector<std::string> methods;
    std::vector<Date> dates;
    std::vector<std::vector<double>> value_stable;  // [ledger][day]
    std::vector<std::vector<std::optional<double>>> value_usd;
    std::vector<std::vector<double>> risk;
    std::vector<std::vector<double>> value_diff;  // [ledger k >= 1][day]: value_k - value_0
    std::vector<std::vector<double>> risk_diff;
};

/// Throws DateRangeMismatch unless every ledger covers the same days.
ComparisonTable compare_backtests(std::span<const BacktestLedger> ledgers);

}  // namespace defirisk
