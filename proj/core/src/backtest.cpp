#include "defirisk/backtest.h"

#include <cmath>

#include "defirisk/error.h"
#include "defirisk/risk.h"

namespace defirisk {

const char* to_string(ApyConvention c) {
    return c == ApyConvention::Compound365 ? "compound_365" : "simple_365";
}

ApyConvention parse_apy_convention(const std::string& text) {
    if (text == "compound_365") return ApyConvention::Compound365;
    if (text == "simple_365") return ApyConvention::Simple365;
    throw Error(Errc::InvalidArgument, "unknown APY convention '" + text + "'");
}

void YieldPanel::validate() const {
    for (const auto& [id, s] : series) {
        for (const auto& [d, apy] : s.entries()) {
            if (!(apy > -1.0) || !std::isfinite(apy)) {
                throw Error(Errc::InvalidApy, id + " on " + format_date(d) + ": " + std::to_string(apy));
            }
        }
    }
    if (fx) {
        for (const auto& [d, rate] : fx->entries()) {
            if (!(rate > 0.0) || !std::isfinite(rate)) {
                throw Error(Errc::NonPositiveRate, "fx on " + format_date(d) + ": " + std::to_string(rate));
            }
        }
    }
}

double daily_rate(double apy, ApyConvention convention) {
    if (!(apy > -1.0) || !std::isfinite(apy)) throw Error(Errc::InvalidApy, std::to_string(apy));
    switch (convention) {
        case ApyConvention::Compound365: return std::expm1(std::log1p(apy) / 365.0);
        case ApyConvention::Simple365: return apy / 365.0;
    }
    throw Error(Errc::InvalidArgument, "unknown APY convention");
}

Universe active_universe(const YieldPanel& panel, const Universe& universe, Date date, int max_gap_fill_days) {
    std::vector<std::string> active;
    for (const auto& p : universe.protocols()) {
        auto it = panel.series.find(p.id);
        if (it != panel.series.end() && it->second.value_at(date, max_gap_fill_days)) active.push_back(p.id);
    }
    if (active.empty()) throw Error(Errc::NoActiveProtocols, "no protocol can be priced on " + format_date(date));
    return universe.subset(active);
}

namespace {

struct Allocation {
    WeightVector weights;
    double risk;
};

Allocation allocate_active(const BacktestConfig& config, const Universe& active) {
    auto normalized = normalize(build_risk_matrix(active));
    WeightVector w = [&] {
        switch (config.method) {
            case Method::Ew: return equal_weights(active);
            case Method::Tvl: return tvl_weights(active);
            case Method::Erc: return solve_erc(normalized, config.solver).weights;
        }
        throw Error(Errc::InvalidArgument, "unknown method");
    }();
    const double risk = portfolio_risk_report(w, normalized);
    return {std::move(w), risk};
}

}  // namespace

BacktestLedger run_backtest(const BacktestConfig& config, const Universe& universe, const YieldPanel& panel) {
    if (config.end < config.start) {
        throw Error(Errc::InvalidArgument, "start " + format_date(config.start) + " is after end " +
                                               format_date(config.end));
    }
    if (!(config.initial_value > 0.0)) throw Error(Errc::InvalidArgument, "initial value must be positive");
    if (config.max_gap_fill_days < 0) throw Error(Errc::InvalidArgument, "gap fill days must be >= 0");
    if (universe.empty()) throw Error(Errc::EmptyUniverse, "backtest needs at least one protocol");
    panel.validate();

    BacktestLedger ledger;
    ledger.method = config.method;
    ledger.initial_value = config.initial_value;

    // Scores are static, so weights only change with the active set.
    std::map<std::vector<std::string>, Allocation> cache;
    double value = config.initial_value;
    for (Date d = config.start; d <= config.end; d += std::chrono::days{1}) {
        const Universe active = active_universe(panel, universe, d, config.max_gap_fill_days);
        auto ids = active.ids();
        auto it = cache.find(ids);
        if (it == cache.end()) it = cache.emplace(ids, allocate_active(config, active)).first;
        const Allocation& alloc = it->second;

        double r = 0.0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const double apy = *panel.series.at(ids[i]).value_at(d, config.max_gap_fill_days);
            r += alloc.weights[i] * daily_rate(apy, config.apy_convention);
        }
        value *= 1.0 + r;

        std::optional<double> usd;
        if (panel.fx) {
            auto rate = panel.fx->value_at(d, config.max_gap_fill_days);
            if (!rate) throw Error(Errc::MissingFx, "no fx rate usable on " + format_date(d));
            usd = value * *rate;
        }
        ledger.rows.push_back(LedgerRow{d, std::move(ids), alloc.weights, r, value, usd, alloc.risk});
    }
    return ledger;
}

ComparisonTable compare_backtests(std::span<const BacktestLedger> ledgers) {
    if (ledgers.empty()) throw Error(Errc::EmptyLedger, "nothing to compare");
    for (const auto& l : ledgers) {
        if (l.rows.empty()) throw Error(Errc::EmptyLedger, std::string("ledger for ") + to_string(l.method));
    }
    const auto& base = ledgers.front().rows;
    for (const auto& l : ledgers) {
        bool same = l.rows.size() == base.size();
        for (std::size_t t = 0; same && t < base.size(); ++t) same = l.rows[t].date == base[t].date;
        if (!same) {
            throw Error(Errc::DateRangeMismatch,
                        std::string(to_string(l.method)) + " covers " + format_date(l.rows.front().date) + ".." +
                            format_date(l.rows.back().date) + ", expected " + format_date(base.front().date) +
                            ".." + format_date(base.back().date));
        }
    }

    ComparisonTable table;
    for (const auto& row : base) table.dates.push_back(row.date);
    for (const auto& l : ledgers) {
        table.methods.emplace_back(to_string(l.method));
        std::vector<double> value, risk;
        std::vector<std::optional<double>> usd;
        for (const auto& row : l.rows) {
            value.push_back(row.value_stable);
            usd.push_back(row.value_usd);
            risk.push_back(row.portfolio_risk);
        }
        table.value_stable.push_back(std::move(value));
        table.value_usd.push_back(std::move(usd));
        table.risk.push_back(std::move(risk));
    }
    for (std::size_t k = 1; k < ledgers.size(); ++k) {
        std::vector<double> dv(base.size()), dr(base.size());
        for (std::size_t t = 0; t < base.size(); ++t) {
            dv[t] = table.value_stable[k][t] - table.value_stable[0][t];
            dr[t] = table.risk[k][t] - table.risk[0][t];
        }
        table.value_diff.push_back(std::move(dv));
        table.risk_diff.push_back(std::move(dr));
    }
    return table;
}

}  // namespace defirisk
