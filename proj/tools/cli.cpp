#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "defirisk/defirisk.h"

namespace defirisk::cli {

namespace {

struct AllocateArgs {
    std::string scores;
    std::string method;
    double tolerance = ErcSolverOptions{}.tolerance;
    int max_iter = ErcSolverOptions{}.max_iterations;
    bool json = false;
};

struct BacktestArgs {
    std::string scores;
    std::string yields;
    std::string fx;
    std::string methods;
    std::string start;
    std::string end;
    std::string apy_convention = "compound_365";
    int gap_fill = 3;
    double initial_value = 1.0;
    std::string out;
};

struct ReportArgs {
    std::string ledger_dir;
    std::string format = "csv";
};

struct FetchArgs {
    std::string config;
    std::string out;
};

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> methods;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const Method m = parse_method(item);
        if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
            throw Error(Errc::InvalidArgument, "method '" + item + "' listed twice");
        }
        methods.push_back(m);
    }
    if (methods.empty()) throw Error(Errc::InvalidArgument, "no method given");
    std::sort(methods.begin(), methods.end(),
              [](Method a, Method b) { return std::string(to_string(a)) < std::string(to_string(b)); });
    return methods;
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

int cmd_allocate(const AllocateArgs& a, std::ostream& out) {
    const Universe universe = load_scores(a.scores);
    const Method method = parse_method(a.method);
    ErcSolverOptions opts;
    opts.tolerance = a.tolerance;
    opts.max_iterations = a.max_iter;

    const auto normalized = normalize(build_risk_matrix(universe));
    std::optional<ErcSolution> solution;
    if (method == Method::Erc) solution = solve_erc(normalized, opts);
    const WeightVector w = solution ? solution->weights : allocate(method, universe, opts);
    const auto decomposition = risk_contributions(w, normalized);
    const double risk = portfolio_risk_report(w, normalized);

    if (a.json) {
        nlohmann::json doc;
        doc["method"] = to_string(method);
        nlohmann::json weights = nlohmann::json::object();
        nlohmann::json contributions = nlohmann::json::object();
        for (std::size_t i = 0; i < w.size(); ++i) {
            weights[w.ids()[i]] = w[i];
            contributions[w.ids()[i]] = decomposition.contributions[i];
        }
        doc["weights"] = std::move(weights);
        doc["risk_contributions"] = std::move(contributions);
        doc["portfolio_risk"] = risk;
        if (solution) {
            doc["objective"] = solution->objective;
            doc["iterations"] = solution->iterations;
            doc["converged"] = solution->converged;
            doc["stop_reason"] = to_string(solution->stop_reason);
        }
        out << doc.dump(2) << "\n";
        return 0;
    }

    char line[256];
    std::snprintf(line, sizeof line, "%-20s %10s %10s %14s\n", "protocol_id", "score", "weight", "risk_contrib");
    out << line;
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::snprintf(line, sizeof line, "%-20s %10s %10s %14s\n", universe[i].id.c_str(),
                      fmt(universe[i].score, 4).c_str(), fmt(w[i], 6).c_str(),
                      fmt(decomposition.contributions[i], 8).c_str());
        out << line;
    }
    out << "method: " << to_string(method) << "\n";
    out << "portfolio risk (weighted normalized score): " << fmt(risk, 6) << "\n";
    if (solution) {
        out << "objective: " << solution->objective << " after " << solution->iterations << " iterations ("
            << to_string(solution->stop_reason) << ")\n";
    }
    return 0;
}

int cmd_backtest(const BacktestArgs& a, std::ostream& out) {
    const Universe universe = load_scores(a.scores);
    DataBundle bundle{universe, load_yields(a.yields, universe.ids())};
    if (!a.fx.empty()) bundle.panel.fx = load_fx(a.fx);
    bundle.validate();

    BacktestConfig base;
    base.start = parse_date(a.start);
    base.end = parse_date(a.end);
    base.apy_convention = parse_apy_convention(a.apy_convention);
    base.max_gap_fill_days = a.gap_fill;
    base.initial_value = a.initial_value;

    const auto methods = parse_methods(a.methods);
    std::vector<std::future<BacktestLedger>> jobs;
    for (Method m : methods) {
        BacktestConfig cfg = base;
        cfg.method = m;
        jobs.push_back(std::async(std::launch::async, [cfg, &bundle] {
            return run_backtest(cfg, bundle.universe, bundle.panel);
        }));
    }
    std::vector<BacktestLedger> ledgers;
    for (auto& j : jobs) ledgers.push_back(j.get());  // ordered by method name

    std::vector<MonthlyReport> reports;
    for (const auto& l : ledgers) reports.push_back(monthly_report(l));
    const auto files = emit_outputs(ledgers, reports, a.out);

    for (const auto& l : ledgers) {
        const auto& last = l.rows.back();
        out << to_string(l.method) << ": " << l.rows.size() << " days, final value " << fmt(last.value_stable, 8);
        if (last.value_usd) out << " (USD " << fmt(*last.value_usd, 8) << ")";
        out << ", final risk " << fmt(last.portfolio_risk, 4) << "\n";
    }
    for (const auto& f : files) out << "wrote " << f.string() << "\n";
    return 0;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const auto ledgers = load_ledgers(a.ledger_dir);
    std::vector<MonthlyReport> reports;
    for (const auto& l : ledgers) reports.push_back(monthly_report(l));
    if (a.format == "csv") {
        out << render_monthly_csv(reports);
    } else if (a.format == "json") {
        out << render_monthly_json(reports);
    } else {
        out << render_monthly_tables(reports);
    }
    return 0;
}

int cmd_fetch(const FetchArgs& a, std::ostream& out) {
    const auto cfg = load_fetch_config(a.config);
    const auto bundle = fetch_remote(cfg.spec, cfg.ids, cfg.range);
    write_bundle(bundle, a.out);
    out << "fetched " << bundle.universe.size() << " protocols, " << bundle.panel.series.size()
        << " yield series" << (bundle.panel.fx ? ", fx" : "") << " into " << a.out << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-parity allocation and backtesting over scored DeFi protocols", "defirisk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DEFIRISK_VERSION);

    AllocateArgs alloc;
    auto* allocate_cmd = app.add_subcommand("allocate", "Compute portfolio weights from a scores file");
    allocate_cmd->add_option("--scores", alloc.scores, "Scores CSV (protocol_id,name,chain,score,tvl)")->required();
    allocate_cmd->add_option("--method", alloc.method, "ew, tvl or erc")->required();
    allocate_cmd->add_option("--tolerance", alloc.tolerance, "ERC objective tolerance");
    allocate_cmd->add_option("--max-iter", alloc.max_iter, "ERC iteration limit");
    allocate_cmd->add_flag("--json", alloc.json, "Print JSON instead of a table");

    BacktestArgs bt;
    auto* backtest_cmd = app.add_subcommand("backtest", "Run daily-rebalanced backtests");
    backtest_cmd->add_option("--scores", bt.scores, "Scores CSV")->required();
    backtest_cmd->add_option("--yields", bt.yields, "Yields CSV (date,protocol_id,apy)")->required();
    backtest_cmd->add_option("--fx", bt.fx, "FX CSV (date,rate), USD per stablecoin");
    backtest_cmd->add_option("--method", bt.methods, "Comma-separated methods: ew,tvl,erc")->required();
    backtest_cmd->add_option("--start", bt.start, "First day (YYYY-MM-DD)")->required();
    backtest_cmd->add_option("--end", bt.end, "Last day (YYYY-MM-DD)")->required();
    backtest_cmd->add_option("--apy-convention", bt.apy_convention, "compound_365 or simple_365")
        ->check(CLI::IsMember({"compound_365", "simple_365"}));
    backtest_cmd->add_option("--gap-fill", bt.gap_fill, "Max days to forward-fill a missing observation")
        ->check(CLI::NonNegativeNumber);
    backtest_cmd->add_option("--initial-value", bt.initial_value, "Starting value in stablecoin units");
    backtest_cmd->add_option("--out", bt.out, "Output directory")->required();

    ReportArgs rep;
    auto* report_cmd = app.add_subcommand("report", "Monthly performance, risk and perf/risk tables");
    report_cmd->add_option("--ledger", rep.ledger_dir, "Directory holding ledger_<method>.csv files")->required();
    report_cmd->add_option("--format", rep.format, "csv, json or table")
        ->check(CLI::IsMember({"csv", "json", "table"}));

    FetchArgs fa;
    auto* fetch_cmd = app.add_subcommand("fetch", "Download scores/yields/fx through the response cache");
    fetch_cmd->add_option("--config", fa.config, "Fetch config file (key = value)")->required();
    fetch_cmd->add_option("--out", fa.out, "Directory for scores.csv, yields.csv, fx.csv")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "defirisk: " << e.what() << "\n";
        return 2;
    }

    try {
        if (allocate_cmd->parsed()) return cmd_allocate(alloc, out);
        if (backtest_cmd->parsed()) return cmd_backtest(bt, out);
        if (report_cmd->parsed()) return cmd_report(rep, out);
        if (fetch_cmd->parsed()) return cmd_fetch(fa, out);
    } catch (const NotConvergedError& e) {
        err << "defirisk: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "defirisk: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "defirisk: " << e.what() << "\n";
        return 4;
    }
    return 2;
}

}  // namespace defirisk::cli
