#include <gtest/gtest.h>

#include <cmath>
#include <unistd.h>

#include "defirisk/error.h"
#include "defirisk/report.h"
#include "test_util.h"

namespace defirisk {
namespace {

using testing::TempDir;

BacktestLedger synthetic_ledger(Date start, const std::vector<double>& returns, const std::vector<double>& risks,
                                Method method = Method::Erc) {
    BacktestLedger l;
    l.method = method;
    double value = l.initial_value;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        value *= 1.0 + returns[i];
        l.rows.push_back(LedgerRow{start + std::chrono::days{static_cast<int>(i)},
                                   {"a", "b"},
                                   WeightVector({"a", "b"}, {0.25, 0.75}),
                                   returns[i],
                                   value,
                                   value * 1.001,
                                   risks[i]});
    }
    return l;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

TEST(MonthlyPerformance, Compounding) {
    const auto zero = monthly_performance(synthetic_ledger(make_date(2022, 4, 1), std::vector<double>(30, 0.0),
                                                           std::vector<double>(30, 0.5)));
    ASSERT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero[0].value, 0.0);
    EXPECT_EQ(zero[0].month_end, make_date(2022, 4, 30));

    // (1.01)^2 - 1
    const auto two = monthly_performance(synthetic_ledger(make_date(2022, 4, 1), {0.01, 0.01}, {0.5, 0.5}));
    EXPECT_NEAR(two[0].value, 0.0201, 1e-15);
    EXPECT_EQ(two[0].month_end, make_date(2022, 4, 2));  // partial month keyed by last date

    const double r = 4.2e-4;
    const auto full = monthly_performance(synthetic_ledger(make_date(2022, 3, 1), std::vector<double>(31, r),
                                                           std::vector<double>(31, 0.5)));
    EXPECT_NEAR(full[0].value, std::pow(1.0 + r, 31) - 1.0, 1e-14);
}

TEST(MonthlyPerformance, MonthKeysAndChaining) {
    // 2021-12-15 .. 2022-05-22, like the reported table range.
    const Date start = make_date(2021, 12, 15);
    const int days = (make_date(2022, 5, 22) - start).count() + 1;
    std::vector<double> returns, risks;
    for (int i = 0; i < days; ++i) {
        returns.push_back(1e-4 * (1 + i % 7) - 2e-5 * (i % 3));
        risks.push_back(0.4 + 0.001 * (i % 11));
    }
    const auto ledger = synthetic_ledger(start, returns, risks);
    const auto perf = monthly_performance(ledger);
    const std::vector<Date> keys{make_date(2021, 12, 31), make_date(2022, 1, 31), make_date(2022, 2, 28),
                                 make_date(2022, 3, 31), make_date(2022, 4, 30), make_date(2022, 5, 22)};
    ASSERT_EQ(perf.size(), keys.size());
    double chained = 1.0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        EXPECT_EQ(perf[i].month_end, keys[i]);
        chained *= 1.0 + perf[i].value;
    }
    const double total = ledger.rows.back().value_stable / ledger.initial_value - 1.0;
    EXPECT_NEAR(chained - 1.0, total, 1e-9 * std::abs(total));

    const auto report = monthly_report(ledger);
    for (const auto& row : report.rows) EXPECT_NEAR(row.ratio, row.perf / row.avg_risk, 1e-9);
}

TEST(MonthlyAvgRisk, Means) {
    const auto constant = monthly_avg_risk(synthetic_ledger(make_date(2022, 4, 1), std::vector<double>(30, 0.0),
                                                            std::vector<double>(30, 0.4024)));
    EXPECT_NEAR(constant[0].value, 0.4024, 1e-15);

    std::vector<double> risks(30, 0.6);
    std::fill(risks.begin() + 15, risks.end(), 0.8);
    const auto half = monthly_avg_risk(synthetic_ledger(make_date(2022, 4, 1), std::vector<double>(30, 0.0), risks));
    EXPECT_NEAR(half[0].value, 0.7, 1e-15);

    const auto stub = monthly_avg_risk(synthetic_ledger(make_date(2022, 4, 30), {0.0, 0.0}, {0.55, 0.9}));
    ASSERT_EQ(stub.size(), 2u);
    EXPECT_EQ(stub[0].value, 0.55);
    EXPECT_EQ(stub[1].month_end, make_date(2022, 5, 1));
}

TEST(Monthly, EmptyLedger) {
    BacktestLedger empty;
    EXPECT_THROW(monthly_performance(empty), Error);
    EXPECT_THROW(monthly_avg_risk(empty), Error);
}

TEST(PerfRiskRatio, KnownMonthlyFigures) {
    const Date m = make_date(2021, 12, 31);
    const std::vector<MonthlyValue> perf{{m, 0.014400}}, risk{{m, 0.6673}};
    EXPECT_EQ(round4(perf_risk_ratio(perf, risk).rows[0].ratio), 0.0216);
    const std::vector<MonthlyValue> perf2{{m, 0.015290}}, risk2{{m, 0.6249}};
    EXPECT_EQ(round4(perf_risk_ratio(perf2, risk2).rows[0].ratio), 0.0245);
    const std::vector<MonthlyValue> zero{{m, 0.0}};
    EXPECT_EQ(perf_risk_ratio(zero, risk).rows[0].ratio, 0.0);
}

TEST(PerfRiskRatio, Errors) {
    const Date m = make_date(2021, 12, 31);
    const std::vector<MonthlyValue> perf{{m, 0.01}}, zero_risk{{m, 0.0}}, other{{make_date(2022, 1, 31), 0.5}};
    try {
        perf_risk_ratio(perf, zero_risk);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ZeroRisk);
    }
    try {
        perf_risk_ratio(perf, other);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MonthMisalignment);
    }
    EXPECT_THROW(perf_risk_ratio(perf, std::vector<MonthlyValue>{}), Error);
}

TEST(LedgerCsv, RoundTrip) {
    TempDir dir;
    const auto ledger = synthetic_ledger(make_date(2022, 1, 30), {1e-4, 2.5e-4, -3e-5, 0.0}, {0.41, 0.42, 0.43, 0.44});
    write_ledger_csv(ledger, dir / "ledger_erc.csv");
    const auto back = read_ledger_csv(dir / "ledger_erc.csv", Method::Erc);
    EXPECT_EQ(back.rows, ledger.rows);
    EXPECT_NEAR(back.initial_value, ledger.initial_value, 1e-15);
    const auto all = load_ledgers(dir.path());
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].method, Method::Erc);
}

TEST(EmitOutputs, DeterministicFiles) {
    const Date start = make_date(2022, 1, 20);
    const auto ew = synthetic_ledger(start, std::vector<double>(20, 1e-4), std::vector<double>(20, 0.6), Method::Ew);
    const auto erc = synthetic_ledger(start, std::vector<double>(20, 1.1e-4), std::vector<double>(20, 0.55), Method::Erc);
    const std::vector<BacktestLedger> ledgers{erc, ew};
    const std::vector<MonthlyReport> reports{monthly_report(erc), monthly_report(ew)};
    TempDir a, b;
    const auto files_a = emit_outputs(ledgers, reports, a.path());
    const auto files_b = emit_outputs(ledgers, reports, b.path());
    ASSERT_GE(files_a.size(), 4u);
    for (std::size_t i = 0; i < files_a.size(); ++i) {
        EXPECT_EQ(files_a[i].filename(), files_b[i].filename());
        EXPECT_EQ(testing::read_text(files_a[i]), testing::read_text(files_b[i]));
    }
    EXPECT_TRUE(std::filesystem::exists(a / "plot_data.json"));
    EXPECT_TRUE(std::filesystem::exists(a / "comparison.csv"));
    const auto comparison = testing::read_text(a / "comparison.csv");
    EXPECT_NE(comparison.find("value_diff_ew_vs_erc"), std::string::npos);
    EXPECT_EQ(testing::read_text(a / "monthly_report.csv").find(','), 6u);  // "method,..."
}

TEST(EmitOutputs, Guards) {
    TempDir dir;
    const auto l = synthetic_ledger(make_date(2022, 1, 1), {1e-4}, {0.5});
    const std::vector<BacktestLedger> ledgers{l};
    try {
        emit_outputs(ledgers, std::vector<MonthlyReport>{}, dir / "out");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyLedger);
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "out"));

    const std::vector<MonthlyReport> reports{monthly_report(l)};
    testing::write_text(dir / "blocker", "x");
    try {
        emit_outputs(ledgers, reports, dir / "blocker" / "out");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IoError);
        EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
    }

    if (::geteuid() != 0) {  // root ignores permission bits
        std::filesystem::create_directory(dir / "ro");
        std::filesystem::permissions(dir / "ro", std::filesystem::perms::owner_read | std::filesystem::perms::owner_exec);
        try {
            emit_outputs(ledgers, reports, dir / "ro");
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::IoError);
            EXPECT_NE(std::string(e.what()).find("ro"), std::string::npos);
        }
    }
}

TEST(RenderMonthlyTables, DisplayRounding) {
    const Date m = make_date(2021, 12, 31);
    MonthlyReport ew{"ew", {{m, 0.014400, 0.6673, 0.014400 / 0.6673}}};
    MonthlyReport erc{"erc", {{m, 0.015290, 0.6249, 0.015290 / 0.6249}}};
    const std::vector<MonthlyReport> reports{erc, ew};
    const auto text = render_monthly_tables(reports);
    EXPECT_NE(text.find("1.4400%"), std::string::npos);
    EXPECT_NE(text.find("0.6249"), std::string::npos);
    EXPECT_NE(text.find("0.0216"), std::string::npos);
    EXPECT_NE(text.find("0.0245"), std::string::npos);
    EXPECT_EQ(text.find("0,0216"), std::string::npos);

    MonthlyReport shifted{"tvl", {{make_date(2022, 1, 31), 0.01, 0.5, 0.02}}};
    const std::vector<MonthlyReport> bad{erc, shifted};
    EXPECT_THROW(render_monthly_tables(bad), Error);
}

}  // namespace
}  // namespace defirisk
