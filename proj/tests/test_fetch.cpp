#include <gtest/gtest.h>

#include <map>
#include <thread>

#include "defirisk/error.h"
#include "defirisk/fetch.h"
#include "fixture_server.h"
#include "test_util.h"

namespace defirisk {
namespace {

using testing::TempDir;

const std::filesystem::path kFixtures = DEFIRISK_FIXTURE_DIR;
const DateRange kRange{make_date(2022, 1, 1), make_date(2022, 1, 3)};

/// Serves canned bodies by target; can fail the first N calls.
class FakeTransport : public HttpTransport {
public:
    std::map<std::string, std::string> bodies;
    int calls = 0;
    int failures_left = 0;

    std::string get(const std::string& base, const std::string& target, std::chrono::seconds) override {
        ++calls;
        if (failures_left > 0) {
            --failures_left;
            throw Error(Errc::NetworkError, base + target + ": connection reset");
        }
        auto it = bodies.find(target);
        if (it == bodies.end()) throw Error(Errc::NetworkError, base + target + ": HTTP 404");
        return it->second;
    }
};

FetchSpec simple_spec(const std::filesystem::path& cache) {
    FetchSpec s;
    s.base_url = "http://fixture";
    s.scores_path = "/scores";
    s.yields_path = "/yields/{id}";
    s.cache_dir = cache;
    s.retry_backoff = std::chrono::milliseconds{1};
    return s;
}

FakeTransport simple_transport() {
    FakeTransport t;
    t.bodies["/scores"] = R"([{"id":"a","score":0.5,"tvl":10},{"id":"b","score":0.9}])";
    t.bodies["/yields/a"] = R"([{"date":"2022-01-01","apy":0.05},{"date":"2022-01-02","apy":0.051}])";
    t.bodies["/yields/b"] = R"([{"date":"2022-01-02","apy":0.08}])";
    return t;
}

TEST(FetchRemote, WarmCacheSkipsNetwork) {
    TempDir cache;
    auto transport = simple_transport();
    const auto spec = simple_spec(cache.path());
    const auto first = fetch_remote(spec, {}, kRange, transport);
    EXPECT_EQ(transport.calls, 3);
    EXPECT_EQ(first.universe.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(cache / "scores" / "all.json"));
    EXPECT_TRUE(std::filesystem::exists(cache / "scores" / "all.meta"));
    EXPECT_TRUE(std::filesystem::exists(cache / "yields" / "a_2022-01-01_2022-01-03.json"));

    const auto second = fetch_remote(spec, {}, kRange, transport);
    EXPECT_EQ(transport.calls, 3);
    EXPECT_EQ(second, first);
}

TEST(FetchRemote, ExpiredCacheRefetches) {
    TempDir cache;
    auto transport = simple_transport();
    auto spec = simple_spec(cache.path());
    spec.cache_ttl = std::chrono::seconds{60};
    fetch_remote(spec, {}, kRange, transport);
    // Age every meta file past the ttl.
    ResponseCache c(cache.path(), spec.cache_ttl);
    const auto old = ResponseCache::Clock::now() - std::chrono::hours{2};
    for (auto [res, key] : {std::pair{"scores", "all"}, {"yields", "a_2022-01-01_2022-01-03"}, {"yields", "b_2022-01-01_2022-01-03"}}) {
        c.put(res, key, *c.get(res, key), old);
    }
    fetch_remote(spec, {}, kRange, transport);
    EXPECT_EQ(transport.calls, 6);
}

TEST(FetchRemote, RetriesThenGivesUp) {
    TempDir cache;
    auto transport = simple_transport();
    auto spec = simple_spec(cache.path());
    spec.max_retries = 2;
    transport.failures_left = 2;
    EXPECT_NO_THROW(fetch_remote(spec, {}, kRange, transport));
    EXPECT_EQ(transport.calls, 5);

    TempDir cache2;
    spec.cache_dir = cache2.path();
    transport.calls = 0;
    transport.failures_left = 3;
    try {
        fetch_remote(spec, {}, kRange, transport);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NetworkError);
        EXPECT_NE(std::string(e.what()).find("http://fixture/scores"), std::string::npos);
        EXPECT_EQ(transport.calls, 3);
    }
}

TEST(FetchRemote, MissingApyNamesField) {
    TempDir cache;
    auto transport = simple_transport();
    transport.bodies["/yields/b"] = R"([{"date":"2022-01-02","yield":0.08}])";
    try {
        fetch_remote(simple_spec(cache.path()), {}, kRange, transport);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MappingError);
        EXPECT_NE(std::string(e.what()).find("'apy'"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("/yields/b"), std::string::npos);
    }
}

TEST(FetchRemote, IdSelectionAndUnknownId) {
    TempDir cache;
    auto transport = simple_transport();
    const auto b = fetch_remote(simple_spec(cache.path()), {"b"}, kRange, transport);
    EXPECT_EQ(b.universe.ids(), (std::vector<std::string>{"b"}));
    try {
        fetch_remote(simple_spec(cache.path()), {"zzz"}, kRange, transport);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownProtocol);
    }
}

TEST(MapPayload, PercentScaleAndDuplicates) {
    FieldMapping f;
    f.apy_scale = 0.01;
    const auto s = map_yields_payload(R"([{"date":"2022-01-01","apy":5.0}])", f, kRange, "fixture");
    EXPECT_NEAR(s.entries()[0].second, 0.05, 1e-17);
    try {
        map_yields_payload(R"([{"date":"2022-01-01","apy":5},{"date":"2022-01-01T12:00:00Z","apy":6}])", f, kRange, "fixture");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DuplicateObservation);
    }
    EXPECT_THROW(map_scores_payload("{not json", f, "fixture"), Error);
    EXPECT_THROW(map_scores_payload(R"({"rows": []})", f, "fixture"), Error);
    try {
        map_scores_payload(R"([{"id":"a"}])", f, "fixture");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MappingError);
        EXPECT_NE(std::string(e.what()).find("'score'"), std::string::npos);
    }
}

TEST(ResponseCache, ConcurrentWritersNeverExposePartialPayloads) {
    TempDir cache;
    ResponseCache c(cache.path(), std::chrono::seconds{3600});
    const std::string big_a(1 << 18, 'a');
    const std::string big_b(1 << 18, 'b');
    std::atomic<bool> bad{false};
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 30; ++i) {
                if (t % 2 == 0) {
                    c.put("yields", "k", (i + t) % 2 ? big_a : big_b);
                } else if (auto hit = c.get("yields", "k")) {
                    if (*hit != big_a && *hit != big_b) bad = true;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_FALSE(bad.load());
    // No temporaries left behind.
    for (const auto& entry : std::filesystem::directory_iterator(cache / "yields")) {
        EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
    }
}

TEST(ResponseCache, RejectsNegativeTtl) { EXPECT_THROW(ResponseCache(".", std::chrono::seconds{-1}), Error); }

TEST(FetchRemote, HttpFixtureMatchesFileLoad) {
    testing::FixtureServer server(kFixtures / "remote");
    TempDir cache, out;
    const auto spec = server.spec(cache.path());
    const auto fetched = fetch_remote(spec, {}, kRange);
    EXPECT_EQ(server.hits(), 5);

    // Equivalent local files load to the same bundle...
    EXPECT_EQ(load_bundle(kFixtures / "remote_expected"), fetched);
    // ...and the fetched bundle serializes to the same bytes.
    write_bundle(fetched, out.path());
    for (const char* f : {kScoresFile, kYieldsFile, kFxFile}) {
        EXPECT_EQ(testing::read_text(out / f), testing::read_text(kFixtures / "remote_expected" / f)) << f;
    }

    // Cached payloads alone reproduce the bundle.
    const auto again = fetch_remote(spec, {}, kRange);
    EXPECT_EQ(server.hits(), 5);
    EXPECT_EQ(again, fetched);
}

TEST(FetchRemote, HttpErrorsAreNetworkErrors) {
    testing::FixtureServer server(kFixtures / "remote");
    TempDir cache;
    auto spec = server.spec(cache.path());
    spec.scores_path = "/v1/nope";
    spec.max_retries = 1;
    try {
        fetch_remote(spec, {}, kRange);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NetworkError);
        EXPECT_NE(std::string(e.what()).find("404"), std::string::npos);
    }
}

TEST(FetchConfig, ParsesKeysAndReportsLines) {
    TempDir dir;
    testing::write_text(dir / "fetch.conf",
                        "# upstream\nbase_url = http://localhost:9\nscores_path=/v1/scores\n"
                        "records.scores = data.protocols\nfield.id = slug\napy_scale = 0.01\n"
                        "cache_dir = cache\ncache_ttl_seconds = 120\nids = a, b ,c\n"
                        "start = 2022-01-01\nend = 2022-02-01\napy_convention = simple_365\ngap_fill_days = 2\n");
    const auto cfg = load_fetch_config(dir / "fetch.conf");
    EXPECT_EQ(cfg.spec.base_url, "http://localhost:9");
    EXPECT_EQ(cfg.spec.scores_path, "/v1/scores");
    EXPECT_EQ(cfg.spec.fields.scores_records, "data.protocols");
    EXPECT_EQ(cfg.spec.fields.id, "slug");
    EXPECT_EQ(cfg.spec.fields.apy_scale, 0.01);
    EXPECT_EQ(cfg.spec.cache_dir, dir / "cache");
    EXPECT_EQ(cfg.spec.cache_ttl, std::chrono::seconds{120});
    EXPECT_EQ(cfg.ids, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(cfg.range.end, make_date(2022, 2, 1));
    EXPECT_EQ(cfg.apy_convention, ApyConvention::Simple365);
    EXPECT_EQ(cfg.gap_fill_days, 2);

    testing::write_text(dir / "bad.conf", "base_url = x\nstart = 2022-01-01\nend = 2022-01-02\ncolour = blue\n");
    try {
        load_fetch_config(dir / "bad.conf");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ParseError);
        EXPECT_NE(std::string(e.what()).find("bad.conf:4"), std::string::npos);
    }
}

}  // namespace
}  // namespace defirisk
