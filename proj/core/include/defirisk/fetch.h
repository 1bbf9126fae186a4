#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "defirisk/date.h"
#include "defirisk/ingest.h"

namespace defirisk {

/// Where each value lives in the upstream JSON payloads. `*_records` is a
/// dot-separated path to the array of records ("" = the payload itself).
struct FieldMapping {
    std::string scores_records;
    std::string yields_records;
    std::string fx_records;
    std::string id = "id";
    std::string name = "name";
    std::string chain = "chain";
    std::string score = "score";
    std::string tvl = "tvl";
    std::string date = "date";
    std::string apy = "apy";
    std::string rate = "rate";
    /// Multiplier turning the upstream apy into a fraction (0.01 for percent).
    double apy_scale = 1.0;
};

/// Endpoint-agnostic description of a yield API. Paths may contain the
/// placeholders {id}, {start} and {end}.
struct FetchSpec {
    std::string base_url;
    std::string scores_path = "/scores";
    std::string yields_path = "/yields/{id}?start={start}&end={end}";
    std::string fx_path;  // empty: no fx resource
    FieldMapping fields;
    std::filesystem::path cache_dir = ".defirisk-cache";
    std::chrono::seconds cache_ttl{3600};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{200};
    std::chrono::seconds timeout{30};
};

struct DateRange {
    Date start;
    Date end;
};

/// GET transport. Implementations throw Error(NetworkError) on failure.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual std::string get(const std::string& base_url, const std::string& target,
                            std::chrono::seconds timeout) = 0;
};

/// Plain HTTP(S) client.
std::unique_ptr<HttpTransport> make_default_transport();

/// On-disk cache of raw responses:
///   <dir>/<resource>/<key>.json   payload
///   <dir>/<resource>/<key>.meta   "fetched_at=<unix seconds>"
/// Both files are written through a temporary and renamed into place, so a
/// reader never sees a partial payload. Writes to one key are serialized
/// within the process.
class ResponseCache {
public:
    using Clock = std::chrono::system_clock;

    ResponseCache(std::filesystem::path dir, std::chrono::seconds ttl);

    std::optional<std::string> get(const std::string& resource, const std::string& key,
                                   Clock::time_point now = Clock::now()) const;
    void put(const std::string& resource, const std::string& key, const std::string& payload,
             Clock::time_point now = Clock::now());

    std::filesystem::path payload_path(const std::string& resource, const std::string& key) const;
    std::filesystem::path meta_path(const std::string& resource, const std::string& key) const;

private:
    std::filesystem::path dir_;
    std::chrono::seconds ttl_;
};

/// Fetches scores (and yields/fx per id over `range`) through the cache,
/// mapping payloads into validated types. Empty `ids` means every protocol
/// in the scores payload. Network failures are retried with exponential
/// backoff up to spec.max_retries times.
DataBundle fetch_remote(const FetchSpec& spec, const std::vector<std::string>& ids, DateRange range,
                        HttpTransport& transport);
DataBundle fetch_remote(const FetchSpec& spec, const std::vector<std::string>& ids, DateRange range);

/// Payload mapping, exposed for fixtures. `source` names the URL or file
/// for error messages.
std::vector<ProtocolRecord> map_scores_payload(const std::string& payload, const FieldMapping& fields,
                                               const std::string& source);
DatedSeries map_yields_payload(const std::string& payload, const FieldMapping& fields, DateRange range,
                               const std::string& source);
DatedSeries map_fx_payload(const std::string& payload, const FieldMapping& fields, DateRange range,
                           const std::string& source);

/// Contents of a `fetch --config` file.
struct FetchConfig {
    FetchSpec spec;
    std::vector<std::string> ids;
    DateRange range;
    ApyConvention apy_convention = ApyConvention::Compound365;
    int gap_fill_days = 3;
};

/// Parses `key = value` lines ('#' starts a comment). Relative cache_dir is
/// resolved against the config file's directory. See README for the keys.
FetchConfig load_fetch_config(const std::filesystem::path& path);

}  // namespace defirisk
