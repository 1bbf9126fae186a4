#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "defirisk/backtest.h"
#include "defirisk/domain.h"

namespace defirisk {

/// Scores and yields that belong together. Every panel series id is a
/// protocol of the universe.
struct DataBundle {
    Universe universe;
    YieldPanel panel;

    /// Throws UnknownProtocol for a series without a protocol.
    void validate() const;

    bool operator==(const DataBundle&) const = default;
};

// File formats (CSV with a header line):
//   scores  protocol_id,name,chain,score,tvl      tvl may be empty
//   yields  date,protocol_id,apy                  long format, apy as fraction or "5%"
//   fx      date,rate                             USD per stablecoin unit
inline constexpr const char* kScoresFile = "scores.csv";
inline constexpr const char* kYieldsFile = "yields.csv";
inline constexpr const char* kFxFile = "fx.csv";

Universe load_scores(const std::filesystem::path& path);
YieldPanel load_yields(const std::filesystem::path& path, std::span<const std::string> ids);
DatedSeries load_fx(const std::filesystem::path& path);

/// Parses an APY cell: a fraction ("0.05") or a percentage ("5%").
double parse_apy(std::string_view text);

void write_scores(const Universe& universe, const std::filesystem::path& path);
void write_yields(const YieldPanel& panel, const std::filesystem::path& path);
void write_fx(const DatedSeries& fx, const std::filesystem::path& path);

/// Writes scores.csv, yields.csv and (when present) fx.csv into `dir`.
void write_bundle(const DataBundle& bundle, const std::filesystem::path& dir);
/// Reads the files written by write_bundle; fx.csv is optional.
DataBundle load_bundle(const std::filesystem::path& dir);

}  // namespace defirisk
