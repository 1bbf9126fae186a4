#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "defirisk/date.h"

namespace defirisk {

/// One scored protocol. Higher score means riskier.
struct ProtocolRecord {
    std::string id;
    std::string name;
    std::string chain;
    double score = 0.0;
    std::optional<double> tvl;  // USD

    bool operator==(const ProtocolRecord&) const = default;
};

/// Validated, id-sorted set of protocols. Every vector and matrix in the
/// library is indexed in this order.
class Universe {
public:
    Universe() = default;

    const std::vector<ProtocolRecord>& protocols() const noexcept { return protocols_; }
    std::vector<std::string> ids() const;
    std::size_t size() const noexcept { return protocols_.size(); }
    bool empty() const noexcept { return protocols_.empty(); }
    const ProtocolRecord& operator[](std::size_t i) const { return protocols_[i]; }

    const ProtocolRecord* find(const std::string& id) const;

    /// Protocols whose id appears in `ids`, canonical order preserved.
    Universe subset(std::span<const std::string> ids) const;

    bool operator==(const Universe&) const = default;

private:
    friend Universe validate_universe(std::vector<ProtocolRecord> protocols);
    explicit Universe(std::vector<ProtocolRecord> sorted) : protocols_(std::move(sorted)) {}

    std::vector<ProtocolRecord> protocols_;
};

/// Sorts by id and checks: nonempty, unique ids, scores > 0, tvl >= 0.
Universe validate_universe(std::vector<ProtocolRecord> protocols);

/// Long-only, fully invested allocation over an ordered id list.
class WeightVector {
public:
    static constexpr double kSumTolerance = 1e-9;

    /// Throws InvalidWeights unless every value is in [0,1], the sum is 1
    /// within kSumTolerance and the lengths agree.
    WeightVector(std::vector<std::string> ids, std::vector<double> values);

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const WeightVector&) const = default;

private:
    std::vector<std::string> ids_;
    std::vector<double> values_;
};

/// Divides by the sum so the weights add up to one.
std::vector<double> renormalize(std::vector<double> values);

/// Daily observations with strictly increasing dates.
class DatedSeries {
public:
    using Entry = std::pair<Date, double>;

    DatedSeries() = default;
    /// Throws InvalidSeries if dates are not strictly increasing.
    explicit DatedSeries(std::vector<Entry> entries);
    /// Sorts by date; throws DuplicateObservation on a repeated date.
    static DatedSeries from_unsorted(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Observation on `d`, or the most recent one if it is at most
    /// `max_gap_days` days old.
    std::optional<double> value_at(Date d, int max_gap_days) const;

    bool operator==(const DatedSeries&) const = default;

private:
    std::vector<Entry> entries_;
};

}  // namespace defirisk
