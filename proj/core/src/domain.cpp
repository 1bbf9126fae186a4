#include "defirisk/domain.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "defirisk/error.h"

namespace defirisk {

std::vector<std::string> Universe::ids() const {
    std::vector<std::string> out;
    out.reserve(protocols_.size());
    for (const auto& p : protocols_) out.push_back(p.id);
    return out;
}

const ProtocolRecord* Universe::find(const std::string& id) const {
    auto it = std::lower_bound(protocols_.begin(), protocols_.end(), id,
                               [](const ProtocolRecord& p, const std::string& key) { return p.id < key; });
    if (it == protocols_.end() || it->id != id) return nullptr;
    return &*it;
}

Universe Universe::subset(std::span<const std::string> ids) const {
    std::vector<ProtocolRecord> out;
    for (const auto& p : protocols_) {
        if (std::find(ids.begin(), ids.end(), p.id) != ids.end()) out.push_back(p);
    }
    return Universe(std::move(out));
}

Universe validate_universe(std::vector<ProtocolRecord> protocols) {
    if (protocols.empty()) throw Error(Errc::EmptyUniverse, "no protocols supplied");
    std::stable_sort(protocols.begin(), protocols.end(),
                     [](const ProtocolRecord& a, const ProtocolRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < protocols.size(); ++i) {
        const auto& p = protocols[i];
        if (p.id.empty()) throw Error(Errc::InvalidArgument, "protocol with empty id");
        if (i > 0 && protocols[i - 1].id == p.id) throw Error(Errc::DuplicateId, p.id);
        if (!(p.score > 0.0) || !std::isfinite(p.score)) {
            throw Error(Errc::NonPositiveScore, p.id);
        }
        if (p.tvl && (!(*p.tvl >= 0.0) || !std::isfinite(*p.tvl))) {
            throw Error(Errc::InvalidArgument, "negative or non-finite tvl for " + p.id);
        }
    }
    return Universe(std::move(protocols));
}

WeightVector::WeightVector(std::vector<std::string> ids, std::vector<double> values)
    : ids_(std::move(ids)), values_(std::move(values)) {
    if (ids_.size() != values_.size()) {
        throw Error(Errc::InvalidWeights, "length mismatch: " + std::to_string(ids_.size()) + " ids, " +
                                              std::to_string(values_.size()) + " values");
    }
    if (values_.empty()) throw Error(Errc::InvalidWeights, "empty weight vector");
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(Errc::InvalidWeights, "weight of " + ids_[i] + " outside [0,1]: " + std::to_string(v));
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw Error(Errc::InvalidWeights, "weights sum to " + std::to_string(sum));
    }
}

std::vector<double> renormalize(std::vector<double> values) {
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    for (auto& v : values) v /= sum;
    return values;
}

DatedSeries::DatedSeries(std::vector<Entry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (!(entries_[i - 1].first < entries_[i].first)) {
            throw Error(Errc::InvalidSeries, "dates not strictly increasing at " + format_date(entries_[i].first));
        }
    }
}

DatedSeries DatedSeries::from_unsorted(std::vector<Entry> entries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i - 1].first == entries[i].first) {
            throw Error(Errc::DuplicateObservation, "date " + format_date(entries[i].first) + " appears twice");
        }
    }
    return DatedSeries(std::move(entries));
}

std::optional<double> DatedSeries::value_at(Date d, int max_gap_days) const {
    auto it = std::upper_bound(entries_.begin(), entries_.end(), d,
                               [](Date key, const Entry& e) { return key < e.first; });
    if (it == entries_.begin()) return std::nullopt;
    --it;
    if ((d - it->first).count() > max_gap_days) return std::nullopt;
    return it->second;
}

}  // namespace defirisk
