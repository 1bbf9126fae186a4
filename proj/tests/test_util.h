#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "defirisk/domain.h"

namespace defirisk::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / ("defirisk-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::permissions(path_, std::filesystem::perms::owner_all,
                                     std::filesystem::perm_options::add, ec);
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ProtocolRecord protocol(std::string id, double score, std::optional<double> tvl = std::nullopt) {
    return ProtocolRecord{id, id, "chain", score, tvl};
}

inline Universe universe_from_scores(const std::vector<double>& scores) {
    std::vector<ProtocolRecord> ps;
    for (std::size_t i = 0; i < scores.size(); ++i) ps.push_back(protocol("p" + std::to_string(i), scores[i]));
    return validate_universe(std::move(ps));
}

/// Random diagonal score set: n in [n_min, n_max], scores in [lo, hi].
inline std::vector<double> random_scores(std::mt19937_64& rng, int n_min, int n_max, double lo = 0.1,
                                         double hi = 10.0) {
    std::uniform_int_distribution<int> nd(n_min, n_max);
    std::uniform_real_distribution<double> sd(lo, hi);
    std::vector<double> s(static_cast<std::size_t>(nd(rng)));
    for (auto& v : s) v = sd(rng);
    return s;
}

/// Uniform point on the unit simplex (normalized exponentials).
inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> ed(1.0);
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& v : w) sum += (v = ed(rng));
    for (auto& v : w) v /= sum;
    return w;
}

}  // namespace defirisk::testing
