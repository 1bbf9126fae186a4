#include "defirisk/risk.h"

#include <cmath>

#include "defirisk/error.h"

namespace defirisk {

RiskMatrix::RiskMatrix(std::vector<std::string> ids, std::vector<double> entries, bool normalized)
    : ids_(std::move(ids)), entries_(std::move(entries)), normalized_(normalized) {
    const std::size_t n = ids_.size();
    if (n == 0) throw Error(Errc::InvalidMatrix, "empty matrix");
    if (entries_.size() != n * n) {
        throw Error(Errc::InvalidMatrix, "expected " + std::to_string(n * n) + " entries, got " +
                                             std::to_string(entries_.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!((*this)(i, i) > 0.0)) {
            throw Error(Errc::InvalidMatrix, "non-positive diagonal entry for " + ids_[i]);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite((*this)(i, j))) throw Error(Errc::InvalidMatrix, "non-finite entry");
            if ((*this)(i, j) != (*this)(j, i)) {
                throw Error(Errc::InvalidMatrix, "matrix not symmetric at (" + ids_[i] + ", " + ids_[j] + ")");
            }
        }
    }
}

bool RiskMatrix::is_diagonal() const {
    const std::size_t n = dim();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && (*this)(i, j) != 0.0) return false;
        }
    }
    return true;
}

double RiskMatrix::frobenius_norm() const {
    double sum = 0.0;
    for (double v : entries_) sum += v * v;
    return std::sqrt(sum);
}

std::vector<double> RiskMatrix::apply(std::span<const double> w) const {
    const std::size_t n = dim();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += (*this)(i, j) * w[j];
        out[i] = acc;
    }
    return out;
}

RiskMatrix RiskMatrix::scaled(double c) const {
    if (!(c > 0.0)) throw Error(Errc::InvalidArgument, "scale factor must be positive");
    std::vector<double> e = entries_;
    for (auto& v : e) v *= c;
    return RiskMatrix(ids_, std::move(e), normalized_);
}

RiskMatrix build_risk_matrix(const Universe& universe) {
    if (universe.empty()) throw Error(Errc::EmptyUniverse, "cannot build a risk matrix");
    const std::size_t n = universe.size();
    std::vector<double> entries(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) entries[i * n + i] = universe[i].score;
    return RiskMatrix(universe.ids(), std::move(entries), false);
}

RiskMatrix normalize(const RiskMatrix& matrix) {
    if (matrix.normalized()) throw Error(Errc::AlreadyNormalized, "matrix is already normalized");
    const double norm = matrix.frobenius_norm();
    if (!(norm > 0.0)) throw Error(Errc::ZeroMatrix, "cannot normalize a zero matrix");
    std::vector<double> e = matrix.entries();
    for (auto& v : e) v /= norm;
    return RiskMatrix(matrix.ids(), std::move(e), true);
}

void require_same_universe(const WeightVector& w, const RiskMatrix& m) {
    if (w.ids() != m.ids()) {
        throw Error(Errc::UniverseMismatch, "weight vector and risk matrix index different protocol sets");
    }
}

RiskDecomposition risk_contributions(const WeightVector& w, const RiskMatrix& m) {
    require_same_universe(w, m);
    const auto mw = m.apply(w.values());
    RiskDecomposition out;
    out.contributions.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        out.contributions[i] = w[i] * mw[i];
        out.total += out.contributions[i];
    }
    return out;
}

double quadratic_risk(std::span<const double> w, const RiskMatrix& m) {
    const std::size_t n = m.dim();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) acc += w[i] * m(i, j) * w[j];
    }
    return acc;
}

double portfolio_risk_report(const WeightVector& w, const RiskMatrix& m) {
    require_same_universe(w, m);
    if (!m.normalized()) throw Error(Errc::NotNormalized, "portfolio risk is reported on normalized scores");
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * m(i, i);
    return acc;
}

}  // namespace defirisk
