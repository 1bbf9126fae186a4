#pragma once

#include <span>
#include <string>
#include <vector>

#include "defirisk/domain.h"

namespace defirisk {

/// Square symmetric risk matrix over an ordered id list.
///
/// Scores built from a universe produce a strictly diagonal matrix with
/// the raw scores on the diagonal. The type also admits symmetric
/// off-diagonal terms for callers modelling dependence between protocols;
/// nothing in the library populates them.
class RiskMatrix {
public:
    /// Throws InvalidMatrix unless entries is n*n (row-major), symmetric,
    /// finite, with a strictly positive diagonal.
    RiskMatrix(std::vector<std::string> ids, std::vector<double> entries, bool normalized);

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::size_t dim() const noexcept { return ids_.size(); }
    bool normalized() const noexcept { return normalized_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim() + j]; }
    const std::vector<double>& entries() const noexcept { return entries_; }

    bool is_diagonal() const;
    double frobenius_norm() const;

    /// Matrix-vector product m*w.
    std::vector<double> apply(std::span<const double> w) const;

    /// c * this, keeping the normalized flag. c must be > 0.
    RiskMatrix scaled(double c) const;

    bool operator==(const RiskMatrix&) const = default;

private:
    std::vector<std::string> ids_;
    std::vector<double> entries_;
    bool normalized_;
};

/// Per-protocol contributions w_i (m w)_i and their sum.
struct RiskDecomposition {
    std::vector<double> contributions;
    double total = 0.0;
};

/// Diagonal matrix of the universe's raw scores.
RiskMatrix build_risk_matrix(const Universe& universe);

/// Divides by the Frobenius norm. Throws AlreadyNormalized or ZeroMatrix.
RiskMatrix normalize(const RiskMatrix& matrix);

/// Throws UniverseMismatch when w and m are indexed differently.
RiskDecomposition risk_contributions(const WeightVector& w, const RiskMatrix& m);

/// Quadratic form w' m w, computed independently of the decomposition.
double quadratic_risk(std::span<const double> w, const RiskMatrix& m);

/// Linear weighted score sum_i w_i m_ii over a normalized matrix. This is
/// the risk level recorded in backtest ledgers and monthly reports.
double portfolio_risk_report(const WeightVector& w, const RiskMatrix& m);

void require_same_universe(const WeightVector& w, const RiskMatrix& m);

}  // namespace defirisk
