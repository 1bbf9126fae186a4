#include "defirisk/allocate.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace defirisk {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<double> contributions_raw(std::span<const double> w, const RiskMatrix& m) {
    auto c = m.apply(w);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w[i];
    return c;
}

void require_normalized(const RiskMatrix& m) {
    if (!m.normalized()) throw Error(Errc::NotNormalized, "ERC objective expects a normalized risk matrix");
}

ErcSolution finish(const RiskMatrix& m, std::vector<double> w, int iterations, StopReason reason,
                   double tolerance) {
    if (reason != StopReason::ClosedForm) w = renormalize(std::move(w));
    const double f = erc_objective_raw(w, m);
    const bool converged = reason == StopReason::SingleAsset || reason == StopReason::ClosedForm ||
                           f <= tolerance;
    return ErcSolution{WeightVector(m.ids(), std::move(w)), f, iterations, converged, reason};
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::Ew: return "ew";
        case Method::Tvl: return "tvl";
        case Method::Erc: return "erc";
    }
    return "?";
}

Method parse_method(const std::string& text) {
    if (text == "ew") return Method::Ew;
    if (text == "tvl") return Method::Tvl;
    if (text == "erc") return Method::Erc;
    throw Error(Errc::InvalidArgument, "unknown allocation method '" + text + "' (expected ew, tvl or erc)");
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::SingleAsset: return "single_asset";
        case StopReason::ClosedForm: return "closed_form";
        case StopReason::Tolerance: return "tolerance";
        case StopReason::Stalled: return "stalled";
        case StopReason::MaxIterations: return "max_iterations";
    }
    return "?";
}

NotConvergedError::NotConvergedError(ErcSolution best)
    : Error(Errc::NotConverged, "ERC solver stopped (" + std::string(to_string(best.stop_reason)) +
                                    ") after " + std::to_string(best.iterations) +
                                    " iterations with objective " + std::to_string(best.objective)),
      best_(std::move(best)) {}

WeightVector equal_weights(const Universe& universe) {
    if (universe.empty()) throw Error(Errc::EmptyUniverse, "equal weights need at least one protocol");
    const auto n = universe.size();
    return WeightVector(universe.ids(), renormalize(std::vector<double>(n, 1.0 / static_cast<double>(n))));
}

WeightVector tvl_weights(const Universe& universe) {
    if (universe.empty()) throw Error(Errc::EmptyUniverse, "TVL weights need at least one protocol");
    std::vector<double> tvl;
    tvl.reserve(universe.size());
    double total = 0.0;
    for (const auto& p : universe.protocols()) {
        if (!p.tvl) throw Error(Errc::MissingTvl, p.id);
        tvl.push_back(*p.tvl);
        total += *p.tvl;
    }
    if (!(total > 0.0)) throw Error(Errc::ZeroTotalTvl, "total TVL is zero");
    return WeightVector(universe.ids(), renormalize(std::move(tvl)));
}

double erc_objective_raw(std::span<const double> w, const RiskMatrix& m) {
    const auto c = contributions_raw(w, m);
    double f = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double d = c[i] - c[j];
            f += d * d;
        }
    }
    return f;
}

// With c_i = w_i (Mw)_i and f = sum_ij (c_i - c_j)^2:
//   df/dc_k = 4 sum_j (c_k - c_j)
//   df/dw_k = g_k (Mw)_k + (M (g .* w))_k        (M symmetric)
std::vector<double> erc_gradient(std::span<const double> w, const RiskMatrix& m) {
    const std::size_t n = w.size();
    const auto mw = m.apply(w);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = w[i] * mw[i];

    std::vector<double> g(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += c[k] - c[j];
        g[k] = 4.0 * acc;
    }
    std::vector<double> gw(n);
    for (std::size_t i = 0; i < n; ++i) gw[i] = g[i] * w[i];
    const auto mgw = m.apply(gw);

    std::vector<double> grad(n);
    for (std::size_t k = 0; k < n; ++k) grad[k] = g[k] * mw[k] + mgw[k];
    return grad;
}

double erc_objective(const WeightVector& w, const RiskMatrix& m) {
    require_same_universe(w, m);
    require_normalized(m);
    return erc_objective_raw(w.values(), m);
}

std::vector<double> simplex_projection(std::span<const double> v) {
    if (v.empty()) throw Error(Errc::EmptyVector, "cannot project an empty vector");
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - theta, 0.0, 1.0);
    return out;
}

WeightVector project_to_simplex(std::vector<std::string> ids, std::span<const double> v) {
    auto w = simplex_projection(v);
    return WeightVector(std::move(ids), std::move(w));
}

WeightVector closed_form_diagonal(const RiskMatrix& m) {
    if (!m.is_diagonal()) throw Error(Errc::NotDiagonal, "closed-form ERC requires a diagonal matrix");
    std::vector<double> w(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i) w[i] = 1.0 / std::sqrt(m(i, i));
    return WeightVector(m.ids(), renormalize(std::move(w)));
}

ErcSolution solve_erc(const RiskMatrix& m, const ErcSolverOptions& opts) {
    require_normalized(m);
    if (opts.max_iterations < 1 || !(opts.tolerance > 0.0)) {
        throw Error(Errc::InvalidArgument, "solver needs max_iterations >= 1 and tolerance > 0");
    }
    const std::size_t n = m.dim();
    if (n == 1) return finish(m, {1.0}, 0, StopReason::SingleAsset, opts.tolerance);
    if (opts.diagonal_shortcut && m.is_diagonal()) {
        return finish(m, closed_form_diagonal(m).values(), 0, StopReason::ClosedForm, opts.tolerance);
    }

    constexpr int kStallWindow = 10;
    constexpr double kStallRelDecrease = 1e-14;
    constexpr double kMinStep = 1e-30;
    constexpr double kMaxStep = 1e30;

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    double f = erc_objective_raw(w, m);
    auto grad = erc_gradient(w, m);
    double step = opts.step_rule.initial_step;
    std::deque<double> history{f};

    std::vector<double> trial(n);
    std::vector<double> s(n);
    int it = 0;
    StopReason reason = StopReason::MaxIterations;
    while (true) {
        if (f <= opts.tolerance) {
            reason = StopReason::Tolerance;
            break;
        }
        if (it >= opts.max_iterations) {
            reason = StopReason::MaxIterations;
            break;
        }
        ++it;

        // Backtracking along the projection arc.
        bool accepted = false;
        double f_trial = f;
        while (step >= kMinStep) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - step * grad[i];
            auto projected = simplex_projection(trial);
            for (std::size_t i = 0; i < n; ++i) s[i] = projected[i] - w[i];
            const double ss = dot(s, s);
            if (ss == 0.0) break;
            f_trial = erc_objective_raw(projected, m);
            if (f_trial <= f - opts.step_rule.armijo / step * ss) {
                trial = std::move(projected);
                accepted = true;
                break;
            }
            step *= opts.step_rule.backtrack_factor;
        }
        if (!accepted) {
            reason = StopReason::Stalled;
            break;
        }

        auto grad_new = erc_gradient(trial, m);
        double sy = 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sy += s[i] * (grad_new[i] - grad[i]);
            ss += s[i] * s[i];
        }
        // Barzilai-Borwein trial step for the next iteration.
        step = sy > 0.0 ? std::clamp(ss / sy, kMinStep, kMaxStep) : std::min(step * 2.0, kMaxStep);

        w.swap(trial);
        grad = std::move(grad_new);
        f = f_trial;

        history.push_back(f);
        if (history.size() > kStallWindow + 1) history.pop_front();
        if (history.size() == kStallWindow + 1 && f > opts.tolerance) {
            const double past = history.front();
            if (past > 0.0 && (past - f) / past < kStallRelDecrease) {
                reason = StopReason::Stalled;
                break;
            }
        }
    }

    auto solution = finish(m, std::move(w), it, reason, opts.tolerance);
    if (!solution.converged) throw NotConvergedError(std::move(solution));
    return solution;
}

WeightVector allocate(Method method, const Universe& universe, const ErcSolverOptions& opts) {
    switch (method) {
        case Method::Ew: return equal_weights(universe);
        case Method::Tvl: return tvl_weights(universe);
        case Method::Erc: return solve_erc(normalize(build_risk_matrix(universe)), opts).weights;
    }
    throw Error(Errc::InvalidArgument, "unknown method");
}

}  // namespace defirisk
