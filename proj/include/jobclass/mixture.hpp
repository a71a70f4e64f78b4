#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "jobclass/common.hpp"
#include "jobclass/parallel.hpp"
#include "jobclass/random.hpp"

namespace jobclass {

// Two-component Gaussian mixture on log2 runtimes. Component 1 is the
// "short" population; pi is the mixing probability of component 2 ("long").
// Canonical form has mu1 < mu2.
struct MixtureModel {
    double pi = 0.5;
    double mu1 = 0, var1 = 1;
    double mu2 = 0, var2 = 1;
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
    std::int64_t iterations_used = 0;
    bool converged = false;

    double sigma1() const { return std::sqrt(var1); }
    double sigma2() const { return std::sqrt(var2); }
};

enum class InitPolicy { RandomObservations, Quantile };

struct EmConfig {
    std::int64_t max_iterations = 1000;
    double tolerance = 1e-8;  // relative log-likelihood change
    std::int64_t restarts = 5;
    std::uint64_t seed = 1;
    InitPolicy init_policy = InitPolicy::RandomObservations;

    void validate() const {
        if (max_iterations < 1) throw ConfigError("em: max_iterations must be >= 1");
        if (!(tolerance > 0)) throw ConfigError("em: tolerance must be > 0");
        if (restarts < 1) throw ConfigError("em: restarts must be >= 1");
    }
};

// Variances below this are floored; hitting the floor on consecutive
// iterations is treated as component collapse.
inline constexpr double kVarianceFloor = 1e-6;

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

inline double log_normal_pdf(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

namespace detail {

// log[(1-pi) phi1(y)] and log[pi phi2(y)]
inline void component_log_terms(const MixtureModel& m, double y, double& a1, double& a2) {
    a1 = std::log1p(-m.pi) + log_normal_pdf(y, m.mu1, m.var1);
    a2 = std::log(m.pi) + log_normal_pdf(y, m.mu2, m.var2);
}

inline double log_sum_exp(double a, double b) {
    const double hi = std::max(a, b);
    if (!std::isfinite(hi)) return hi;  // both -inf
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace detail

// Responsibility of the long component for a single observation:
//   gamma = pi*phi2 / ((1-pi)*phi1 + pi*phi2)
// computed as a logistic in the log-odds so it never produces NaN and hits
// 0.5 exactly when the two weighted densities tie.
inline double responsibility(const MixtureModel& m, double y) {
    double a1, a2;
    detail::component_log_terms(m, y, a1, a2);
    const double t = std::exp(a1 - a2);
    return 1.0 / (1.0 + t);
}

// E step over a dataset.
inline std::vector<double> e_step(const MixtureModel& m, std::span<const double> data) {
    std::vector<double> gamma(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) gamma[i] = responsibility(m, data[i]);
    return gamma;
}

inline double log_likelihood(const MixtureModel& m, std::span<const double> data) {
    double ll = 0;
    for (double y : data) {
        double a1, a2;
        detail::component_log_terms(m, y, a1, a2);
        ll += detail::log_sum_exp(a1, a2);
    }
    return ll;
}

// M step: weighted means/variances (population convention) and pi = sum(gamma)/N.
// Variances are floored at kVarianceFloor.
inline MixtureModel m_step(std::span<const double> data, std::span<const double> gamma) {
    const std::size_t n = data.size();
    double w2 = 0;
    for (double g : gamma) w2 += g;
    const double w1 = static_cast<double>(n) - w2;
    if (!(w1 > 0) || !(w2 > 0))
        throw ComponentCollapse("m_step: one component has zero total responsibility");

    MixtureModel m;
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s1 += (1.0 - gamma[i]) * data[i];
        s2 += gamma[i] * data[i];
    }
    m.mu1 = s1 / w1;
    m.mu2 = s2 / w2;
    double v1 = 0, v2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = data[i] - m.mu1;
        const double d2 = data[i] - m.mu2;
        v1 += (1.0 - gamma[i]) * d1 * d1;
        v2 += gamma[i] * d2 * d2;
    }
    m.var1 = std::max(v1 / w1, kVarianceFloor);
    m.var2 = std::max(v2 / w2, kVarianceFloor);
    m.pi = w2 / static_cast<double>(n);
    return m;
}

// Swap components so mu1 < mu2, remapping pi; idempotent.
inline MixtureModel canonicalize(MixtureModel m) {
    if (m.mu1 > m.mu2) {
        std::swap(m.mu1, m.mu2);
        std::swap(m.var1, m.var2);
        m.pi = 1.0 - m.pi;
    }
    return m;
}

inline double population_variance(std::span<const double> data) {
    double mean = 0;
    for (double y : data) mean += y;
    mean /= static_cast<double>(data.size());
    double v = 0;
    for (double y : data) v += (y - mean) * (y - mean);
    return v / static_cast<double>(data.size());
}

// Initial parameter guess. RandomObservations draws two distinct observations
// as means; Quantile uses the nearest-rank 25th/75th percentiles (falling
// back to min/max if those coincide). Either way both variances start at the
// overall sample variance and pi at 0.5.
inline MixtureModel init_params(std::span<const double> data, InitPolicy policy, std::uint64_t seed) {
    if (data.size() < 2) throw DegenerateData("init_params: need at least 2 observations");
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    if (*lo == *hi) throw DegenerateData("init_params: all observations identical");

    MixtureModel m;
    m.pi = 0.5;
    m.var1 = m.var2 = std::max(population_variance(data), kVarianceFloor);
    if (policy == InitPolicy::RandomObservations) {
        Rng rng(seed);
        m.mu1 = data[rng.below(data.size())];
        do {
            m.mu2 = data[rng.below(data.size())];
        } while (m.mu2 == m.mu1);
    } else {
        std::vector<double> sorted(data.begin(), data.end());
        std::sort(sorted.begin(), sorted.end());
        auto rank = [&](double p) {
            auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
            return sorted[std::min(std::max<std::size_t>(r, 1), sorted.size()) - 1];
        };
        m.mu1 = rank(0.25);
        m.mu2 = rank(0.75);
        if (m.mu1 == m.mu2) {
            m.mu1 = *lo;
            m.mu2 = *hi;
        }
    }
    return m;
}

// One restart's diagnostics; kept out of MixtureModel so the serialized
// artifact stays exactly the documented 9-field schema.
struct EmRunTrace {
    std::vector<double> ll_path;  // log-likelihood after each (E,M) pair
    bool collapsed = false;
    bool converged = false;
    std::string failure;
};

struct FitReport {
    std::vector<EmRunTrace> runs;
    std::int64_t best_run = -1;
    // most negative observed per-iteration log-likelihood change (>= 0 when
    // ascent held exactly)
    double min_ll_delta = std::numeric_limits<double>::infinity();
};

namespace detail {

struct EmRunResult {
    MixtureModel model;
    EmRunTrace trace;
};

inline EmRunResult run_em_once(std::span<const double> data, const EmConfig& cfg, std::uint64_t seed) {
    EmRunResult r;
    try {
        MixtureModel m = init_params(data, cfg.init_policy, seed);
        double prev_ll = log_likelihood(m, data);
        int floor_hits = 0;
        for (std::int64_t it = 1; it <= cfg.max_iterations; ++it) {
            const auto gamma = e_step(m, data);
            MixtureModel next = m_step(data, gamma);
            const bool on_floor = next.var1 <= kVarianceFloor || next.var2 <= kVarianceFloor;
            floor_hits = on_floor ? floor_hits + 1 : 0;
            if (floor_hits >= 2) throw ComponentCollapse("variance floor hit on consecutive iterations");
            next.log_likelihood = log_likelihood(next, data);
            next.iterations_used = it;
            r.trace.ll_path.push_back(next.log_likelihood);
            const double rel = std::abs(next.log_likelihood - prev_ll) /
                               std::max(std::abs(next.log_likelihood), 1e-300);
            m = next;
            if (rel < cfg.tolerance) {
                m.converged = true;
                break;
            }
            prev_ll = next.log_likelihood;
        }
        if (m.iterations_used == 0) {
            // max_iterations >= 1, so at least one E/M pair always ran
            throw FitFailed("em run made no iterations");
        }
        r.trace.converged = m.converged;
        r.model = m;
    } catch (const Error& e) {
        r.trace.collapsed = true;
        r.trace.failure = e.what();
    }
    return r;
}

}  // namespace detail

// Full EM fit: `restarts` independent runs from sub-seeds mix(seed, r), best
// final log-likelihood wins (ties to the lowest restart index), result
// canonicalized. Restarts run concurrently; selection is deterministic.
inline MixtureModel fit_em(std::span<const double> data, const EmConfig& cfg, FitReport* report = nullptr) {
    cfg.validate();
    std::vector<detail::EmRunResult> runs(static_cast<std::size_t>(cfg.restarts));
    parallel_for_indexed(runs.size(),
                         [&](std::size_t r) { runs[r] = detail::run_em_once(data, cfg, mix_seed(cfg.seed, r)); });

    std::int64_t best = -1;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (runs[r].trace.collapsed) continue;
        if (best < 0 || runs[r].model.log_likelihood > runs[best].model.log_likelihood)
            best = static_cast<std::int64_t>(r);
    }
    if (report) {
        report->runs.clear();
        report->best_run = best;
        report->min_ll_delta = std::numeric_limits<double>::infinity();
        for (auto& r : runs) {
            for (std::size_t i = 1; i < r.trace.ll_path.size(); ++i)
                report->min_ll_delta = std::min(report->min_ll_delta, r.trace.ll_path[i] - r.trace.ll_path[i - 1]);
            report->runs.push_back(std::move(r.trace));
        }
    }
    if (best < 0) {
        std::string detail = "fit_em: every restart collapsed:";
        for (std::size_t r = 0; r < runs.size(); ++r)
            detail += " [restart " + std::to_string(r) + ": " + runs[r].trace.failure + "]";
        throw FitFailed(detail);
    }
    return canonicalize(runs[static_cast<std::size_t>(best)].model);
}

// Draw n observations from the mixture; used by the workload generator and
// synthetic-data tooling. Long draws come from component 2 with probability pi.
inline std::vector<double> sample_mixture(const MixtureModel& m, std::size_t n, Rng& rng,
                                          std::vector<JobClass>* classes = nullptr) {
    std::vector<double> out;
    out.reserve(n);
    if (classes) {
        classes->clear();
        classes->reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const bool is_long = rng.uniform() < m.pi;
        out.push_back(is_long ? rng.normal(m.mu2, m.sigma2()) : rng.normal(m.mu1, m.sigma1()));
        if (classes) classes->push_back(is_long ? JobClass::Long : JobClass::Short);
    }
    return out;
}

}  // namespace jobclass
