#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "bpvei/errors.hpp"

namespace bpvei {

using Generation = std::int64_t;
using Count = std::int64_t;

/// Generation-indexed scalar parameter: a constant, a power law
/// coeff * (n + offset)^exponent, or a finite table followed by a fallback.
struct ParamSchedule {
    enum class Kind { constant, power, table };

    Kind kind = Kind::constant;
    double value = 0.0;
    double coeff = 1.0;
    double exponent = 0.0;
    Generation offset = 0;
    std::vector<double> entries;
    std::shared_ptr<const ParamSchedule> fallback;

    static ParamSchedule constant(double v);
    static ParamSchedule power(double coeff, double exponent, Generation offset = 0);
    static ParamSchedule table(std::vector<double> entries, ParamSchedule fallback);

    double at(Generation n) const;

    /// Limit as n -> infinity when it exists and is finite.
    std::optional<double> limit() const;

    /// Decay envelope valid on n >= from: value(n) <= scale * n^exponent.
    /// Only defined for constant and power tails.
    struct Envelope {
        double scale;
        double exponent;
    };
    std::optional<Envelope> envelope(Generation from) const;
};

enum class Family { bernoulli_shift, linear_fractional, geometric, poisson, finite_pmf };

std::string_view family_name(Family family);
Family parse_family(std::string_view name);
/// JSON key of the scalar parameter ("p", "m", "rate"); empty for finite_pmf.
std::string_view parameter_name(Family family);

struct LawSpec {
    Family family = Family::bernoulli_shift;
    ParamSchedule param;
    std::vector<double> probs;  // finite_pmf only

    static LawSpec bernoulli_shift(ParamSchedule p);
    static LawSpec geometric(ParamSchedule p);
    static LawSpec linear_fractional(ParamSchedule m);
    static LawSpec poisson(ParamSchedule rate);
    static LawSpec finite_pmf(std::vector<double> probs);
};

/// A value with an absolute error bound.
struct Bounded {
    double value = 0.0;
    double bound = 0.0;
};

/// One generation's law on the nonnegative integers. Immutable and cheap to copy.
class LawInstance {
public:
    /// Throws ValidationError when the parameter is not admissible.
    static LawInstance make(Family family, double parameter, std::vector<double> probs = {});

    Family family() const noexcept { return family_; }
    double parameter() const noexcept { return param_; }
    const std::vector<double>& probs() const;

    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    /// f''(1)
    double factorial_moment2() const noexcept { return fact2_; }
    /// f''(1) / f'(1)^2
    double nu() const noexcept { return fact2_ / (mean_ * mean_); }
    double mass_at_zero() const noexcept { return p0_; }
    double second_moment() const noexcept { return variance_ + mean_ * mean_; }
    bool degenerate() const noexcept { return variance_ == 0.0; }
    std::optional<Count> support_max() const noexcept;

    /// Generating function f(s) on [0, 1].
    double pgf(double s) const;
    /// 1 - f(1 - u), evaluated without cancellation for small u.
    double complement(double u) const;
    /// m*u - (1 - f(1 - u)) >= 0, the numerator of the shape function.
    double excess(double u) const;

    double pmf(Count k) const;
    /// P[X > k]
    double tail_mass(Count k) const;
    /// Probability vector p[0..L] with L the first index where P[X > L] <= tail_floor
    /// (capped at max_len entries).
    std::vector<double> pmf_vector(std::size_t max_len, double tail_floor) const;
    /// E[X^2; X > t] with a certified bound on the neglected remainder.
    Bounded second_moment_above(double t) const;

    template <class Rng>
    Count sample(Rng& rng) const;

    /// Sum of `count` independent draws, using the closed-form law of the sum.
    template <class Rng>
    Count sample_sum(Count count, Rng& rng) const;

private:
    struct FiniteData {
        std::vector<double> probs;
        std::vector<double> cdf;
        std::size_t last = 0;  // largest index with positive mass
    };

    Family family_ = Family::bernoulli_shift;
    double param_ = 0.0;
    double mean_ = 0.0;
    double variance_ = 0.0;
    double fact2_ = 0.0;
    double p0_ = 0.0;
    std::shared_ptr<const FiniteData> finite_;

    // success probability of the geometric representation (geometric, linear_fractional)
    double geo_p() const noexcept { return family_ == Family::geometric ? param_ : 1.0 / (1.0 + param_); }
};

/// Instantiate a law at generation n. Violations name the generation and parameter.
LawInstance instantiate(const LawSpec& spec, Generation n);

struct RegularityEntry {
    double epsilon = 0.0;
    bool satisfied = false;
    std::optional<double> c;              // smallest grid constant that works
    std::optional<Generation> violating;  // generation where the largest grid constant fails
    bool degenerate = false;              // both sides vanish (P[X >= 2] = 0)
    double max_error_bound = 0.0;         // largest certified truncation bound seen
};

struct RegularityReport {
    Generation horizon = 0;
    bool limit_law_checked = false;
    std::vector<double> grid;
    std::vector<RegularityEntry> entries;
    bool satisfied() const;
};

/// Grid over c used by regularity_check: 2^(k/2) for k = -2..40.
std::vector<double> regularity_grid();

/// Evidence for E[X^2; X > c(1+EX)] <= eps * E[X^2; X >= 2] uniformly in n <= horizon.
RegularityReport regularity_check(const LawSpec& offspring, const std::vector<double>& epsilons, Generation horizon);

/// Same check over an explicit list of laws (one per generation).
RegularityReport regularity_check(const std::vector<LawInstance>& laws, const std::vector<double>& epsilons);

// ---------------------------------------------------------------------------

template <class Rng>
Count LawInstance::sample(Rng& rng) const {
    switch (family_) {
        case Family::bernoulli_shift:
            return rng.uniform() < param_ ? 1 : 0;
        case Family::geometric:
        case Family::linear_fractional:
            return std::geometric_distribution<Count>(geo_p())(rng);
        case Family::poisson:
            return std::poisson_distribution<Count>(param_)(rng);
        case Family::finite_pmf: {
            const auto& cdf = finite_->cdf;
            const double u = rng.uniform();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            if (it == cdf.end()) --it;
            return static_cast<Count>(it - cdf.begin());
        }
    }
    return 0;
}

template <class Rng>
Count LawInstance::sample_sum(Count count, Rng& rng) const {
    if (count <= 0) return 0;
    switch (family_) {
        case Family::bernoulli_shift:
            if (param_ >= 1.0) return count;
            return std::binomial_distribution<Count>(count, param_)(rng);
        case Family::geometric:
        case Family::linear_fractional:
            return std::negative_binomial_distribution<Count>(count, geo_p())(rng);
        case Family::poisson:
            return std::poisson_distribution<Count>(param_ * static_cast<double>(count))(rng);
        case Family::finite_pmf: {
            // multinomial counts by sequential conditional binomials
            const auto& p = finite_->probs;
            const std::size_t last = finite_->last;
            Count remaining = count;
            double rest = 1.0;
            Count total = 0;
            for (std::size_t k = 0; k <= last && remaining > 0; ++k) {
                if (p[k] <= 0.0) continue;
                Count hits = remaining;
                const double cond = p[k] / rest;
                if (k < last && cond < 1.0) hits = std::binomial_distribution<Count>(remaining, cond)(rng);
                total += hits * static_cast<Count>(k);
                remaining -= hits;
                rest -= p[k];
            }
            return total;
        }
    }
    return 0;
}

}  // namespace bpvei
