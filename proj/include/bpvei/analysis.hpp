#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpvei/environment.hpp"

namespace bpvei {

struct MomentRow {
    Generation n = 0;
    double m = 0.0, sigma2 = 0.0;     // offspring mean / variance of generation n
    double alpha = 0.0, beta2 = 0.0;  // immigration mean / variance of generation n
    double mu = 0.0;                  // prod_{i<=n} m_i
    double nu = 0.0;
    double mean = 0.0;                // E[Z_n]
    double variance = 0.0;            // Var[Z_n] by the one-step recursion
    double mean_double_sum = 0.0;     // E[Z_n] by the closed double sum
    double variance_printed = 0.0;    // Var[Z_n] by the printed closed form
};

/// Rows for n = 0..horizon. Row n carries the laws of generation n and the
/// moments of Z_n, so E[Z_{n+1}] = m_n (E[Z_n] + alpha_n) holds along the table.
struct MomentTable {
    std::vector<MomentRow> rows;
    bool overflow = false;  // some entry is not finite
};

MomentTable moment_table(const BpveiModel& model, Generation horizon);

/// E[Z_1..Z_horizon] by the recursion; element i is E[Z_{i+1}].
std::vector<double> mean_sequence(const BpveiModel& model, Generation horizon);
/// E[Z_{n+1}] = sum_{i=0}^n alpha_{n-i} prod_{j=0}^i m_{n-j}, element i is E[Z_{i+1}].
std::vector<double> mean_sequence_double_sum(const BpveiModel& model, Generation horizon);
/// Var[Z_1..Z_horizon] by Var[Z_{n+1}] = m_n^2 (Var[Z_n] + beta_n^2) + sigma_n^2 (E[Z_n] + alpha_n).
std::vector<double> variance_sequence(const BpveiModel& model, Generation horizon);
/// The printed closed form, with E[Z_{i+1}] in place of E[Z_i] inside the sum.
std::vector<double> variance_sequence_printed(const BpveiModel& model, Generation horizon);

struct NormalizerSequence {
    std::vector<double> partial_sums;  // [k] = sum_{j=0}^k nu_j / mu_{j-1}, k = 0..horizon-1
    std::vector<double> a;             // [n] = a_n for n = 0..horizon; a_0 = 0
    bool vacuous = false;              // every nu_k = 0
};

/// a_{n+1} = (mu_n / 2) sum_{k=0}^n nu_k / mu_{k-1}.
NormalizerSequence normalizer(const BpveiModel& model, Generation horizon);

enum class CriticalityVerdict { critical_evidence, not_critical, vacuous, inconclusive };
std::string to_string(CriticalityVerdict v);

struct CriticalityReport {
    std::vector<Generation> horizons;
    std::vector<double> partial_sums;  // sum_{k<=n} nu_k/mu_{k-1} at each horizon
    std::vector<double> inverse_mu;    // 1/mu_n
    std::vector<double> ratio;         // (1/mu_n) / partial sum
    double last_growth = 0.0;          // relative increase between the last two horizons
    std::optional<double> increment_exponent;  // fitted power of the per-generation increments
    bool divergent = false;
    bool convergent = false;
    bool ratio_vanishing = false;
    CriticalityVerdict verdict = CriticalityVerdict::inconclusive;
};

/// Divergence: growth >= 10% between the last two horizons and increments not
/// decaying faster than n^-1.1 under a log-log fit. Convergence: growth < 10%
/// and fitted exponent < -1.1 (or increments vanishing geometrically).
/// The o(.) condition: ratio strictly decreasing over the last three horizons
/// and below 0.05 at the last one.
CriticalityReport criticality_classify(const BpveiModel& model, const std::vector<Generation>& horizons);

/// Powers of two from 2 up to max_horizon.
std::vector<Generation> dyadic_horizons(Generation max_horizon);

/// Least-squares slope of log(y) against log(x) over positive entries.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class ExtinctionVerdict { certain_extinction, positive_survival, inconclusive };
std::string to_string(ExtinctionVerdict v);
enum class ConditionState { holds, fails, inconclusive };
std::string to_string(ConditionState s);

struct ExtinctionReport {
    std::vector<Generation> horizons;
    std::vector<double> composed_zero;  // f_{-1,n}(0) at each horizon
    std::vector<double> composed_gap;   // 1 - f_{-1,n}(0)
    std::vector<double> partial_sums;   // sum_{j<=n} (1 - h_j(f_j(0))) at each horizon
    std::optional<double> gap_exponent;
    std::optional<double> increment_exponent;  // power-law fit of 1 - h_j(f_j(0)) over the last half
    std::optional<double> analytic_tail;       // bound on sum_{j>horizon} when schedules are power-type
    std::optional<double> series_upper;        // partial sum + analytic tail
    ConditionState composed_limit = ConditionState::inconclusive;  // lim f_{-1,n}(0) = 1
    ConditionState summable = ConditionState::inconclusive;        // sum (1 - h_j(f_j(0))) < inf
    ExtinctionVerdict verdict = ExtinctionVerdict::inconclusive;
};

ExtinctionReport extinction_conditions(const BpveiModel& model, Generation horizon);

/// Analytic bound on sum_{j > from} (1 - h_j(f_j(0))) from power envelopes of the
/// final immigration-mean and offspring-mean schedules (1 - h(f(0)) <= alpha (1 - f(0)) <= alpha m).
std::optional<double> increment_tail_bound(const BpveiModel& model, Generation from);

struct QLowerBounds {
    std::vector<double> bounds;  // [n] running max of F_n(0) prod_{j=n}^{H} h_j(f_j(0)) * tail factor
    double q_hat = 0.0;
    double tail_factor = 1.0;    // lower bound on prod_{j>H} h_j(f_j(0)); 1 when truncated
    bool truncated = true;       // no analytic tail was available
};

QLowerBounds q_lower_bounds(const BpveiModel& model, Generation horizon);

}  // namespace bpvei
