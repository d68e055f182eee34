#include "bpvei/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpvei/pgf.hpp"

namespace bpvei {

namespace {

constexpr double kGrowthThreshold = 0.10;
constexpr double kSummableExponent = -1.1;
constexpr double kRatioCeiling = 0.05;

std::size_t idx(Generation n) { return static_cast<std::size_t>(n); }

// Power envelope of the mean of a law spec on generations >= from.
std::optional<ParamSchedule::Envelope> mean_envelope(const LawSpec& spec, Generation from) {
    switch (spec.family) {
        case Family::finite_pmf:
            return ParamSchedule::Envelope{instantiate(spec, 0).mean(), 0.0};
        case Family::bernoulli_shift:
        case Family::poisson:
        case Family::linear_fractional:
            return spec.param.envelope(from);
        case Family::geometric:
            if (spec.param.kind == ParamSchedule::Kind::constant)
                return ParamSchedule::Envelope{instantiate(spec, 0).mean(), 0.0};
            return std::nullopt;
    }
    return std::nullopt;
}

// 1 - h_j(f_j(0)) for one generation, without cancellation
double escape_increment(const LawInstance& f, const LawInstance& h) {
    return h.complement(f.complement(1.0));
}

}  // namespace

// ------------------------------------------------------------------ moments

MomentTable moment_table(const BpveiModel& model, Generation horizon) {
    if (horizon < 0) throw DomainError("moment table needs horizon >= 0");
    const LawSequence laws(model, horizon + 1);
    MomentTable table;
    table.rows.resize(idx(horizon) + 1);
    double mu = 1.0;
    for (Generation n = 0; n <= horizon; ++n) {
        MomentRow& r = table.rows[idx(n)];
        const LawInstance& f = laws.offspring(n);
        const LawInstance& h = laws.immigration(n);
        r.n = n;
        r.m = f.mean();
        r.sigma2 = f.variance();
        r.alpha = h.mean();
        r.beta2 = h.variance();
        r.nu = f.nu();
        mu *= r.m;
        r.mu = mu;
        if (n == 0) continue;
        const MomentRow& p = table.rows[idx(n - 1)];
        r.mean = p.m * (p.mean + p.alpha);
        r.variance = p.m * p.m * (p.variance + p.beta2) + p.sigma2 * (p.mean + p.alpha);
    }

    // closed double-sum forms, evaluated term by term
    for (Generation n = 0; n < horizon; ++n) {
        double mean = 0.0;
        for (Generation i = 0; i <= n; ++i) {
            double prod = 1.0;
            for (Generation j = 0; j <= i; ++j) prod *= table.rows[idx(n - j)].m;
            mean += table.rows[idx(n - i)].alpha * prod;
        }
        table.rows[idx(n + 1)].mean_double_sum = mean;
    }
    for (Generation n = 0; n < horizon; ++n) {
        double immig = 0.0, repro = 0.0;
        for (Generation i = 0; i <= n; ++i) {
            double sq_from_i = 1.0;  // prod_{j=i}^n m_j^2
            for (Generation j = i; j <= n; ++j) sq_from_i *= table.rows[idx(j)].m * table.rows[idx(j)].m;
            const MomentRow& ri = table.rows[idx(i)];
            immig += ri.beta2 * sq_from_i;
            const double sq_after_i = sq_from_i / (ri.m * ri.m);  // prod_{j=i+1}^n m_j^2
            repro += sq_after_i * ri.sigma2 * (ri.alpha + table.rows[idx(i + 1)].mean_double_sum);
        }
        table.rows[idx(n + 1)].variance_printed = immig + repro;
    }
    for (const MomentRow& r : table.rows)
        if (!std::isfinite(r.mean) || !std::isfinite(r.variance) || !std::isfinite(r.mu)) table.overflow = true;
    return table;
}

namespace {
std::vector<double> column(const BpveiModel& model, Generation horizon, double MomentRow::*field) {
    if (horizon < 1) throw DomainError("moment sequences need horizon >= 1");
    const MomentTable t = moment_table(model, horizon);
    std::vector<double> out;
    out.reserve(idx(horizon));
    for (Generation n = 1; n <= horizon; ++n) out.push_back(t.rows[idx(n)].*field);
    return out;
}
}  // namespace

std::vector<double> mean_sequence(const BpveiModel& model, Generation horizon) {
    return column(model, horizon, &MomentRow::mean);
}
std::vector<double> mean_sequence_double_sum(const BpveiModel& model, Generation horizon) {
    return column(model, horizon, &MomentRow::mean_double_sum);
}
std::vector<double> variance_sequence(const BpveiModel& model, Generation horizon) {
    return column(model, horizon, &MomentRow::variance);
}
std::vector<double> variance_sequence_printed(const BpveiModel& model, Generation horizon) {
    return column(model, horizon, &MomentRow::variance_printed);
}

// --------------------------------------------------------------- normalizer

NormalizerSequence normalizer(const BpveiModel& model, Generation horizon) {
    if (horizon < 1) throw DomainError("normalizer needs horizon >= 1");
    NormalizerSequence out;
    out.partial_sums.resize(idx(horizon));
    out.a.assign(idx(horizon) + 1, 0.0);
    double mu_prev = 1.0;  // mu_{k-1}
    double sum = 0.0;
    bool any_nu = false;
    for (Generation k = 0; k < horizon; ++k) {
        const LawInstance f = model.law_at(Role::offspring, k);
        any_nu = any_nu || f.nu() > 0.0;
        sum += f.nu() / mu_prev;
        out.partial_sums[idx(k)] = sum;
        const double mu_k = mu_prev * f.mean();
        out.a[idx(k + 1)] = mu_k / 2.0 * sum;
        mu_prev = mu_k;
    }
    out.vacuous = !any_nu;
    return out;
}

// -------------------------------------------------------------- criticality

std::string to_string(CriticalityVerdict v) {
    switch (v) {
        case CriticalityVerdict::critical_evidence: return "critical-evidence";
        case CriticalityVerdict::not_critical: return "not-critical";
        case CriticalityVerdict::vacuous: return "vacuous";
        case CriticalityVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::vector<Generation> dyadic_horizons(Generation max_horizon) {
    std::vector<Generation> out;
    for (Generation h = 2; h <= max_horizon; h *= 2) out.push_back(h);
    return out;
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2) return std::nullopt;
    const double c = static_cast<double>(count);
    const double denom = c * sxx - sx * sx;
    if (denom <= 0.0) return std::nullopt;
    return (c * sxy - sx * sy) / denom;
}

CriticalityReport criticality_classify(const BpveiModel& model, const std::vector<Generation>& horizons) {
    if (horizons.size() < 3) throw DomainError("criticality needs at least three horizons");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (horizons[i] <= horizons[i - 1]) throw DomainError("criticality horizons must increase");
    CriticalityReport rep;
    rep.horizons = horizons;
    const Generation top = horizons.back();

    std::vector<double> increments(idx(top) + 1);
    std::vector<double> inv_mu(idx(top) + 1);
    double mu_prev = 1.0;
    bool any_nu = false;
    for (Generation k = 0; k <= top; ++k) {
        const LawInstance f = model.law_at(Role::offspring, k);
        any_nu = any_nu || f.nu() > 0.0;
        increments[idx(k)] = f.nu() / mu_prev;
        mu_prev *= f.mean();
        inv_mu[idx(k)] = 1.0 / mu_prev;
    }
    double sum = 0.0;
    std::size_t h = 0;
    for (Generation k = 0; k <= top; ++k) {
        sum += increments[idx(k)];
        if (k == horizons[h]) {
            rep.partial_sums.push_back(sum);
            rep.inverse_mu.push_back(inv_mu[idx(k)]);
            rep.ratio.push_back(sum > 0.0 ? inv_mu[idx(k)] / sum : std::numeric_limits<double>::infinity());
            ++h;
        }
    }
    if (!any_nu) {
        rep.verdict = CriticalityVerdict::vacuous;
        return rep;
    }

    const std::size_t last = rep.partial_sums.size() - 1;
    rep.last_growth = (rep.partial_sums[last] - rep.partial_sums[last - 1]) / rep.partial_sums[last - 1];

    std::vector<double> xs, ys;
    bool tail_vanished = true;
    for (Generation k = top / 2; k <= top; ++k) {
        xs.push_back(static_cast<double>(k));
        ys.push_back(increments[idx(k)]);
        tail_vanished = tail_vanished && increments[idx(k)] == 0.0;
    }
    rep.increment_exponent = loglog_slope(xs, ys);

    const bool grows = rep.last_growth >= kGrowthThreshold;
    const bool non_summable = rep.increment_exponent && *rep.increment_exponent >= kSummableExponent;
    const bool summable = tail_vanished || (rep.increment_exponent && *rep.increment_exponent < kSummableExponent);
    rep.divergent = grows && non_summable;
    rep.convergent = !grows && summable;

    const auto& r = rep.ratio;
    rep.ratio_vanishing = r[last] < r[last - 1] && r[last - 1] < r[last - 2] && r[last] < kRatioCeiling;
    const bool ratio_rising = r[last] > r[last - 1] && r[last - 1] > r[last - 2];
    // subcritical: 1/mu_n keeps pace with the sum, the ratio settles at a positive level
    const bool ratio_settled = r[last] >= kRatioCeiling && std::abs(r[last] - r[last - 1]) <= 0.01 * r[last];

    if (rep.divergent && rep.ratio_vanishing)
        rep.verdict = CriticalityVerdict::critical_evidence;
    else if (rep.convergent || (rep.divergent && (ratio_rising || ratio_settled)))
        rep.verdict = CriticalityVerdict::not_critical;
    else
        rep.verdict = CriticalityVerdict::inconclusive;
    return rep;
}

// --------------------------------------------------------------- extinction

std::string to_string(ExtinctionVerdict v) {
    switch (v) {
        case ExtinctionVerdict::certain_extinction: return "certain-extinction-evidence";
        case ExtinctionVerdict::positive_survival: return "positive-survival-evidence";
        case ExtinctionVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string to_string(ConditionState s) {
    switch (s) {
        case ConditionState::holds: return "holds";
        case ConditionState::fails: return "fails";
        case ConditionState::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::optional<double> increment_tail_bound(const BpveiModel& model, Generation from) {
    from = std::max<Generation>(from, 1);
    const Stage& f_stage = model.offspring().stages().back();
    const Stage& h_stage = model.immigration().stages().back();
    if (from + 1 < f_stage.from || from + 1 < h_stage.from) return std::nullopt;
    const auto f_env = mean_envelope(f_stage.law, from);
    const auto h_env = mean_envelope(h_stage.law, from);
    if (!f_env || !h_env) return std::nullopt;
    const double e = f_env->exponent + h_env->exponent;
    if (!(e < -1.0)) return std::nullopt;
    // sum_{j > from} C j^e <= C from^{e+1} / (-e-1)
    const double c = f_env->scale * h_env->scale;
    return c * std::pow(static_cast<double>(from), e + 1.0) / (-e - 1.0);
}

ExtinctionReport extinction_conditions(const BpveiModel& model, Generation horizon) {
    if (horizon < 2) throw DomainError("extinction conditions need horizon >= 2");
    ExtinctionReport rep;
    rep.horizons = dyadic_horizons(horizon);
    if (rep.horizons.empty() || rep.horizons.back() != horizon) rep.horizons.push_back(horizon);
    const LawSequence laws(model, horizon + 1);

    for (Generation n : rep.horizons) {
        const PgfValue v = compose_offspring(laws, -1, n, PgfValue{0.0, 1.0});
        rep.composed_zero.push_back(v.value);
        rep.composed_gap.push_back(v.complement);
    }

    std::vector<double> increments(idx(horizon) + 1);
    for (Generation j = 0; j <= horizon; ++j) increments[idx(j)] = escape_increment(laws.offspring(j), laws.immigration(j));
    double sum = 0.0;
    std::size_t h = 0;
    for (Generation j = 0; j <= horizon; ++j) {
        sum += increments[idx(j)];
        if (h < rep.horizons.size() && j == rep.horizons[h]) {
            rep.partial_sums.push_back(sum);
            ++h;
        }
    }

    // condition 1: f_{-1,n}(0) -> 1
    {
        const std::size_t last = rep.composed_gap.size() - 1;
        std::vector<double> xs, ys;
        for (std::size_t i = rep.horizons.size() / 2; i < rep.horizons.size(); ++i) {
            xs.push_back(static_cast<double>(rep.horizons[i]));
            ys.push_back(rep.composed_gap[i]);
        }
        rep.gap_exponent = loglog_slope(xs, ys);
        const double g_last = rep.composed_gap[last];
        const double g_prev = last > 0 ? rep.composed_gap[last - 1] : 1.0;
        if (g_last <= 1e-12)
            rep.composed_limit = ConditionState::holds;
        else if (g_last < g_prev && rep.gap_exponent && *rep.gap_exponent <= -0.5)
            rep.composed_limit = ConditionState::holds;
        else if (g_last > 1e-6 && std::abs(g_prev - g_last) <= 0.01 * g_last)
            rep.composed_limit = ConditionState::fails;
    }

    // condition 2: sum (1 - h_j(f_j(0))) < infinity
    {
        std::vector<double> xs, ys;
        for (Generation j = std::max<Generation>(horizon / 2, 1); j <= horizon; ++j) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(increments[idx(j)]);
        }
        rep.increment_exponent = loglog_slope(xs, ys);
        rep.analytic_tail = increment_tail_bound(model, horizon);
        if (rep.analytic_tail) {
            rep.series_upper = sum + *rep.analytic_tail;
            rep.summable = ConditionState::holds;
        } else if (rep.increment_exponent && *rep.increment_exponent >= kSummableExponent) {
            rep.summable = ConditionState::fails;
        }
    }

    if (rep.composed_limit == ConditionState::holds && rep.summable == ConditionState::holds)
        rep.verdict = ExtinctionVerdict::certain_extinction;
    else if (rep.composed_limit == ConditionState::fails || rep.summable == ConditionState::fails)
        rep.verdict = ExtinctionVerdict::positive_survival;
    return rep;
}

QLowerBounds q_lower_bounds(const BpveiModel& model, Generation horizon) {
    if (horizon < 1) throw DomainError("q lower bounds need horizon >= 1");
    const LawSequence laws(model, horizon + 1);
    QLowerBounds out;

    // suffix[n] = sum_{j=n}^{H} log h_j(f_j(0))
    std::vector<double> suffix(idx(horizon) + 2, 0.0);
    double d_max_tail = 0.0;
    for (Generation j = horizon; j >= 0; --j) {
        const LawInstance& f = laws.offspring(j);
        const LawInstance& h = laws.immigration(j);
        const double d = escape_increment(f, h);
        const double log_stay = d < 0.5 ? std::log1p(-d) : std::log(h.pgf(f.pgf(0.0)));
        suffix[idx(j)] = suffix[idx(j) + 1] + log_stay;
    }

    double log_tail = 0.0;
    if (auto t = increment_tail_bound(model, horizon)) {
        // d_j <= C j^e is decreasing, so every later increment is at most its value at H+1
        const Stage& f_stage = model.offspring().stages().back();
        const Stage& h_stage = model.immigration().stages().back();
        const auto fe = mean_envelope(f_stage.law, horizon);
        const auto he = mean_envelope(h_stage.law, horizon);
        d_max_tail = fe->scale * he->scale * std::pow(static_cast<double>(horizon + 1), fe->exponent + he->exponent);
        if (d_max_tail < 1.0) {
            log_tail = -*t / (1.0 - d_max_tail);
            out.truncated = false;
        }
    }
    out.tail_factor = std::exp(log_tail);

    out.bounds.resize(idx(horizon) + 1);
    double best = 0.0;
    for (Generation n = 0; n <= horizon; ++n) {
        const double log_zero = n == 0 ? 0.0 : process_pgf(laws, n, PgfValue{0.0, 1.0}).log_value;
        const double b = std::exp(log_zero + suffix[idx(n)] + log_tail);
        best = std::max(best, std::min(1.0, b));
        out.bounds[idx(n)] = best;
    }
    out.q_hat = best;
    return out;
}

}  // namespace bpvei
