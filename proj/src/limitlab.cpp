#include "bpvei/limitlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bpvei/format.hpp"
#include "bpvei/pgf.hpp"

namespace bpvei {

// ------------------------------------------------------------ special functions

namespace {

double gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Lentz continued fraction
double gamma_continued_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_cdf(double shape, double x) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be > 0");
    if (std::isnan(x)) throw DomainError("gamma_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double p = x < shape + 1.0 ? gamma_series(shape, x) : 1.0 - gamma_continued_fraction(shape, x);
    return std::clamp(p, 0.0, 1.0);
}

double gamma_quantile(double shape, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("gamma_quantile: p outside [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = std::max(1.0, shape);
    while (gamma_cdf(shape, hi) < p) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gamma_cdf(shape, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> gamma_inverse_cdf_sample(double shape, std::size_t count, std::uint64_t seed) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        Xoshiro256 rng = make_stream(seed, i);
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        out[i] = gamma_quantile(shape, u);
    }
    return out;
}

// ------------------------------------------------------------------------- KS

double ks_statistic(const std::vector<double>& x, const std::function<double(double)>& cdf) {
    if (x.empty()) throw DomainError("ks_statistic: empty sample");
    if (!std::is_sorted(x.begin(), x.end())) throw DomainError("ks_statistic: sample not sorted");
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

double ks_statistic(const EmpiricalDistribution& sample, const std::function<double(double)>& cdf) {
    return ks_statistic(sample.values, cdf);
}

double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_one_sample(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

double ks_critical_two_sample(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n), b = static_cast<double>(m);
    return 1.628 * std::sqrt((a + b) / (a * b));
}

// -------------------------------------------------------------------- Laplace

LaplaceProbe empirical_laplace(const std::vector<double>& sample, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("laplace probe needs lambda > 0");
    if (sample.empty()) throw DomainError("laplace probe on an empty sample");
    LaplaceProbe p;
    p.lambda = lambda;
    p.target = std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double v : sample) sum += std::exp(-lambda * v);
    const double n = static_cast<double>(sample.size());
    p.empirical = sum / n;
    double ss = 0.0;
    for (double v : sample) {
        const double e = std::exp(-lambda * v) - p.empirical;
        ss += e * e;
    }
    p.stderr_ = sample.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return p;
}

LaplaceProbe empirical_laplace(const EmpiricalDistribution& sample, double lambda) {
    return empirical_laplace(sample.values, lambda);
}

// ------------------------------------------------------------------ audit

namespace {

// follow table fallbacks to the schedule that governs large n
const ParamSchedule& governing(const ParamSchedule& s) {
    const ParamSchedule* p = &s;
    while (p->kind == ParamSchedule::Kind::table && p->fallback) p = p->fallback.get();
    return *p;
}

struct LimitLaw {
    std::optional<LawInstance> law;
    bool vanishes = false;  // parameter drives the mean to 0
    bool diverges = false;  // parameter grows without bound
};

LimitLaw limit_law(const LawSpec& spec) {
    LimitLaw out;
    if (spec.family == Family::finite_pmf) {
        out.law = LawInstance::make(Family::finite_pmf, 0.0, spec.probs);
        return out;
    }
    const ParamSchedule& g = governing(spec.param);
    if (auto lim = spec.param.limit()) {
        try {
            out.law = LawInstance::make(spec.family, *lim);
        } catch (const ValidationError&) {
            // boundary limit: p -> 0 / rate -> 0 / m -> 0 send the mean to 0,
            // geometric p -> 0 sends it to infinity
            if (spec.family == Family::geometric)
                out.diverges = *lim == 0.0;
            else
                out.vanishes = *lim == 0.0;
        }
    } else if (g.kind == ParamSchedule::Kind::power && g.exponent > 0.0 && g.coeff > 0.0) {
        out.diverges = true;
    }
    return out;
}

// nu depends only on the family except for finite_pmf
std::optional<double> family_nu(const LawSpec& spec) {
    switch (spec.family) {
        case Family::bernoulli_shift: return 0.0;
        case Family::geometric:
        case Family::linear_fractional: return 2.0;
        case Family::poisson: return 1.0;
        case Family::finite_pmf: return LawInstance::make(Family::finite_pmf, 0.0, spec.probs).nu();
    }
    return std::nullopt;
}

std::string num(double v) { return format_number(v); }

}  // namespace

bool AssumptionAudit::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AssumptionCheck& c) { return c.state == ConditionState::holds; });
}

std::optional<double> AssumptionAudit::shape() const {
    if (!nu || !alpha || !(*nu > 0.0) || !(*alpha > 0.0)) return std::nullopt;
    return 2.0 * *alpha / *nu;
}

AssumptionAudit assumption_audit(const BpveiModel& model, Generation horizon) {
    if (horizon < 1) throw DomainError("audit horizon must be >= 1");
    AssumptionAudit a;
    a.horizon = horizon;
    const LawSpec& off_tail = model.offspring().tail_spec();
    const LawSpec& imm_tail = model.immigration().tail_spec();
    const LimitLaw imm_limit = limit_law(imm_tail);

    // nu_n -> nu > 0
    {
        AssumptionCheck c{"nu_n -> nu > 0", ConditionState::inconclusive, std::nullopt, ""};
        a.nu = family_nu(off_tail);
        c.value = a.nu;
        if (a.nu) {
            c.state = *a.nu > 0.0 ? ConditionState::holds : ConditionState::fails;
            c.evidence = "final offspring stage " + std::string(family_name(off_tail.family)) + " has nu = " + num(*a.nu);
        }
        a.checks.push_back(c);
    }
    // alpha_n -> alpha > 0
    {
        AssumptionCheck c{"alpha_n -> alpha > 0", ConditionState::inconclusive, std::nullopt, ""};
        if (imm_limit.law) {
            a.alpha = imm_limit.law->mean();
            c.state = *a.alpha > 0.0 ? ConditionState::holds : ConditionState::fails;
            c.evidence = "limit of the immigration schedule gives alpha = " + num(*a.alpha);
        } else if (imm_limit.vanishes) {
            a.alpha = 0.0;
            c.state = ConditionState::fails;
            c.evidence = "immigration mean tends to 0";
        } else if (imm_limit.diverges) {
            c.state = ConditionState::fails;
            c.evidence = "immigration mean diverges";
        } else {
            c.evidence = "immigration schedule has no structural limit";
        }
        c.value = a.alpha;
        a.checks.push_back(c);
    }
    // tau = inf h_n(0) > 0 and sup beta_n^2 < inf
    {
        double tau = 1.0, sup_b2 = 0.0;
        for (Generation n = 0; n <= horizon; ++n) {
            const LawInstance h = model.law_at(Role::immigration, n);
            tau = std::min(tau, h.mass_at_zero());
            sup_b2 = std::max(sup_b2, h.variance());
        }
        AssumptionCheck t{"tau = inf h_n(0) > 0", ConditionState::inconclusive, std::nullopt, ""};
        AssumptionCheck b{"sup beta_n^2 < inf", ConditionState::inconclusive, std::nullopt, ""};
        if (imm_limit.law) {
            tau = std::min(tau, imm_limit.law->mass_at_zero());
            sup_b2 = std::max(sup_b2, imm_limit.law->variance());
            t.state = tau > 0.0 ? ConditionState::holds : ConditionState::fails;
            b.state = ConditionState::holds;
            t.evidence = "infimum over generations 0.." + std::to_string(horizon) + " and the limit law";
            b.evidence = "supremum over generations 0.." + std::to_string(horizon) + " and the limit law";
        } else if (imm_limit.vanishes) {
            t.state = tau > 0.0 ? ConditionState::holds : ConditionState::fails;
            b.state = ConditionState::holds;
            t.evidence = "immigration vanishes, h_n(0) -> 1";
            b.evidence = "immigration vanishes, beta_n^2 -> 0";
        } else if (imm_limit.diverges) {
            tau = 0.0;
            sup_b2 = std::numeric_limits<double>::infinity();
            t.state = ConditionState::fails;
            b.state = ConditionState::fails;
            t.evidence = "immigration parameter diverges, h_n(0) -> 0";
            b.evidence = "immigration parameter diverges";
        } else {
            t.state = tau > 0.0 ? ConditionState::inconclusive : ConditionState::fails;
            t.evidence = "no structural limit; horizon infimum only";
            b.evidence = "no structural limit; horizon supremum only";
        }
        a.tau = tau;
        a.sup_beta2 = sup_b2;
        t.value = tau;
        b.value = sup_b2;
        a.checks.push_back(t);
        a.checks.push_back(b);
    }
    // criticality
    {
        const CriticalityReport cr = criticality_classify(model, dyadic_horizons(std::max<Generation>(horizon, 8)));
        a.criticality = cr.verdict;
        AssumptionCheck c{"critical", ConditionState::inconclusive, std::nullopt, "verdict " + to_string(cr.verdict)};
        if (!cr.ratio.empty()) c.value = cr.ratio.back();
        if (cr.verdict == CriticalityVerdict::critical_evidence)
            c.state = ConditionState::holds;
        else if (cr.verdict == CriticalityVerdict::not_critical || cr.verdict == CriticalityVerdict::vacuous)
            c.state = ConditionState::fails;
        a.checks.push_back(c);
    }
    // regularity of the offspring laws
    {
        std::vector<LawInstance> laws;
        laws.reserve(static_cast<std::size_t>(horizon) + 2);
        for (Generation n = 0; n <= horizon; ++n) laws.push_back(model.law_at(Role::offspring, n));
        const LimitLaw off_limit = limit_law(off_tail);
        if (off_limit.law) laws.push_back(*off_limit.law);
        const RegularityReport rr = regularity_check(laws, {0.1, 0.01, 0.001});
        a.regular = rr.satisfied();
        AssumptionCheck c{"offspring regularity", a.regular ? ConditionState::holds : ConditionState::fails,
                          std::nullopt, ""};
        if (!rr.entries.empty() && rr.entries.back().c) c.value = *rr.entries.back().c;
        c.evidence = a.regular ? "grid constant found for eps = 0.1, 0.01, 0.001" : "no grid constant for some eps";
        a.checks.push_back(c);
    }
    return a;
}

// -------------------------------------------------------------- gamma limit

GammaLimitReport verify_gamma_limit(const BpveiModel& model, const GammaLimitOptions& options) {
    if (options.n_list.empty()) throw DomainError("gamma-limit needs at least one n");
    if (options.replications < 1) throw DomainError("replications must be >= 1");
    for (double l : options.lambdas)
        if (!(l > 0.0)) throw DomainError("laplace probe needs lambda > 0");
    std::vector<Generation> ns = options.n_list;
    for (Generation n : ns)
        if (n < 1) throw DomainError("gamma-limit n must be >= 1");
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    const Generation top = ns.back();

    GammaLimitReport r;
    r.model = model.name();
    r.seed = options.seed;
    r.replications = options.replications;
    r.audit = assumption_audit(model, std::max<Generation>(options.audit_horizon, 1));
    r.shape = r.audit.shape();

    const NormalizerSequence norm = normalizer(model, top);
    const std::vector<double> exact = exact_survival_curve(model, top);

    // endpoint samples for all n share the streams (seed, replication), so one
    // run recorded at every n gives the same draws as separate runs
    SimConfig cfg;
    cfg.horizon = top;
    cfg.replications = options.replications;
    cfg.seed = options.seed;
    cfg.record = ns;
    cfg.threads = options.threads;
    const auto samples = checkpoint_samples(model, cfg);

    r.applicable = r.shape.has_value() && !norm.vacuous;
    for (Generation n : ns) {
        const EmpiricalDistribution& d = samples.at(n);
        GammaLimitPoint p;
        p.n = n;
        p.a_n = norm.a[static_cast<std::size_t>(n)];
        p.replications = d.replications;
        p.exploded = d.exploded;
        p.ks_critical = ks_critical_one_sample(d.values.size());
        const auto alive = static_cast<std::size_t>(
            d.values.end() - std::upper_bound(d.values.begin(), d.values.end(), 0.0)) + d.exploded;
        const double rr = static_cast<double>(d.replications);
        p.survival = static_cast<double>(alive) / rr;
        p.survival_stderr = std::sqrt(p.survival * (1.0 - p.survival) / rr);
        p.survival_exact = exact[static_cast<std::size_t>(n)];
        if (r.applicable && p.a_n > 0.0 && !d.values.empty()) {
            const EmpiricalDistribution z = d.normalized(p.a_n);
            const double shape = *r.shape;
            p.ks = ks_statistic(z, [shape](double x) { return gamma_cdf(shape, x); });
            for (double l : options.lambdas) {
                LaplaceProbe probe = empirical_laplace(z, l);
                probe.target = std::pow(1.0 + l, -shape);
                p.laplace.push_back(probe);
            }
        }
        r.points.push_back(std::move(p));
    }
    return r;
}

nlohmann::json GammaLimitReport::to_json() const {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json checks = json::array();
    for (const auto& c : audit.checks)
        checks.push_back({{"name", c.name}, {"state", to_string(c.state)}, {"value", opt(c.value)},
                          {"evidence", c.evidence}});
    json j;
    j["model"] = model;
    j["seed"] = seed;
    j["replications"] = replications;
    j["applicable"] = applicable;
    j["alpha"] = opt(audit.alpha);
    j["nu"] = opt(audit.nu);
    j["shape"] = opt(shape);
    j["assumptions"] = {{"tau", audit.tau},
                        {"sup_beta2", audit.sup_beta2},
                        {"criticality", to_string(audit.criticality)},
                        {"regular", audit.regular},
                        {"all_pass", audit.all_pass()},
                        {"checks", checks}};
    json pts = json::array();
    for (const auto& p : points) {
        json probes = json::array();
        for (const auto& l : p.laplace)
            probes.push_back({{"lambda", l.lambda}, {"empirical", l.empirical}, {"target", l.target},
                              {"stderr", l.stderr_}});
        pts.push_back({{"n", p.n},
                       {"a_n", p.a_n},
                       {"replications", p.replications},
                       {"exploded", p.exploded},
                       {"ks", opt(p.ks)},
                       {"ks_critical_1pct", p.ks_critical},
                       {"laplace", probes},
                       {"survival", {{"estimate", p.survival}, {"stderr", p.survival_stderr}, {"exact", p.survival_exact}}}});
    }
    j["points"] = pts;
    return j;
}

std::string GammaLimitReport::to_csv() const {
    std::ostringstream os;
    os << "n,ks,lambda,empirical,target,stderr\n";
    for (const auto& p : points) {
        const std::string ks = p.ks ? format_number(*p.ks) : "nan";
        for (const auto& l : p.laplace)
            os << p.n << ',' << ks << ',' << format_number(l.lambda) << ',' << format_number(l.empirical) << ','
               << format_number(l.target) << ',' << format_number(l.stderr_) << '\n';
    }
    return os.str();
}

}  // namespace bpvei
