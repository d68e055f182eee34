#include "bpvei/law.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bpvei {

namespace {

constexpr double kNormTol = 1e-12;
// remainder bound at which truncated sums of k^2 * pmf(k) stop
constexpr double kTailCert = 1e-13;

std::string fmt_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// x + expm1(-x) = x^2/2 - x^3/6 + ..., accurate for small x
double exp_excess(double x) {
    if (x > 0.5) return x + std::expm1(-x);
    double term = x * x / 2.0;
    double sum = 0.0;
    for (int j = 2; j < 60 && std::abs(term) > 1e-18 * std::abs(sum); ++j) {
        sum += term;
        term *= -x / static_cast<double>(j + 1);
    }
    return sum;
}

// 1 - (1-u)^k
double power_complement(double u, std::size_t k) {
    if (k == 0) return 0.0;
    return -std::expm1(static_cast<double>(k) * std::log1p(-u));
}

// k*u - 1 + (1-u)^k = sum_{j>=2} C(k,j) (-u)^j
double power_excess(double u, std::size_t k) {
    if (k <= 1) return 0.0;
    const double ku = static_cast<double>(k) * u;
    if (ku > 0.25) return ku - power_complement(u, k);
    double term = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0 * u * u;
    double sum = 0.0;
    for (std::size_t j = 2; j <= k; ++j) {
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        term *= -u * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
    return sum;
}

}  // namespace

// ---------------------------------------------------------------- schedules

ParamSchedule ParamSchedule::constant(double v) {
    ParamSchedule s;
    s.kind = Kind::constant;
    s.value = v;
    return s;
}

ParamSchedule ParamSchedule::power(double coeff, double exponent, Generation offset) {
    if (offset < 0) throw ValidationError("power schedule offset must be >= 0");
    ParamSchedule s;
    s.kind = Kind::power;
    s.coeff = coeff;
    s.exponent = exponent;
    s.offset = offset;
    return s;
}

ParamSchedule ParamSchedule::table(std::vector<double> entries, ParamSchedule fallback) {
    ParamSchedule s;
    s.kind = Kind::table;
    s.entries = std::move(entries);
    s.fallback = std::make_shared<const ParamSchedule>(std::move(fallback));
    return s;
}

double ParamSchedule::at(Generation n) const {
    if (n < 0) throw DomainError("generation index must be >= 0");
    switch (kind) {
        case Kind::constant:
            return value;
        case Kind::power: {
            const double base = static_cast<double>(n + offset);
            if (base == 0.0 && exponent < 0.0)
                throw ValidationError("power schedule evaluated at base 0 with negative exponent (generation " +
                                      std::to_string(n) + ")");
            return coeff * std::pow(base, exponent);
        }
        case Kind::table:
            if (static_cast<std::size_t>(n) < entries.size()) return entries[static_cast<std::size_t>(n)];
            if (!fallback) throw ValidationError("table schedule without fallback queried past its entries");
            return fallback->at(n);
    }
    return value;
}

std::optional<double> ParamSchedule::limit() const {
    switch (kind) {
        case Kind::constant:
            return value;
        case Kind::power:
            if (exponent < 0.0) return 0.0;
            if (exponent == 0.0) return coeff;
            return std::nullopt;
        case Kind::table:
            return fallback ? fallback->limit() : std::nullopt;
    }
    return std::nullopt;
}

std::optional<ParamSchedule::Envelope> ParamSchedule::envelope(Generation from) const {
    from = std::max<Generation>(from, 1);
    switch (kind) {
        case Kind::constant:
            return Envelope{std::abs(value), 0.0};
        case Kind::power: {
            // (n+o)^e <= n^e for e <= 0; (n+o)^e <= (1 + o/from)^e n^e otherwise
            double scale = std::abs(coeff);
            if (exponent > 0.0)
                scale *= std::pow(1.0 + static_cast<double>(offset) / static_cast<double>(from), exponent);
            return Envelope{scale, exponent};
        }
        case Kind::table:
            if (fallback && static_cast<std::size_t>(from) >= entries.size()) return fallback->envelope(from);
            return std::nullopt;
    }
    return std::nullopt;
}

// ------------------------------------------------------------------- family

std::string_view family_name(Family family) {
    switch (family) {
        case Family::bernoulli_shift: return "bernoulli_shift";
        case Family::linear_fractional: return "linear_fractional";
        case Family::geometric: return "geometric";
        case Family::poisson: return "poisson";
        case Family::finite_pmf: return "finite_pmf";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    for (Family f : {Family::bernoulli_shift, Family::linear_fractional, Family::geometric, Family::poisson,
                     Family::finite_pmf}) {
        if (family_name(f) == name) return f;
    }
    throw ValidationError("unknown law family '" + std::string(name) + "'");
}

std::string_view parameter_name(Family family) {
    switch (family) {
        case Family::bernoulli_shift:
        case Family::geometric: return "p";
        case Family::linear_fractional: return "m";
        case Family::poisson: return "rate";
        case Family::finite_pmf: return "";
    }
    return "";
}

LawSpec LawSpec::bernoulli_shift(ParamSchedule p) { return {Family::bernoulli_shift, std::move(p), {}}; }
LawSpec LawSpec::geometric(ParamSchedule p) { return {Family::geometric, std::move(p), {}}; }
LawSpec LawSpec::linear_fractional(ParamSchedule m) { return {Family::linear_fractional, std::move(m), {}}; }
LawSpec LawSpec::poisson(ParamSchedule rate) { return {Family::poisson, std::move(rate), {}}; }
LawSpec LawSpec::finite_pmf(std::vector<double> probs) {
    return {Family::finite_pmf, ParamSchedule::constant(0.0), std::move(probs)};
}

// --------------------------------------------------------------- instances

LawInstance LawInstance::make(Family family, double parameter, std::vector<double> probs) {
    LawInstance law;
    law.family_ = family;
    law.param_ = parameter;
    const std::string pname(parameter_name(family));
    auto bad = [&](const std::string& why) {
        return ValidationError(std::string(family_name(family)) + ": parameter " + pname + "=" +
                               fmt_double(parameter) + " " + why);
    };
    if (family != Family::finite_pmf && !std::isfinite(parameter)) throw bad("is not finite");

    switch (family) {
        case Family::bernoulli_shift:
            if (!(parameter > 0.0 && parameter <= 1.0)) throw bad("outside (0, 1]");
            law.mean_ = parameter;
            law.variance_ = parameter * (1.0 - parameter);
            law.fact2_ = 0.0;
            law.p0_ = 1.0 - parameter;
            break;
        case Family::geometric:
        case Family::linear_fractional: {
            if (family == Family::geometric && !(parameter > 0.0 && parameter < 1.0)) throw bad("outside (0, 1)");
            if (family == Family::linear_fractional && !(parameter > 0.0)) throw bad("must be > 0");
            const double p = law.geo_p();
            const double q = 1.0 - p;
            law.mean_ = family == Family::geometric ? q / p : parameter;
            law.variance_ = family == Family::geometric ? q / (p * p) : parameter * (1.0 + parameter);
            law.fact2_ = 2.0 * law.mean_ * law.mean_;
            law.p0_ = p;
            break;
        }
        case Family::poisson:
            if (!(parameter > 0.0)) throw bad("must be > 0");
            law.mean_ = parameter;
            law.variance_ = parameter;
            law.fact2_ = parameter * parameter;
            law.p0_ = std::exp(-parameter);
            break;
        case Family::finite_pmf: {
            if (probs.empty()) throw ValidationError("finite_pmf: probs must be nonempty");
            double total = 0.0;
            for (double p : probs) {
                if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("finite_pmf: probs must be finite and >= 0");
                total += p;
            }
            if (std::abs(total - 1.0) > kNormTol)
                throw ValidationError("finite_pmf: probs sum to " + fmt_double(total) + ", expected 1");
            if (!(probs[0] < 1.0)) throw ValidationError("finite_pmf: mass at zero must be < 1");
            auto data = std::make_shared<FiniteData>();
            data->probs = std::move(probs);
            data->cdf.resize(data->probs.size());
            std::partial_sum(data->probs.begin(), data->probs.end(), data->cdf.begin());
            for (std::size_t k = 0; k < data->probs.size(); ++k)
                if (data->probs[k] > 0.0) data->last = k;
            for (std::size_t k = data->last; k < data->cdf.size(); ++k) data->cdf[k] = 1.0;
            double m = 0.0, f2 = 0.0;
            for (std::size_t k = 0; k < data->probs.size(); ++k) {
                const double kk = static_cast<double>(k);
                m += kk * data->probs[k];
                f2 += kk * (kk - 1.0) * data->probs[k];
            }
            law.mean_ = m;
            law.fact2_ = f2;
            law.variance_ = std::max(0.0, f2 + m - m * m);
            law.p0_ = data->probs[0];
            law.param_ = m;
            law.finite_ = std::move(data);
            break;
        }
    }
    return law;
}

const std::vector<double>& LawInstance::probs() const {
    static const std::vector<double> empty;
    return finite_ ? finite_->probs : empty;
}

std::optional<Count> LawInstance::support_max() const noexcept {
    if (family_ == Family::bernoulli_shift) return 1;
    if (family_ == Family::finite_pmf) return static_cast<Count>(finite_->last);
    return std::nullopt;
}

double LawInstance::pgf(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf argument outside [0, 1]");
    switch (family_) {
        case Family::bernoulli_shift:
            return 1.0 - param_ + param_ * s;
        case Family::geometric:
        case Family::linear_fractional: {
            const double p = geo_p();
            return p / (1.0 - (1.0 - p) * s);
        }
        case Family::poisson:
            return std::exp(-param_ * (1.0 - s));
        case Family::finite_pmf: {
            const auto& p = finite_->probs;
            double acc = 0.0;
            for (std::size_t k = p.size(); k-- > 0;) acc = acc * s + p[k];
            return acc;
        }
    }
    return 0.0;
}

double LawInstance::complement(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("pgf argument outside [0, 1]");
    switch (family_) {
        case Family::bernoulli_shift:
            return param_ * u;
        case Family::geometric:
        case Family::linear_fractional: {
            const double p = geo_p();
            const double qu = (1.0 - p) * u;
            return qu / (p + qu);
        }
        case Family::poisson:
            return -std::expm1(-param_ * u);
        case Family::finite_pmf: {
            const auto& p = finite_->probs;
            double acc = 0.0;
            for (std::size_t k = 1; k < p.size(); ++k)
                if (p[k] > 0.0) acc += p[k] * power_complement(u, k);
            return acc;
        }
    }
    return 0.0;
}

double LawInstance::excess(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("pgf argument outside [0, 1]");
    switch (family_) {
        case Family::bernoulli_shift:
            return 0.0;
        case Family::geometric:
        case Family::linear_fractional: {
            // m u - q u/(p + q u) = q^2 u^2 / (p (p + q u))
            const double p = geo_p();
            const double q = 1.0 - p;
            return q * q * u * u / (p * (p + q * u));
        }
        case Family::poisson:
            return exp_excess(param_ * u);
        case Family::finite_pmf: {
            const auto& p = finite_->probs;
            double acc = 0.0;
            for (std::size_t k = 2; k < p.size(); ++k)
                if (p[k] > 0.0) acc += p[k] * power_excess(u, k);
            return acc;
        }
    }
    return 0.0;
}

double LawInstance::pmf(Count k) const {
    if (k < 0) return 0.0;
    switch (family_) {
        case Family::bernoulli_shift:
            return k == 0 ? 1.0 - param_ : (k == 1 ? param_ : 0.0);
        case Family::geometric:
        case Family::linear_fractional: {
            const double p = geo_p();
            return p * std::pow(1.0 - p, static_cast<double>(k));
        }
        case Family::poisson: {
            const double kk = static_cast<double>(k);
            return std::exp(kk * std::log(param_) - param_ - std::lgamma(kk + 1.0));
        }
        case Family::finite_pmf:
            return static_cast<std::size_t>(k) < finite_->probs.size() ? finite_->probs[static_cast<std::size_t>(k)]
                                                                       : 0.0;
    }
    return 0.0;
}

double LawInstance::tail_mass(Count k) const {
    if (k < 0) return 1.0;
    switch (family_) {
        case Family::bernoulli_shift:
            return k == 0 ? param_ : 0.0;
        case Family::geometric:
        case Family::linear_fractional:
            return std::pow(1.0 - geo_p(), static_cast<double>(k + 1));
        case Family::poisson: {
            if (static_cast<double>(k) < param_) {
                double left = 0.0;
                for (Count j = 0; j <= k; ++j) left += pmf(j);
                return std::max(0.0, 1.0 - left);
            }
            // past the mode each term shrinks by rate/(j+1) < 1
            double sum = 0.0;
            for (Count j = k + 1;; ++j) {
                const double term = pmf(j);
                sum += term;
                const double ratio = param_ / static_cast<double>(j + 1);
                if (term == 0.0 || term * ratio / (1.0 - ratio) <= 1e-17 * sum) return sum;
            }
        }
        case Family::finite_pmf: {
            double sum = 0.0;
            const auto& p = finite_->probs;
            for (std::size_t j = static_cast<std::size_t>(k) + 1; j < p.size(); ++j) sum += p[j];
            return sum;
        }
    }
    return 0.0;
}

std::vector<double> LawInstance::pmf_vector(std::size_t max_len, double tail_floor) const {
    std::vector<double> out;
    if (family_ == Family::finite_pmf) {
        const auto& p = finite_->probs;
        out.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(std::min(max_len, finite_->last + 1)));
        return out;
    }
    if (family_ == Family::bernoulli_shift) {
        out = {1.0 - param_, param_};
        if (param_ >= 1.0) out[0] = 0.0;
        if (out.size() > max_len) out.resize(max_len);
        return out;
    }
    if (family_ == Family::poisson) {
        double term = std::exp(-param_);
        double cum = 0.0;
        for (Count k = 0; static_cast<std::size_t>(k) < max_len; ++k) {
            if (k > 0) term *= param_ / static_cast<double>(k);
            if (term == 0.0 && static_cast<double>(k) < param_) term = pmf(k);  // underflowed start
            out.push_back(term);
            cum += term;
            const double ratio = param_ / static_cast<double>(k + 2);
            if (static_cast<double>(k) > param_ && ratio < 1.0) {
                const double bound = term * (param_ / static_cast<double>(k + 1)) / (1.0 - ratio);
                if (bound <= tail_floor) break;
            }
        }
        return out;
    }
    const double p = geo_p();
    const double q = 1.0 - p;
    double term = p;
    double tail = q;  // P[X > k]
    for (std::size_t k = 0; k < max_len; ++k) {
        out.push_back(term);
        if (tail <= tail_floor) break;
        term *= q;
        tail *= q;
    }
    return out;
}

Bounded LawInstance::second_moment_above(double t) const {
    const Count start = t < 0.0 ? 0 : static_cast<Count>(std::floor(t)) + 1;
    if (auto top = support_max()) {
        double sum = 0.0;
        for (Count k = start; k <= *top; ++k) sum += static_cast<double>(k * k) * pmf(k);
        return {sum, 0.0};
    }
    // For these families the term ratio ((k+1)/k)^2 * pmf(k+1)/pmf(k) is
    // nonincreasing, so once it drops below 1 the remainder is dominated by a
    // geometric series.
    auto term_at = [&](Count k) { return static_cast<double>(k) * static_cast<double>(k) * pmf(k); };
    auto pmf_ratio = [&](Count k) {
        return family_ == Family::poisson ? param_ / static_cast<double>(k + 1) : 1.0 - geo_p();
    };
    double sum = 0.0;
    for (Count k = start;; ++k) {
        sum += term_at(k);
        const Count j = k + 1;
        const double next = term_at(j);
        const double jd = static_cast<double>(j);
        const double ratio = (jd + 1.0) * (jd + 1.0) / (jd * jd) * pmf_ratio(j);
        if (next == 0.0) return {sum, 0.0};
        if (ratio < 1.0) {
            const double bound = next / (1.0 - ratio);
            if (bound <= kTailCert) return {sum, bound};
        }
    }
}

LawInstance instantiate(const LawSpec& spec, Generation n) {
    if (n < 0) throw DomainError("generation index must be >= 0");
    if (spec.family == Family::finite_pmf) {
        try {
            return LawInstance::make(Family::finite_pmf, 0.0, spec.probs);
        } catch (const ValidationError& e) {
            throw ValidationError("generation " + std::to_string(n) + ": " + e.what());
        }
    }
    double value = 0.0;
    try {
        value = spec.param.at(n);
        return LawInstance::make(spec.family, value);
    } catch (const ValidationError& e) {
        throw ValidationError("generation " + std::to_string(n) + ": " + e.what());
    }
}

// -------------------------------------------------------------- regularity

std::vector<double> regularity_grid() {
    std::vector<double> grid;
    for (int k = -2; k <= 40; ++k) grid.push_back(std::pow(2.0, k / 2.0));
    return grid;
}

bool RegularityReport::satisfied() const {
    return std::all_of(entries.begin(), entries.end(), [](const RegularityEntry& e) { return e.satisfied; });
}

RegularityReport regularity_check(const std::vector<LawInstance>& laws, const std::vector<double>& epsilons) {
    RegularityReport report;
    report.grid = regularity_grid();
    report.horizon = laws.empty() ? 0 : static_cast<Generation>(laws.size()) - 1;
    for (double eps : epsilons) {
        if (!(eps > 0.0)) throw DomainError("regularity epsilon must be > 0");
        RegularityEntry entry;
        entry.epsilon = eps;
        std::size_t needed = 0;  // index into the grid
        bool all_degenerate = true;
        bool failed = false;
        for (std::size_t n = 0; n < laws.size() && !failed; ++n) {
            const LawInstance& law = laws[n];
            const double rhs_moment = law.second_moment() - law.pmf(1);
            const bool degenerate = law.tail_mass(1) == 0.0;
            all_degenerate = all_degenerate && degenerate;
            const double rhs = degenerate ? 0.0 : eps * rhs_moment;
            // smallest grid index that works at this generation (monotone in c)
            std::size_t idx = needed;
            for (; idx < report.grid.size(); ++idx) {
                const Bounded lhs = law.second_moment_above(report.grid[idx] * (1.0 + law.mean()));
                entry.max_error_bound = std::max(entry.max_error_bound, lhs.bound);
                if (lhs.value + lhs.bound <= rhs) break;
            }
            if (idx == report.grid.size()) {
                failed = true;
                entry.violating = static_cast<Generation>(n);
            }
            needed = std::max(needed, idx);
        }
        entry.degenerate = all_degenerate;
        entry.satisfied = !failed;
        if (!failed) entry.c = report.grid[needed];
        report.entries.push_back(entry);
    }
    return report;
}

RegularityReport regularity_check(const LawSpec& offspring, const std::vector<double>& epsilons, Generation horizon) {
    if (horizon < 1) throw DomainError("regularity horizon must be >= 1");
    std::vector<LawInstance> laws;
    laws.reserve(static_cast<std::size_t>(horizon) + 2);
    for (Generation n = 0; n <= horizon; ++n) laws.push_back(instantiate(offspring, n));
    bool limit_checked = false;
    if (offspring.family == Family::finite_pmf) {
        limit_checked = true;  // constant law
    } else if (auto lim = offspring.param.limit()) {
        try {
            laws.push_back(LawInstance::make(offspring.family, *lim));
            limit_checked = true;
        } catch (const ValidationError&) {
            // limiting parameter is inadmissible (e.g. p -> 0); only the horizon is checked
        }
    }
    RegularityReport report = regularity_check(laws, epsilons);
    report.horizon = horizon;
    report.limit_law_checked = limit_checked;
    return report;
}

}  // namespace bpvei
