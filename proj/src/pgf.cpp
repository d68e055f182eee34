#include "bpvei/pgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bpvei {

namespace {

constexpr double kLogSwitch = 1e-8;

void check_unit(double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("argument s outside [0, 1]");
}

PgfValue apply(const LawInstance& law, PgfValue x) { return {law.pgf(x.value), law.complement(x.complement)}; }

}  // namespace

PgfValue compose_offspring(const LawSequence& laws, Generation k, Generation n, PgfValue s) {
    if (k < -1 || n < k) throw DomainError("compose_offspring needs -1 <= k <= n");
    if (n >= laws.size() && n > k) throw DomainError("law sequence too short for compose_offspring");
    for (Generation l = n; l > k; --l) s = apply(laws.offspring(l), s);
    return s;
}

double compose_offspring(const BpveiModel& model, Generation k, Generation n, double s) {
    check_unit(s);
    if (k < -1 || n < k) throw DomainError("compose_offspring needs -1 <= k <= n");
    if (k == n) return s;
    const LawSequence laws(model, n + 1);
    return compose_offspring(laws, k, n, PgfValue{s, 1.0 - s}).value;
}

ProcessPgfValue process_pgf(const LawSequence& laws, Generation n, PgfValue s) {
    if (n < 0) throw DomainError("process_pgf needs n >= 0");
    if (n > laws.size()) throw DomainError("law sequence too short for process_pgf");
    double product = 1.0;
    double log_sum = 0.0;
    double complement = 0.0;  // 1 - prod, accumulated as C + m (1 - C): no cancellation
    bool in_log = false;
    PgfValue x = s;  // f_{i-1,n-1}(s) after applying f_i
    for (Generation i = n - 1; i >= 0; --i) {
        x = apply(laws.offspring(i), x);
        const LawInstance& h = laws.immigration(i);
        const double factor = h.pgf(x.value);
        const double miss = h.complement(x.complement);
        log_sum += miss < 0.5 ? std::log1p(-miss) : std::log(factor);
        complement += miss * (1.0 - complement);
        if (factor < kLogSwitch) in_log = true;
        if (!in_log) product *= factor;
    }
    ProcessPgfValue out;
    out.log_value = log_sum;
    out.value = in_log ? std::exp(log_sum) : product;
    out.complement = std::min(complement, 1.0);
    return out;
}

double process_pgf(const BpveiModel& model, Generation n, double s) {
    check_unit(s);
    if (n < 1) throw DomainError("process_pgf needs n >= 1");
    const LawSequence laws(model, n);
    return process_pgf(laws, n, PgfValue{s, 1.0 - s}).value;
}

std::vector<double> exact_survival_curve(const LawSequence& laws, Generation horizon) {
    std::vector<double> out(static_cast<std::size_t>(horizon) + 1, 0.0);
    for (Generation n = 1; n <= horizon; ++n)
        out[static_cast<std::size_t>(n)] = process_pgf(laws, n, PgfValue{0.0, 1.0}).complement;
    return out;
}

std::vector<double> exact_survival_curve(const BpveiModel& model, Generation horizon) {
    const LawSequence laws(model, horizon);
    return exact_survival_curve(laws, horizon);
}

double shape_function_at(const LawInstance& law, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("argument s outside [0, 1]");
    if (u == 0.0) return law.nu() / 2.0;
    const double c = law.complement(u);
    return law.excess(u) / (c * law.mean() * u);
}

double shape_function(const BpveiModel& model, Generation k, double s) {
    check_unit(s);
    return shape_function_at(model.law_at(Role::offspring, k), 1.0 - s);
}

namespace {

// returns {lhs, |lhs - rhs|}
std::pair<double, double> iterated_shape_terms(const BpveiModel& model, Generation k, Generation n, double s) {
    check_unit(s);
    if (!(0 <= k && k < n)) throw DomainError("iterated_shape_residual needs 0 <= k < n");
    if (s >= 1.0) throw DomainError("iterated_shape_residual needs s < 1");
    const LawSequence laws(model, n + 1);
    // u[l - k] = 1 - f_{l,n}(s) for l = k..n
    std::vector<double> u(static_cast<std::size_t>(n - k) + 1);
    u.back() = 1.0 - s;
    for (Generation l = n; l > k; --l)
        u[static_cast<std::size_t>(l - 1 - k)] = laws.offspring(l).complement(u[static_cast<std::size_t>(l - k)]);

    double growth = 1.0;  // mu_n / mu_k
    for (Generation j = k + 1; j <= n; ++j) growth *= laws.offspring(j).mean();

    double shape_sum = 0.0;
    double ratio = 1.0;  // mu_k / mu_{l-1}
    for (Generation l = k + 1; l <= n; ++l) {
        const LawInstance& law = laws.offspring(l);
        shape_sum += ratio * shape_function_at(law, u[static_cast<std::size_t>(l - k)]);
        ratio /= law.mean();
    }
    const double lhs = 1.0 / u.front();
    const double rhs = 1.0 / (growth * (1.0 - s)) + shape_sum;
    return {lhs, std::abs(lhs - rhs)};
}

}  // namespace

double iterated_shape_residual(const BpveiModel& model, Generation k, Generation n, double s) {
    return iterated_shape_terms(model, k, n, s).second;
}

double iterated_shape_residual_relative(const BpveiModel& model, Generation k, Generation n, double s) {
    const auto [lhs, diff] = iterated_shape_terms(model, k, n, s);
    return diff / lhs;  // lhs >= 1
}

ShapeUniformity shape_sum_uniformity(const BpveiModel& model, Generation i, Generation n, int grid_size) {
    if (!(0 <= i && i <= n)) throw DomainError("shape_sum_uniformity needs 0 <= i <= n");
    if (grid_size < 11) throw DomainError("shape_sum_uniformity needs grid_size >= 11");
    const LawSequence laws(model, n + 1);

    // weights 1/mu_{k-1} for k = i..n
    std::vector<double> weight(static_cast<std::size_t>(n - i) + 1);
    double mu_prev = 1.0;  // mu_{-1}
    for (Generation k = 0; k <= n; ++k) {
        if (k >= i) weight[static_cast<std::size_t>(k - i)] = 1.0 / mu_prev;
        mu_prev *= laws.offspring(k).mean();
    }

    ShapeUniformity out;
    for (Generation k = i; k <= n; ++k)
        out.baseline += weight[static_cast<std::size_t>(k - i)] * laws.offspring(k).nu() / 2.0;
    if (out.baseline == 0.0) {
        out.vacuous = true;
        return out;
    }
    for (int g = 0; g < grid_size; ++g) {
        // u runs over the same equispaced grid as s = 1 - u
        double u = static_cast<double>(grid_size - 1 - g) / static_cast<double>(grid_size - 1);
        double sum = 0.0;
        for (Generation k = n; k >= i; --k) {
            sum += weight[static_cast<std::size_t>(k - i)] * shape_function_at(laws.offspring(k), u);
            u = laws.offspring(k).complement(u);  // 1 - f_{k-1,n}(s)
        }
        out.sup_deviation = std::max(out.sup_deviation, std::abs(sum - out.baseline));
    }
    out.ratio = out.sup_deviation / out.baseline;
    return out;
}

PgfCurve pgf_curve(const BpveiModel& model, std::optional<Generation> k, Generation n, int grid_size) {
    if (grid_size < 2) throw DomainError("pgf grid needs at least 2 points");
    PgfCurve curve;
    curve.k = k;
    curve.n = n;
    if (k) {
        if (*k < -1 || n < *k) throw DomainError("compose_offspring needs -1 <= k <= n");
    } else if (n < 1) {
        throw DomainError("process p.g.f. needs n >= 1");
    }
    const LawSequence laws(model, n + 1);
    for (int g = 0; g < grid_size; ++g) {
        const double s = static_cast<double>(g) / static_cast<double>(grid_size - 1);
        const PgfValue at{s, 1.0 - s};
        curve.grid.push_back(s);
        curve.values.push_back(k ? compose_offspring(laws, *k, n, at).value : process_pgf(laws, n, at).value);
    }
    return curve;
}

}  // namespace bpvei
