#include "bpvei/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bpvei {

namespace {

// entries below this are treated as zero when trimming convolution powers
constexpr double kNegligible = 1e-300;

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::size_t last_nonzero(const std::vector<double>& v) {
    std::size_t hi = v.size();
    while (hi > 0 && v[hi - 1] == 0.0) --hi;
    return hi;  // one past
}

}  // namespace

double TruncatedPmf::total() const { return sum_of(probs) + tail; }

TruncatedPmf propagate_step(const TruncatedPmf& current, const LawInstance& offspring, const LawInstance& immigration,
                            const PropagateOptions& opts) {
    const std::size_t width = static_cast<std::size_t>(current.cutoff) + 1;
    const double mass_before = sum_of(current.probs);

    // (i) add immigrants: Y = Z * I, truncated to the window
    const std::vector<double> imm = immigration.pmf_vector(width, opts.mass_floor);
    std::vector<double> y(width, 0.0);
    const std::size_t z_hi = last_nonzero(current.probs);
    for (std::size_t a = 0; a < z_hi; ++a) {
        const double za = current.probs[a];
        if (za == 0.0) continue;
        const std::size_t b_hi = std::min(imm.size(), width - a);
        for (std::size_t b = 0; b < b_hi; ++b) y[a + b] += za * imm[b];
    }

    // (ii) compound step: sum_j Y[j] X^{*j}, powers built incrementally
    const std::vector<double> off = offspring.pmf_vector(width, opts.mass_floor);
    std::size_t x_lo = 0;
    while (x_lo < off.size() && off[x_lo] == 0.0) ++x_lo;
    const std::size_t x_hi = last_nonzero(off);

    std::vector<double> next(width, 0.0);
    std::vector<double> power(width, 0.0);
    std::vector<double> scratch(width, 0.0);
    power[0] = 1.0;
    std::size_t p_lo = 0, p_hi = 1;  // support of the current power, [p_lo, p_hi)

    const std::size_t j_hi = last_nonzero(y);
    double remaining = sum_of(y);
    for (std::size_t j = 0; j < j_hi; ++j) {
        if (remaining < opts.mass_floor) break;  // leftover lands in the tail
        if (j > 0) {
            std::fill(scratch.begin() + static_cast<std::ptrdiff_t>(std::min(p_lo + x_lo, width)),
                      scratch.begin() + static_cast<std::ptrdiff_t>(std::min(p_hi + x_hi, width)), 0.0);
            std::size_t new_lo = width, new_hi = 0;
            for (std::size_t a = p_lo; a < p_hi; ++a) {
                const double pa = power[a];
                if (pa == 0.0) continue;
                if (a + x_lo >= width) break;
                const std::size_t b_hi = std::min(x_hi, width - a);
                for (std::size_t b = x_lo; b < b_hi; ++b) scratch[a + b] += pa * off[b];
                new_lo = std::min(new_lo, a + x_lo);
                new_hi = std::max(new_hi, a + b_hi);
            }
            while (new_hi > new_lo && scratch[new_hi - 1] < kNegligible) --new_hi;
            while (new_lo < new_hi && scratch[new_lo] < kNegligible) ++new_lo;
            if (new_lo >= new_hi) break;  // every further power has left the window
            std::swap(power, scratch);
            std::fill(scratch.begin() + static_cast<std::ptrdiff_t>(p_lo),
                      scratch.begin() + static_cast<std::ptrdiff_t>(p_hi), 0.0);
            p_lo = new_lo;
            p_hi = new_hi;
        }
        const double yj = y[j];
        remaining -= yj;
        if (yj == 0.0) continue;
        for (std::size_t k = p_lo; k < p_hi; ++k) next[k] += yj * power[k];
    }

    TruncatedPmf out;
    out.cutoff = current.cutoff;
    out.probs = std::move(next);
    out.tail = std::max(0.0, current.tail + (mass_before - sum_of(out.probs)));
    out.tail_exceeded = out.tail > opts.tail_tol;
    return out;
}

std::vector<TruncatedPmf> propagate_all(const BpveiModel& model, Generation n, const PropagateOptions& opts) {
    if (n < 0) throw DomainError("propagate needs n >= 0");
    if (opts.cutoff < 1) throw DomainError("propagate needs cutoff >= 1");
    const LawSequence laws(model, n);
    Generation cutoff = opts.cutoff;
    for (;;) {
        std::vector<TruncatedPmf> out;
        out.reserve(static_cast<std::size_t>(n) + 1);
        TruncatedPmf z;
        z.cutoff = cutoff;
        z.probs.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
        z.probs[0] = 1.0;
        out.push_back(z);
        for (Generation i = 0; i < n; ++i) out.push_back(propagate_step(out.back(), laws.offspring(i), laws.immigration(i), opts));
        const bool exceeded = out.back().tail > opts.tail_tol;
        if (!exceeded || !opts.grow || cutoff >= opts.max_cutoff) {
            for (auto& p : out) p.tail_exceeded = p.tail > opts.tail_tol;
            return out;
        }
        cutoff = std::min(cutoff * 2, opts.max_cutoff);
    }
}

TruncatedPmf propagate(const BpveiModel& model, Generation n, const PropagateOptions& opts) {
    return propagate_all(model, n, opts).back();
}

SurvivalBounds exact_survival(const TruncatedPmf& pmf) {
    const double p0 = pmf.probs.empty() ? 0.0 : pmf.probs[0];
    return {std::max(0.0, 1.0 - p0 - pmf.tail), 1.0 - p0};
}

SurvivalBounds exact_survival(const BpveiModel& model, Generation n, const PropagateOptions& opts) {
    return exact_survival(propagate(model, n, opts));
}

PmfMoments moments_from_pmf(const TruncatedPmf& pmf, std::optional<double> support) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < pmf.probs.size(); ++k) {
        const double kk = static_cast<double>(k);
        m1 += kk * pmf.probs[k];
        m2 += kk * kk * pmf.probs[k];
    }
    PmfMoments out;
    out.mean = m1;
    out.variance = m2 - m1 * m1;
    if (pmf.tail == 0.0) return out;
    if (support) {
        const double b = *support;
        out.mean_bound = pmf.tail * b;
        out.variance_bound = pmf.tail * b * b + 2.0 * m1 * pmf.tail * b + out.mean_bound * out.mean_bound;
    } else {
        out.one_sided = true;
        out.mean_bound = std::numeric_limits<double>::infinity();
        out.variance_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

std::optional<double> support_bound(const BpveiModel& model, Generation n) {
    double bound = 0.0;
    for (Generation i = 0; i < n; ++i) {
        const auto x = model.law_at(Role::offspring, i).support_max();
        const auto im = model.law_at(Role::immigration, i).support_max();
        if (!x || !im) return std::nullopt;
        bound = (bound + static_cast<double>(*im)) * static_cast<double>(*x);
    }
    return bound;
}

}  // namespace bpvei
