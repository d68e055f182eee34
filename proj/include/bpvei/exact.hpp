#pragma once

#include <optional>
#include <vector>

#include "bpvei/environment.hpp"

namespace bpvei {

/// Probability vector on {0..cutoff} plus the mass that left the window.
struct TruncatedPmf {
    std::vector<double> probs;
    double tail = 0.0;
    Generation cutoff = 0;
    bool tail_exceeded = false;

    double total() const;
};

struct PropagateOptions {
    Generation cutoff = 2048;
    double tail_tol = 1e-10;
    /// Double the cutoff (up to max_cutoff) while the tail exceeds tail_tol.
    bool grow = true;
    Generation max_cutoff = 1 << 16;
    /// Mass below this floor in the compound step is moved to the tail
    /// instead of being convolved further.
    double mass_floor = 1e-30;
};

/// Exact law of Z_0..Z_n by truncated propagation of the recursion
/// Z_{n+1} = sum_{j <= Z_n + I_n} X_{nj}. Element i is the law of Z_i.
/// Mass that leaves the window is accumulated in `tail` and never returns.
std::vector<TruncatedPmf> propagate_all(const BpveiModel& model, Generation n, const PropagateOptions& opts = {});

/// Law of Z_n only.
TruncatedPmf propagate(const BpveiModel& model, Generation n, const PropagateOptions& opts = {});

/// One generation step at a fixed window; exposed for tests.
TruncatedPmf propagate_step(const TruncatedPmf& current, const LawInstance& offspring, const LawInstance& immigration,
                            const PropagateOptions& opts);

struct SurvivalBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Bounds on P[Z_n > 0]: [1 - p0 - tail, 1 - p0].
SurvivalBounds exact_survival(const TruncatedPmf& pmf);
SurvivalBounds exact_survival(const BpveiModel& model, Generation n, const PropagateOptions& opts = {});

struct PmfMoments {
    double mean = 0.0;      // of the in-window part, sum k p_k
    double variance = 0.0;  // sum k^2 p_k - mean^2
    /// Absolute error bounds from the tail mass. Infinite (one-sided) unless a
    /// support bound was declared.
    double mean_bound = 0.0;
    double variance_bound = 0.0;
    bool one_sided = false;
};

/// Moments of a truncated pmf. `support_bound` declares that Z never exceeds it.
PmfMoments moments_from_pmf(const TruncatedPmf& pmf, std::optional<double> support_bound = std::nullopt);

/// Largest value Z_n can take when every law has bounded support, else empty.
std::optional<double> support_bound(const BpveiModel& model, Generation n);

}  // namespace bpvei
