#pragma once

#include <optional>
#include <vector>

#include "bpvei/environment.hpp"

namespace bpvei {

/// A generating-function value carried together with its complement 1 - f,
/// each evaluated along its own chain so neither loses precision near 0 or 1.
struct PgfValue {
    double value = 0.0;
    double complement = 1.0;
};

/// f_{k,n}(s) = f_{k+1}(f_{k+2}(... f_n(s))), with f_{n,n}(s) = s.
/// Requires -1 <= k <= n and laws for generations up to n.
PgfValue compose_offspring(const LawSequence& laws, Generation k, Generation n, PgfValue s);
double compose_offspring(const BpveiModel& model, Generation k, Generation n, double s);

struct ProcessPgfValue {
    double value = 1.0;       // F_n(s)
    double log_value = 0.0;   // log F_n(s)
    double complement = 0.0;  // 1 - F_n(s)
};

/// F_n(s) = prod_{i=0}^{n-1} h_i(f_{i-1,n-1}(s)). The running product moves to
/// log space once any factor drops below 1e-8.
ProcessPgfValue process_pgf(const LawSequence& laws, Generation n, PgfValue s);
double process_pgf(const BpveiModel& model, Generation n, double s);

/// P[Z_n > 0] = 1 - F_n(0) for n = 0..horizon (entry 0 is 0 since Z_0 = 0).
std::vector<double> exact_survival_curve(const BpveiModel& model, Generation horizon);
std::vector<double> exact_survival_curve(const LawSequence& laws, Generation horizon);

/// Shape function phi(s) of one law: 1/(1-f(s)) = 1/(m(1-s)) + phi(s), phi(1) = nu/2.
/// Takes u = 1 - s.
double shape_function_at(const LawInstance& law, double u);
double shape_function(const BpveiModel& model, Generation k, double s);

/// |1/(1-f_{k,n}(s)) - mu_k/(mu_n (1-s)) - mu_k sum_{l=k+1}^n phi_l(f_{l,n}(s))/mu_{l-1}|
double iterated_shape_residual(const BpveiModel& model, Generation k, Generation n, double s);
/// Same, divided by 1/(1-f_{k,n}(s)). The terms grow like mu_k/mu_n, so this is the
/// one that stays meaningful in double precision when mu_n is tiny.
double iterated_shape_residual_relative(const BpveiModel& model, Generation k, Generation n, double s);

struct ShapeUniformity {
    double sup_deviation = 0.0;  // sup over the grid of |sum phi_k(f_{k,n}(s))/mu_{k-1} - sum phi_k(1)/mu_{k-1}|
    double baseline = 0.0;       // sum_{k=i}^n phi_k(1)/mu_{k-1}
    double ratio = 0.0;          // sup_deviation / baseline
    bool vacuous = false;        // baseline == 0
};

/// Uniform-in-s closeness of the shape-function sums on an equispaced grid of [0, 1].
ShapeUniformity shape_sum_uniformity(const BpveiModel& model, Generation i, Generation n, int grid_size);

struct PgfCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::optional<Generation> k;  // composition window start; empty for the process p.g.f.
    Generation n = 0;
};

/// f_{k,n} on an equispaced grid, or F_n when k is empty.
PgfCurve pgf_curve(const BpveiModel& model, std::optional<Generation> k, Generation n, int grid_size);

}  // namespace bpvei
