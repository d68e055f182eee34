#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpvei/analysis.hpp"
#include "bpvei/montecarlo.hpp"

namespace bpvei {

/// Regularized lower incomplete gamma P(shape, x).
double gamma_cdf(double shape, double x);
/// Inverse of gamma_cdf in x by bisection.
double gamma_quantile(double shape, double p);
/// R draws from Gamma(shape, 1) by inverse cdf on the stream (seed, i).
std::vector<double> gamma_inverse_cdf_sample(double shape, std::size_t count, std::uint64_t seed);

/// One-sample KS distance between a sorted sample and a continuous cdf.
double ks_statistic(const std::vector<double>& sorted_sample, const std::function<double(double)>& cdf);
double ks_statistic(const EmpiricalDistribution& sample, const std::function<double(double)>& cdf);
/// Two-sample KS distance of two sorted samples (ties handled).
double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);
/// 1% critical values.
double ks_critical_one_sample(std::size_t n);
double ks_critical_two_sample(std::size_t n, std::size_t m);

struct LaplaceProbe {
    double lambda = 0.0;
    double empirical = 0.0;  // mean of exp(-lambda * value)
    double target = 0.0;     // (1 + lambda)^(-shape), NaN when no shape is known
    double stderr_ = 0.0;
};

LaplaceProbe empirical_laplace(const std::vector<double>& sample, double lambda);
LaplaceProbe empirical_laplace(const EmpiricalDistribution& sample, double lambda);

struct AssumptionCheck {
    std::string name;
    ConditionState state = ConditionState::inconclusive;
    std::optional<double> value;
    std::string evidence;
};

struct AssumptionAudit {
    Generation horizon = 0;
    std::optional<double> nu;     // lim nu_n from the offspring schedule
    std::optional<double> alpha;  // lim alpha_n from the immigration schedule
    double tau = 0.0;             // inf_n h_n(0)
    double sup_beta2 = 0.0;
    CriticalityVerdict criticality = CriticalityVerdict::inconclusive;
    bool regular = false;
    std::vector<AssumptionCheck> checks;

    bool all_pass() const;
    std::optional<double> shape() const;  // 2 alpha / nu
};

AssumptionAudit assumption_audit(const BpveiModel& model, Generation horizon);

struct GammaLimitPoint {
    Generation n = 0;
    double a_n = 0.0;
    std::size_t replications = 0;
    std::size_t exploded = 0;
    std::optional<double> ks;
    double ks_critical = 0.0;  // 1% one-sample value, descriptive only
    std::vector<LaplaceProbe> laplace;
    double survival = 0.0;
    double survival_stderr = 0.0;
    double survival_exact = 0.0;
};

struct GammaLimitReport {
    std::string model;
    std::uint64_t seed = 0;
    std::size_t replications = 0;
    AssumptionAudit audit;
    std::optional<double> shape;
    bool applicable = false;  // normalizer positive and a shape is known
    std::vector<GammaLimitPoint> points;

    nlohmann::json to_json() const;
    /// Columns n, ks, lambda, empirical, target, stderr; one row per (n, lambda).
    std::string to_csv() const;
};

struct GammaLimitOptions {
    std::vector<Generation> n_list;
    std::size_t replications = 10000;
    std::uint64_t seed = 1;
    std::vector<double> lambdas{0.5, 1.0, 2.0};
    unsigned threads = default_threads();
    Generation audit_horizon = 2048;
};

GammaLimitReport verify_gamma_limit(const BpveiModel& model, const GammaLimitOptions& options);

}  // namespace bpvei
