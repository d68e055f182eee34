#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bpvei/environment.hpp"
#include "bpvei/parallel.hpp"
#include "bpvei/rng.hpp"

namespace bpvei {

enum class Engine { direct, decomposition };

struct SimConfig {
    Generation horizon = 1000;
    std::size_t replications = 2000;
    std::uint64_t seed = 1;
    std::vector<Generation> record;  // checkpoints; empty means every generation 1..horizon
    Engine engine = Engine::direct;
    unsigned threads = default_threads();
    double overflow_guard = 1e12;
    /// Draw the offspring total of a generation from the closed-form law of the
    /// sum instead of individual by individual.
    bool fast_paths = true;
};

struct Trajectory {
    std::vector<Count> values;  // Z_0..Z_N (up to the explosion point)
    bool exploded = false;
};

/// One path of Z_0 = 0, Z_{n+1} = sum_{j <= Z_n + I_n} X_{nj}. `laws` must
/// cover generations 0..N-1.
Trajectory simulate_trajectory(const LawSequence& laws, Generation horizon, Xoshiro256& rng, bool fast_paths = true,
                               double overflow_guard = 1e12);
/// Replication `replication` of the stream family keyed by `seed`.
Trajectory simulate_trajectory(const BpveiModel& model, Generation horizon, std::uint64_t seed,
                               std::uint64_t replication, bool fast_paths = true);

struct SurvivalPoint {
    Generation n = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;  // sqrt(p(1-p)/R)
    std::size_t replications = 0;
};

struct SurvivalCurve {
    std::vector<SurvivalPoint> points;
    std::size_t exploded = 0;  // exploded trajectories count as alive
};

SurvivalCurve survival_curve(const BpveiModel& model, const SimConfig& config);

/// Sorted sample of Z_n over independent replications.
struct EmpiricalDistribution {
    std::vector<double> values;
    Generation n = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::size_t exploded = 0;  // excluded from `values`

    /// Copy with every value divided by `scale`.
    EmpiricalDistribution normalized(double scale) const;
};

/// Samples of Z_n at every checkpoint in config.record, all taken from the
/// same set of replications (config.engine selects how Z_n is produced).
std::map<Generation, EmpiricalDistribution> checkpoint_samples(const BpveiModel& model, const SimConfig& config);

EmpiricalDistribution endpoint_sample(const BpveiModel& model, Generation n, std::size_t replications,
                                      std::uint64_t seed, unsigned threads = default_threads(),
                                      bool fast_paths = true);

/// Z_n as the sum over immigrant cohorts j < n of independent branching
/// processes started from I_j in the shifted environment f_j, f_{j+1}, ...
EmpiricalDistribution decomposition_sample(const BpveiModel& model, Generation n, std::size_t replications,
                                           std::uint64_t seed, unsigned threads = default_threads(),
                                           bool fast_paths = true);

/// Z~^{(j)}_{steps} for one cohort: starts from I_j and evolves `steps` generations.
Count simulate_cohort(const LawSequence& laws, Generation cohort, Generation steps, Xoshiro256& rng,
                      bool fast_paths, double overflow_guard, bool& exploded);

}  // namespace bpvei
