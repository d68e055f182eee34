#include "bpvei/montecarlo.hpp"

#include <algorithm>
#include <cmath>

namespace bpvei {

namespace {

Count offspring_total(const LawInstance& law, Count parents, Xoshiro256& rng, bool fast_paths) {
    if (fast_paths) return law.sample_sum(parents, rng);
    Count total = 0;
    for (Count i = 0; i < parents; ++i) total += law.sample(rng);
    return total;
}

std::vector<Generation> checkpoints_of(const SimConfig& config) {
    std::vector<Generation> cps = config.record;
    if (cps.empty())
        for (Generation n = 1; n <= config.horizon; ++n) cps.push_back(n);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    if (cps.empty() || cps.front() < 0 || cps.back() > config.horizon)
        throw DomainError("checkpoints must lie in [0, horizon]");
    return cps;
}

// Runs one direct-engine replication, storing Z_n at each checkpoint.
// Returns false when the population breached the overflow guard.
bool run_direct(const LawSequence& laws, const std::vector<Generation>& cps, Xoshiro256& rng, bool fast_paths,
                double guard, Count* out) {
    Count z = 0;
    std::size_t c = 0;
    const Generation last = cps.back();
    for (Generation n = 0;; ++n) {
        while (c < cps.size() && cps[c] == n) out[c++] = z;
        if (n == last) return true;
        const Count parents = z + laws.immigration(n).sample(rng);
        if (static_cast<double>(parents) > guard) {
            for (; c < cps.size(); ++c) out[c] = static_cast<Count>(guard);
            return false;
        }
        z = offspring_total(laws.offspring(n), parents, rng, fast_paths);
    }
}

void validate(const SimConfig& config) {
    if (config.replications < 1) throw DomainError("replications must be >= 1");
    if (config.horizon < 0) throw DomainError("horizon must be >= 0");
}

}  // namespace

Trajectory simulate_trajectory(const LawSequence& laws, Generation horizon, Xoshiro256& rng, bool fast_paths,
                               double overflow_guard) {
    if (horizon > laws.size()) throw DomainError("law sequence shorter than the horizon");
    Trajectory t;
    t.values.reserve(static_cast<std::size_t>(horizon) + 1);
    Count z = 0;
    t.values.push_back(z);
    for (Generation n = 0; n < horizon; ++n) {
        const Count parents = z + laws.immigration(n).sample(rng);
        if (static_cast<double>(parents) > overflow_guard) {
            t.exploded = true;
            break;
        }
        z = offspring_total(laws.offspring(n), parents, rng, fast_paths);
        t.values.push_back(z);
    }
    return t;
}

Trajectory simulate_trajectory(const BpveiModel& model, Generation horizon, std::uint64_t seed,
                               std::uint64_t replication, bool fast_paths) {
    const LawSequence laws(model, horizon);
    Xoshiro256 rng = make_stream(seed, replication);
    return simulate_trajectory(laws, horizon, rng, fast_paths);
}

Count simulate_cohort(const LawSequence& laws, Generation cohort, Generation steps, Xoshiro256& rng, bool fast_paths,
                      double overflow_guard, bool& exploded) {
    Count z = laws.immigration(cohort).sample(rng);
    for (Generation k = 0; k < steps; ++k) {
        if (z == 0) return 0;
        if (static_cast<double>(z) > overflow_guard) {
            exploded = true;
            return z;
        }
        z = offspring_total(laws.offspring(cohort + k), z, rng, fast_paths);
    }
    return z;
}

SurvivalCurve survival_curve(const BpveiModel& model, const SimConfig& config) {
    validate(config);
    const std::vector<Generation> cps = checkpoints_of(config);
    const auto samples = checkpoint_samples(model, [&] {
        SimConfig c = config;
        c.record = cps;
        return c;
    }());
    SurvivalCurve curve;
    const double r = static_cast<double>(config.replications);
    for (Generation n : cps) {
        const EmpiricalDistribution& d = samples.at(n);
        // values are sorted, count the positive ones from the back
        const auto first_pos = std::upper_bound(d.values.begin(), d.values.end(), 0.0);
        const auto alive = static_cast<std::size_t>(d.values.end() - first_pos) + d.exploded;
        SurvivalPoint p;
        p.n = n;
        p.replications = config.replications;
        p.estimate = static_cast<double>(alive) / r;
        p.stderr_ = std::sqrt(p.estimate * (1.0 - p.estimate) / r);
        curve.points.push_back(p);
        curve.exploded = std::max(curve.exploded, d.exploded);
    }
    return curve;
}

std::map<Generation, EmpiricalDistribution> checkpoint_samples(const BpveiModel& model, const SimConfig& config) {
    validate(config);
    const std::vector<Generation> cps = checkpoints_of(config);
    const std::size_t reps = config.replications;
    const std::size_t width = cps.size();
    const LawSequence laws(model, std::max<Generation>(cps.back(), 1));

    std::vector<Count> grid(reps * width, 0);
    std::vector<std::uint8_t> exploded(reps * width, 0);

    if (config.engine == Engine::direct) {
        parallel_for(reps, config.threads, [&](std::size_t r) {
            Xoshiro256 rng = make_stream(config.seed, r);
            Count* row = grid.data() + r * width;
            if (!run_direct(laws, cps, rng, config.fast_paths, config.overflow_guard, row)) {
                // mark checkpoints at or after the breach
                for (std::size_t c = 0; c < width; ++c)
                    if (static_cast<double>(row[c]) >= config.overflow_guard) exploded[r * width + c] = 1;
            }
        });
    } else {
        parallel_for(reps, config.threads, [&](std::size_t r) {
            for (std::size_t c = 0; c < width; ++c) {
                const Generation n = cps[c];
                Count total = 0;
                bool boom = false;
                for (Generation j = 0; j < n; ++j) {
                    // lane 0 is the direct engine; cohort j uses lane j + 1 within checkpoint c
                    Xoshiro256 rng = make_stream(config.seed, r, (static_cast<std::uint64_t>(c) << 32) + static_cast<std::uint64_t>(j) + 1);
                    total += simulate_cohort(laws, j, n - j, rng, config.fast_paths, config.overflow_guard, boom);
                }
                grid[r * width + c] = total;
                exploded[r * width + c] = boom ? 1 : 0;
            }
        });
    }

    std::map<Generation, EmpiricalDistribution> out;
    for (std::size_t c = 0; c < width; ++c) {
        EmpiricalDistribution d;
        d.n = cps[c];
        d.replications = reps;
        d.seed = config.seed;
        d.values.reserve(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            if (exploded[r * width + c])
                ++d.exploded;
            else
                d.values.push_back(static_cast<double>(grid[r * width + c]));
        }
        std::sort(d.values.begin(), d.values.end());
        out.emplace(cps[c], std::move(d));
    }
    return out;
}

EmpiricalDistribution EmpiricalDistribution::normalized(double scale) const {
    EmpiricalDistribution d = *this;
    for (double& v : d.values) v /= scale;
    return d;
}

EmpiricalDistribution endpoint_sample(const BpveiModel& model, Generation n, std::size_t replications,
                                      std::uint64_t seed, unsigned threads, bool fast_paths) {
    SimConfig c;
    c.horizon = n;
    c.replications = replications;
    c.seed = seed;
    c.record = {n};
    c.threads = threads;
    c.fast_paths = fast_paths;
    return checkpoint_samples(model, c).at(n);
}

EmpiricalDistribution decomposition_sample(const BpveiModel& model, Generation n, std::size_t replications,
                                           std::uint64_t seed, unsigned threads, bool fast_paths) {
    SimConfig c;
    c.horizon = n;
    c.replications = replications;
    c.seed = seed;
    c.record = {n};
    c.threads = threads;
    c.fast_paths = fast_paths;
    c.engine = Engine::decomposition;
    return checkpoint_samples(model, c).at(n);
}

}  // namespace bpvei
