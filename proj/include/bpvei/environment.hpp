#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpvei/law.hpp"

namespace bpvei {

struct Stage {
    Generation from = 0;
    std::optional<Generation> to;  // inclusive; open-ended when empty
    LawSpec law;
};

/// Piecewise law assignment over generations. Stages are contiguous, start at
/// 0, and the last one is open-ended.
class GenerationSchedule {
public:
    GenerationSchedule() = default;
    /// Throws ValidationError (naming the stage index) on gaps or overlaps.
    explicit GenerationSchedule(std::vector<Stage> stages);

    const std::vector<Stage>& stages() const noexcept { return stages_; }
    const Stage& stage_for(Generation n) const;
    LawInstance law_at(Generation n) const;
    /// Spec of the open-ended final stage.
    const LawSpec& tail_spec() const { return stages_.back().law; }

private:
    std::vector<Stage> stages_;
};

enum class Role { offspring, immigration };

/// Offspring environment plus immigration schedule. Immutable after build.
class BpveiModel {
public:
    BpveiModel() = default;
    BpveiModel(std::string name, GenerationSchedule offspring, GenerationSchedule immigration,
               bool allow_degenerate = false);

    const std::string& name() const noexcept { return name_; }
    const GenerationSchedule& offspring() const noexcept { return offspring_; }
    const GenerationSchedule& immigration() const noexcept { return immigration_; }
    bool allow_degenerate() const noexcept { return allow_degenerate_; }

    /// Instantiated law of generation n, checked against the model's
    /// admissibility rules. Pure in (model, role, n).
    LawInstance law_at(Role role, Generation n) const;

    /// Validate every generation up to `horizon` (inclusive).
    void validate(Generation horizon) const;

private:
    std::string name_;
    GenerationSchedule offspring_;
    GenerationSchedule immigration_;
    bool allow_degenerate_ = false;
};

/// Laws of generations 0..size-1 for both roles, instantiated once.
class LawSequence {
public:
    LawSequence(const BpveiModel& model, Generation count);

    Generation size() const noexcept { return static_cast<Generation>(offspring_.size()); }
    const LawInstance& offspring(Generation n) const { return offspring_[static_cast<std::size_t>(n)]; }
    const LawInstance& immigration(Generation n) const { return immigration_[static_cast<std::size_t>(n)]; }

private:
    std::vector<LawInstance> offspring_;
    std::vector<LawInstance> immigration_;
};

// JSON --------------------------------------------------------------------

ParamSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const ParamSchedule& s);
LawSpec law_from_json(const nlohmann::json& j);
nlohmann::json law_to_json(const LawSpec& law);
std::vector<Stage> stages_from_json(const nlohmann::json& j, const char* role);

/// Build and validate a model from its JSON document.
BpveiModel build_model(const nlohmann::json& config);
nlohmann::json model_to_json(const BpveiModel& model);

// Presets -----------------------------------------------------------------

std::vector<std::string> preset_names();
/// Named built-in model. example_a needs an offspring law (any environment
/// works there); the others ignore `offspring`.
BpveiModel preset(const std::string& name, const std::optional<LawSpec>& offspring = std::nullopt);

/// Number of generations checked eagerly when a model is built.
inline constexpr Generation kValidationHorizon = 4096;

}  // namespace bpvei
