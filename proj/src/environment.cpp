#include "bpvei/environment.hpp"

#include <algorithm>

namespace bpvei {

using nlohmann::json;

GenerationSchedule::GenerationSchedule(std::vector<Stage> stages) : stages_(std::move(stages)) {
    if (stages_.empty()) throw ValidationError("schedule needs at least one stage");
    Generation expected = 0;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const Stage& st = stages_[i];
        const std::string where = "stage " + std::to_string(i);
        if (st.from != expected) {
            if (st.from < expected) throw ValidationError(where + ": overlaps the previous stage");
            throw ValidationError(where + ": gap before generation " + std::to_string(st.from));
        }
        if (!st.to) {
            if (i + 1 != stages_.size()) throw ValidationError(where + ": open-ended stage must be last");
            break;
        }
        if (*st.to < st.from) throw ValidationError(where + ": 'to' precedes 'from'");
        if (i + 1 == stages_.size()) throw ValidationError(where + ": final stage must be open-ended");
        expected = *st.to + 1;
    }
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const Stage& st = stages_[i];
        const ParamSchedule& ps = st.law.param;
        if (st.law.family != Family::finite_pmf && ps.kind == ParamSchedule::Kind::power && ps.offset == 0 &&
            ps.exponent < 0.0 && st.from == 0)
            throw ValidationError("stage " + std::to_string(i) +
                                  ": power schedule with offset 0 and negative exponent is undefined at n = 0");
    }
}

const Stage& GenerationSchedule::stage_for(Generation n) const {
    if (n < 0) throw DomainError("generation index must be >= 0");
    for (const Stage& st : stages_)
        if (!st.to || n <= *st.to) return st;
    return stages_.back();
}

LawInstance GenerationSchedule::law_at(Generation n) const { return instantiate(stage_for(n).law, n); }

BpveiModel::BpveiModel(std::string name, GenerationSchedule offspring, GenerationSchedule immigration,
                       bool allow_degenerate)
    : name_(std::move(name)),
      offspring_(std::move(offspring)),
      immigration_(std::move(immigration)),
      allow_degenerate_(allow_degenerate) {}

LawInstance BpveiModel::law_at(Role role, Generation n) const {
    const GenerationSchedule& sched = role == Role::offspring ? offspring_ : immigration_;
    LawInstance law = sched.law_at(n);
    if (law.degenerate() && !allow_degenerate_) {
        throw ValidationError(std::string(role == Role::offspring ? "offspring" : "immigration") +
                              " law at generation " + std::to_string(n) +
                              " has zero variance; set allow_degenerate to admit it");
    }
    return law;
}

void BpveiModel::validate(Generation horizon) const {
    for (Generation n = 0; n <= horizon; ++n) {
        (void)law_at(Role::offspring, n);
        (void)law_at(Role::immigration, n);
    }
}

LawSequence::LawSequence(const BpveiModel& model, Generation count) {
    offspring_.reserve(static_cast<std::size_t>(std::max<Generation>(count, 0)));
    immigration_.reserve(offspring_.capacity());
    for (Generation n = 0; n < count; ++n) {
        offspring_.push_back(model.law_at(Role::offspring, n));
        immigration_.push_back(model.law_at(Role::immigration, n));
    }
}

// ---------------------------------------------------------------------- JSON

namespace {

template <class T>
T require(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(ctx + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(ctx + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

ParamSchedule schedule_from_json(const json& j) {
    if (j.is_number()) return ParamSchedule::constant(j.get<double>());
    const std::string ctx = "schedule";
    const auto kind = require<std::string>(j, "kind", ctx);
    if (kind == "constant") return ParamSchedule::constant(require<double>(j, "value", ctx));
    if (kind == "power") {
        const Generation offset = j.contains("offset") ? require<Generation>(j, "offset", ctx) : 0;
        return ParamSchedule::power(require<double>(j, "coeff", ctx), require<double>(j, "exponent", ctx), offset);
    }
    if (kind == "table") {
        if (!j.contains("fallback")) throw ValidationError(ctx + ": table needs a fallback schedule");
        return ParamSchedule::table(require<std::vector<double>>(j, "entries", ctx), schedule_from_json(j.at("fallback")));
    }
    throw ValidationError(ctx + ": unknown kind '" + kind + "'");
}

json schedule_to_json(const ParamSchedule& s) {
    switch (s.kind) {
        case ParamSchedule::Kind::constant:
            return {{"kind", "constant"}, {"value", s.value}};
        case ParamSchedule::Kind::power:
            return {{"kind", "power"}, {"coeff", s.coeff}, {"exponent", s.exponent}, {"offset", s.offset}};
        case ParamSchedule::Kind::table:
            return {{"kind", "table"}, {"entries", s.entries}, {"fallback", schedule_to_json(*s.fallback)}};
    }
    return {};
}

LawSpec law_from_json(const json& j) {
    const std::string ctx = "law";
    const Family family = parse_family(require<std::string>(j, "family", ctx));
    if (family == Family::finite_pmf) return LawSpec::finite_pmf(require<std::vector<double>>(j, "probs", ctx));
    const std::string key(parameter_name(family));
    if (!j.contains(key)) throw ValidationError(ctx + ": missing field '" + key + "'");
    return LawSpec{family, schedule_from_json(j.at(key)), {}};
}

json law_to_json(const LawSpec& law) {
    json j{{"family", std::string(family_name(law.family))}};
    if (law.family == Family::finite_pmf)
        j["probs"] = law.probs;
    else
        j[std::string(parameter_name(law.family))] = schedule_to_json(law.param);
    return j;
}

std::vector<Stage> stages_from_json(const json& j, const char* role) {
    if (!j.is_array()) throw ValidationError(std::string(role) + ": expected an array of stages");
    std::vector<Stage> stages;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string ctx = std::string(role) + " stage " + std::to_string(i);
        const json& s = j[i];
        Stage st;
        st.from = require<Generation>(s, "from", ctx);
        if (s.contains("to") && !s.at("to").is_null()) st.to = require<Generation>(s, "to", ctx);
        if (!s.contains("law")) throw ValidationError(ctx + ": missing field 'law'");
        try {
            st.law = law_from_json(s.at("law"));
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        stages.push_back(std::move(st));
    }
    return stages;
}

BpveiModel build_model(const json& config) {
    if (!config.is_object()) throw ValidationError("model config must be a JSON object");
    const std::string name = config.contains("name") ? require<std::string>(config, "name", "model") : "model";
    if (!config.contains("offspring")) throw ValidationError("model: missing field 'offspring'");
    if (!config.contains("immigration")) throw ValidationError("model: missing field 'immigration'");
    const bool degenerate = config.value("allow_degenerate", false);
    auto build = [&](const char* role) {
        try {
            return GenerationSchedule(stages_from_json(config.at(role), role));
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            if (msg.rfind(role, 0) == 0) throw;
            throw ValidationError(std::string(role) + ": " + msg);
        }
    };
    BpveiModel model(name, build("offspring"), build("immigration"), degenerate);
    model.validate(kValidationHorizon);
    return model;
}

json model_to_json(const BpveiModel& model) {
    auto stages = [](const GenerationSchedule& g) {
        json arr = json::array();
        for (const Stage& st : g.stages()) {
            json s{{"from", st.from}, {"to", nullptr}, {"law", law_to_json(st.law)}};
            if (st.to) s["to"] = *st.to;
            arr.push_back(std::move(s));
        }
        return arr;
    };
    json j{{"name", model.name()}, {"offspring", stages(model.offspring())},
           {"immigration", stages(model.immigration())}};
    if (model.allow_degenerate()) j["allow_degenerate"] = true;
    return j;
}

// ------------------------------------------------------------------- presets

std::vector<std::string> preset_names() {
    return {"example_a", "example_b", "example_c", "critical_geo_pois", "critical_pois_pois", "deterministic_chain"};
}

namespace {

GenerationSchedule constant_law(LawSpec law) { return GenerationSchedule({Stage{0, std::nullopt, std::move(law)}}); }

// bernoulli_shift(1/2) on generations 0..1, then bernoulli_shift(n^exponent)
GenerationSchedule half_then_power(double exponent) {
    return GenerationSchedule({Stage{0, 1, LawSpec::bernoulli_shift(ParamSchedule::constant(0.5))},
                               Stage{2, std::nullopt, LawSpec::bernoulli_shift(ParamSchedule::power(1.0, exponent))}});
}

}  // namespace

BpveiModel preset(const std::string& name, const std::optional<LawSpec>& offspring) {
    const LawSpec half = LawSpec::bernoulli_shift(ParamSchedule::constant(0.5));
    BpveiModel model;
    if (name == "example_a") {
        if (!offspring) throw ValidationError("preset example_a needs an offspring law (--offspring)");
        model = BpveiModel(name, constant_law(*offspring), half_then_power(-2.0));
    } else if (name == "example_b") {
        model = BpveiModel(name, half_then_power(-2.0), constant_law(half));
    } else if (name == "example_c") {
        model = BpveiModel(name, half_then_power(-1.0), constant_law(half));
    } else if (name == "critical_geo_pois") {
        model = BpveiModel(name, constant_law(LawSpec::geometric(ParamSchedule::constant(0.5))),
                           constant_law(LawSpec::poisson(ParamSchedule::constant(1.0))));
    } else if (name == "critical_pois_pois") {
        model = BpveiModel(name, constant_law(LawSpec::poisson(ParamSchedule::constant(1.0))),
                           constant_law(LawSpec::poisson(ParamSchedule::constant(2.0))));
    } else if (name == "deterministic_chain") {
        model = BpveiModel(name, constant_law(LawSpec::finite_pmf({0.0, 1.0})),
                           constant_law(LawSpec::finite_pmf({0.0, 1.0})), true);
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    // deterministic offspring such as f(s) = s is admitted for example_a
    if (name == "example_a" && offspring->family == Family::finite_pmf) {
        const LawInstance law = instantiate(*offspring, 0);
        if (law.degenerate()) model = BpveiModel(name, model.offspring(), model.immigration(), true);
    }
    model.validate(64);
    return model;
}

}  // namespace bpvei
