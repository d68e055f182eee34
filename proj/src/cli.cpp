#include "bpvei/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bpvei/analysis.hpp"
#include "bpvei/environment.hpp"
#include "bpvei/exact.hpp"
#include "bpvei/format.hpp"
#include "bpvei/limitlab.hpp"
#include "bpvei/montecarlo.hpp"
#include "bpvei/pgf.hpp"

#ifndef BPVEI_VERSION
#define BPVEI_VERSION "0.0.0"
#endif

namespace bpvei::cli {

using nlohmann::json;

namespace {

struct Options {
    // global
    std::string model;
    std::string offspring;
    std::uint64_t seed = 1;
    std::string out;
    unsigned threads = default_threads();
    std::string format = "csv";
    // per subcommand
    Generation n = -1;
    std::optional<Generation> k;
    int grid = 101;
    Generation horizon = -1;
    std::size_t reps = 0;
    std::string engine = "direct";
    std::vector<Generation> record;
    bool raw = false;
    bool slow = false;
    std::size_t cutoff = 2048;
    std::size_t max_cutoff = 65536;
    double tol = 1e-10;
    bool no_grow = false;
    std::vector<Generation> n_list;
    std::vector<double> lambdas;
    Generation audit_horizon = 2048;
    std::string manifest;
};

std::string n2s(double v) { return format_number(v); }

class Emitter {
public:
    Emitter(std::ostream& console) : console_(console) {}

    void write(const std::string& path, const std::string& content) {
        if (path.empty()) {
            console_ << content;
            return;
        }
        const std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot open output file '" + path + "'");
        f << content;
        if (!f) throw ValidationError("failed writing '" + path + "'");
        written_.push_back(path);
    }
    const std::vector<std::string>& written() const { return written_; }

private:
    std::ostream& console_;
    std::vector<std::string> written_;
};

std::string companion(const std::string& out, const std::string& suffix) {
    return out.empty() ? std::string() : out + suffix;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

LawSpec parse_offspring(const std::string& text) {
    if (!text.empty() && text.front() == '{') return law_from_json(json::parse(text));
    // family:param or finite_pmf:p0,p1,...
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("--offspring expects FAMILY:PARAM or a JSON law");
    const Family fam = parse_family(text.substr(0, colon));
    const std::string rest = text.substr(colon + 1);
    if (fam == Family::finite_pmf) {
        std::vector<double> probs;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) probs.push_back(std::stod(item));
        return LawSpec::finite_pmf(std::move(probs));
    }
    return LawSpec{fam, ParamSchedule::constant(std::stod(rest)), {}};
}

struct LoadedModel {
    BpveiModel model;
    std::string source;  // preset:NAME, file path, or "inline"
    bool from_file = false;
};

LoadedModel load_model(const Options& o) {
    if (o.model.empty()) throw ValidationError("--model is required (preset:NAME or FILE)");
    LoadedModel m;
    m.source = o.model;
    std::optional<LawSpec> off;
    if (!o.offspring.empty()) off = parse_offspring(o.offspring);
    if (o.model.rfind("preset:", 0) == 0) {
        m.model = preset(o.model.substr(7), off);
        return m;
    }
    if (off) throw ValidationError("--offspring only applies to preset:example_a");
    if (o.model.front() == '{') {
        m.model = build_model(json::parse(o.model));
        m.source = "inline";
        return m;
    }
    std::ifstream f(o.model);
    if (!f) throw ValidationError("cannot read model file '" + o.model + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ValidationError("model file '" + o.model + "': " + e.what());
    }
    m.model = build_model(j);
    m.from_file = true;
    return m;
}

// Arguments needed to reproduce the run: everything except --out and
// --threads, with a model file replaced by its contents.
std::vector<std::string> replay_args(const std::vector<std::string>& args, const LoadedModel& lm) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--out" || a == "--threads") {
            ++i;
            continue;
        }
        if (a.rfind("--out=", 0) == 0 || a.rfind("--threads=", 0) == 0) continue;
        if (lm.from_file && (a == "--model" || a.rfind("--model=", 0) == 0)) {
            if (a == "--model") ++i;
            kept.push_back("--model");
            kept.push_back(model_to_json(lm.model).dump());
            continue;
        }
        kept.push_back(a);
    }
    return kept;
}

struct RunContext {
    const Options& o;
    const LoadedModel& lm;
    Emitter& emit;
    json config = json::object();
    int code = ok;
};

// ------------------------------------------------------------------ handlers

void run_validate(RunContext& c) {
    const Generation h = c.o.horizon >= 0 ? c.o.horizon : kValidationHorizon;
    c.lm.model.validate(h);
    c.config["horizon"] = h;
    json j{{"valid", true}, {"horizon", h}, {"model", model_to_json(c.lm.model)}};
    c.emit.write(c.o.out, dump(j));
}

void run_pgf(RunContext& c) {
    if (c.o.n < 0) throw ValidationError("pgf needs --n");
    const PgfCurve curve = pgf_curve(c.lm.model, c.o.k, c.o.n, c.o.grid);
    c.config["n"] = c.o.n;
    c.config["k"] = c.o.k ? json(*c.o.k) : json(nullptr);
    c.config["grid"] = c.o.grid;
    const std::string k = c.o.k ? std::to_string(*c.o.k) : std::string("F");
    if (c.o.format == "json") {
        json j{{"k", c.o.k ? json(*c.o.k) : json("F")}, {"n", c.o.n}, {"s", curve.grid}, {"value", curve.values}};
        c.emit.write(c.o.out, dump(j));
        return;
    }
    std::ostringstream os;
    os << "s,value,k,n\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        os << n2s(curve.grid[i]) << ',' << n2s(curve.values[i]) << ',' << k << ',' << c.o.n << '\n';
    c.emit.write(c.o.out, os.str());
}

void run_oracle(RunContext& c) {
    if (c.o.n < 0) throw ValidationError("oracle needs --n");
    PropagateOptions po;
    po.cutoff = c.o.cutoff;
    po.tail_tol = c.o.tol;
    po.grow = !c.o.no_grow;
    po.max_cutoff = std::max(c.o.max_cutoff, c.o.cutoff);
    const TruncatedPmf pmf = propagate(c.lm.model, c.o.n, po);
    c.config["n"] = c.o.n;
    c.config["cutoff"] = c.o.cutoff;
    c.config["max_cutoff"] = po.max_cutoff;
    c.config["tol"] = c.o.tol;
    c.config["grow"] = po.grow;
    if (pmf.tail_exceeded) c.code = numeric_guard;
    if (c.o.format == "json") {
        json j{{"n", c.o.n}, {"tail", pmf.tail}, {"cutoff", pmf.cutoff}, {"tail_exceeded", pmf.tail_exceeded},
               {"prob", pmf.probs}};
        c.emit.write(c.o.out, dump(j));
        return;
    }
    std::ostringstream os;
    os << "# tail=" << n2s(pmf.tail) << ",cutoff=" << pmf.cutoff << '\n';
    os << "k,prob\n";
    std::size_t len = pmf.probs.size();
    while (len > 1 && pmf.probs[len - 1] == 0.0) --len;
    for (std::size_t k = 0; k < len; ++k) os << k << ',' << n2s(pmf.probs[k]) << '\n';
    c.emit.write(c.o.out, os.str());
}

void run_moments(RunContext& c) {
    const Generation h = c.o.horizon >= 0 ? c.o.horizon : 50;
    const MomentTable t = moment_table(c.lm.model, h);
    c.config["horizon"] = h;
    if (t.overflow) c.code = numeric_guard;
    if (c.o.format == "json") {
        json rows = json::array();
        for (const auto& r : t.rows)
            rows.push_back({{"n", r.n}, {"m", r.m}, {"sigma2", r.sigma2}, {"alpha", r.alpha}, {"beta2", r.beta2},
                            {"mu", r.mu}, {"nu", r.nu}, {"mean", r.mean}, {"variance", r.variance},
                            {"mean_double_sum", r.mean_double_sum}, {"variance_printed", r.variance_printed}});
        c.emit.write(c.o.out, dump(json{{"overflow", t.overflow}, {"rows", rows}}));
        return;
    }
    std::ostringstream os;
    os << "n,m,sigma2,alpha,beta2,mu,nu,mean,variance,mean_double_sum,variance_printed,printed_minus_recursion\n";
    for (const auto& r : t.rows)
        os << r.n << ',' << n2s(r.m) << ',' << n2s(r.sigma2) << ',' << n2s(r.alpha) << ',' << n2s(r.beta2) << ','
           << n2s(r.mu) << ',' << n2s(r.nu) << ',' << n2s(r.mean) << ',' << n2s(r.variance) << ','
           << n2s(r.mean_double_sum) << ',' << n2s(r.variance_printed) << ',' << n2s(r.variance_printed - r.variance)
           << '\n';
    c.emit.write(c.o.out, os.str());
}

json criticality_json(const CriticalityReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"verdict", to_string(r.verdict)},
            {"horizons", r.horizons},
            {"partial_sums", r.partial_sums},
            {"inverse_mu", r.inverse_mu},
            {"ratio", r.ratio},
            {"last_growth", r.last_growth},
            {"increment_exponent", opt(r.increment_exponent)},
            {"divergent", r.divergent},
            {"convergent", r.convergent},
            {"ratio_vanishing", r.ratio_vanishing}};
}

void run_criticality(RunContext& c) {
    const Generation h = c.o.horizon >= 0 ? c.o.horizon : 4096;
    if (h < 8) throw ValidationError("criticality needs --horizon >= 8");
    c.config["horizon"] = h;
    const CriticalityReport rep = criticality_classify(c.lm.model, dyadic_horizons(h));
    const MomentTable t = moment_table(c.lm.model, h);
    const NormalizerSequence norm = normalizer(c.lm.model, h);
    const json verdict = criticality_json(rep);
    std::ostringstream os;
    os << "n,nu,mu,partial_sum,inverse_mu,ratio\n";
    for (Generation n = 0; n < h; ++n) {
        const auto& row = t.rows[static_cast<std::size_t>(n)];
        const double s = norm.partial_sums[static_cast<std::size_t>(n)];
        os << n << ',' << n2s(row.nu) << ',' << n2s(row.mu) << ',' << n2s(s) << ',' << n2s(1.0 / row.mu) << ','
           << n2s(s > 0.0 ? (1.0 / row.mu) / s : std::numeric_limits<double>::quiet_NaN()) << '\n';
    }
    if (c.o.format == "json") {
        c.emit.write(c.o.out, dump(verdict));
    } else {
        c.emit.write(c.o.out, os.str());
        c.emit.write(companion(c.o.out, ".verdict.json"), dump(verdict));
    }
}

void run_extinction(RunContext& c) {
    const Generation h = c.o.horizon >= 0 ? c.o.horizon : 200;
    if (h < 2) throw ValidationError("extinction needs --horizon >= 2");
    c.config["horizon"] = h;
    const ExtinctionReport rep = extinction_conditions(c.lm.model, h);
    const QLowerBounds q = q_lower_bounds(c.lm.model, h);
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    const json verdict{{"verdict", to_string(rep.verdict)},
                       {"composed_limit", to_string(rep.composed_limit)},
                       {"summable", to_string(rep.summable)},
                       {"horizons", rep.horizons},
                       {"composed_zero", rep.composed_zero},
                       {"composed_gap", rep.composed_gap},
                       {"partial_sums", rep.partial_sums},
                       {"gap_exponent", opt(rep.gap_exponent)},
                       {"increment_exponent", opt(rep.increment_exponent)},
                       {"analytic_tail", opt(rep.analytic_tail)},
                       {"series_upper", opt(rep.series_upper)},
                       {"q_hat", q.q_hat},
                       {"q_tail_factor", q.tail_factor},
                       {"q_truncated", q.truncated}};
    if (c.o.format == "json") {
        c.emit.write(c.o.out, dump(verdict));
        return;
    }
    const LawSequence laws(c.lm.model, h + 1);
    std::ostringstream os;
    os << "n,increment,partial_sum,q_lower\n";
    double sum = 0.0;
    for (Generation n = 0; n <= h; ++n) {
        const double inc = laws.immigration(n).complement(laws.offspring(n).complement(1.0));
        sum += inc;
        os << n << ',' << n2s(inc) << ',' << n2s(sum) << ',' << n2s(q.bounds[static_cast<std::size_t>(n)]) << '\n';
    }
    c.emit.write(c.o.out, os.str());
    c.emit.write(companion(c.o.out, ".verdict.json"), dump(verdict));
}

SimConfig sim_config(const RunContext& c, Generation default_horizon, std::size_t default_reps) {
    SimConfig s;
    s.horizon = c.o.horizon >= 0 ? c.o.horizon : default_horizon;
    s.replications = c.o.reps > 0 ? c.o.reps : default_reps;
    s.seed = c.o.seed;
    s.record = c.o.record;
    s.threads = c.o.threads;
    s.fast_paths = !c.o.slow;
    if (c.o.engine == "direct")
        s.engine = Engine::direct;
    else if (c.o.engine == "decomposition")
        s.engine = Engine::decomposition;
    else
        throw ValidationError("--engine must be direct or decomposition");
    return s;
}

json sim_config_json(const SimConfig& s) {
    return {{"horizon", s.horizon},
            {"replications", s.replications},
            {"seed", s.seed},
            {"record", s.record},
            {"engine", s.engine == Engine::direct ? "direct" : "decomposition"},
            {"overflow_guard", s.overflow_guard},
            {"fast_paths", s.fast_paths}};
}

void run_simulate(RunContext& c) {
    SimConfig s = sim_config(c, 100, 1000);
    if (s.record.empty()) s.record = {s.horizon};
    c.config = sim_config_json(s);
    c.config["raw"] = c.o.raw;
    const auto samples = checkpoint_samples(c.lm.model, s);
    std::size_t exploded = 0;
    for (const auto& [n, d] : samples) exploded = std::max(exploded, d.exploded);
    if (exploded > 0) c.code = numeric_guard;
    std::ostringstream os;
    if (c.o.raw) {
        // one value per line, Z at the last checkpoint
        for (double v : samples.rbegin()->second.values) os << static_cast<Count>(v) << '\n';
    } else {
        os << "n,estimate,stderr,R\n";
        for (const auto& [n, d] : samples) {
            const double r = static_cast<double>(d.values.size());
            double mean = 0.0, ss = 0.0;
            for (double v : d.values) mean += v;
            mean /= r;
            for (double v : d.values) ss += (v - mean) * (v - mean);
            const double se = d.values.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
            os << n << ',' << n2s(mean) << ',' << n2s(se) << ',' << d.values.size() << '\n';
        }
    }
    c.emit.write(c.o.out, os.str());
}

void run_survival(RunContext& c) {
    const SimConfig s = sim_config(c, 1000, 2000);
    c.config = sim_config_json(s);
    const SurvivalCurve curve = survival_curve(c.lm.model, s);
    if (curve.exploded > 0) c.code = numeric_guard;
    std::ostringstream os;
    if (c.o.format == "json") {
        json pts = json::array();
        for (const auto& p : curve.points)
            pts.push_back({{"n", p.n}, {"estimate", p.estimate}, {"stderr", p.stderr_}, {"R", p.replications}});
        c.emit.write(c.o.out, dump(json{{"exploded", curve.exploded}, {"points", pts}}));
        return;
    }
    os << "n,estimate,stderr,R\n";
    for (const auto& p : curve.points)
        os << p.n << ',' << n2s(p.estimate) << ',' << n2s(p.stderr_) << ',' << p.replications << '\n';
    c.emit.write(c.o.out, os.str());
}

void run_figure1(RunContext& c) {
    SimConfig s = sim_config(c, 1000, 2000);
    s.record.clear();
    c.config = sim_config_json(s);
    const std::string prefix = c.o.out.empty() ? std::string("figure1") : c.o.out;
    for (const std::string name : {"example_b", "example_c"}) {
        const BpveiModel model = preset(name);
        const SurvivalCurve curve = survival_curve(model, s);
        const std::vector<double> exact = exact_survival_curve(model, s.horizon);
        if (curve.exploded > 0) c.code = numeric_guard;
        std::ostringstream os;
        os << "n,p_hat,stderr,exact\n";
        for (const auto& p : curve.points)
            os << p.n << ',' << n2s(p.estimate) << ',' << n2s(p.stderr_) << ','
               << n2s(exact[static_cast<std::size_t>(p.n)]) << '\n';
        c.emit.write(prefix + "_" + name + ".csv", os.str());
    }
}

void run_gamma_limit(RunContext& c) {
    GammaLimitOptions g;
    g.n_list = c.o.n_list.empty() ? std::vector<Generation>{250, 500, 1000, 2000} : c.o.n_list;
    g.replications = c.o.reps > 0 ? c.o.reps : 10000;
    g.seed = c.o.seed;
    if (!c.o.lambdas.empty()) g.lambdas = c.o.lambdas;
    g.threads = c.o.threads;
    g.audit_horizon = c.o.audit_horizon;
    c.config = {{"n", g.n_list}, {"replications", g.replications}, {"seed", g.seed}, {"lambdas", g.lambdas},
                {"audit_horizon", g.audit_horizon}};
    const GammaLimitReport rep = verify_gamma_limit(c.lm.model, g);
    for (const auto& p : rep.points)
        if (p.exploded > 0) c.code = numeric_guard;
    if (c.o.format == "csv") {
        c.emit.write(c.o.out, rep.to_csv());
        c.emit.write(companion(c.o.out, ".json"), dump(rep.to_json()));
    } else {
        c.emit.write(c.o.out, dump(rep.to_json()));
        c.emit.write(companion(c.o.out, ".csv"), rep.to_csv());
    }
}

std::vector<std::string> reversed(std::vector<std::string> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

int run_replay(const Options& o, std::ostream& out, std::ostream& err) {
    std::ifstream f(o.manifest);
    if (!f) throw ValidationError("cannot read manifest '" + o.manifest + "'");
    const json m = json::parse(f);
    if (!m.contains("args") || !m.at("args").is_array()) throw ValidationError("manifest has no args");
    std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
    const std::string target = !o.out.empty() ? o.out : m.value("out", std::string());
    if (!target.empty()) {
        args.push_back("--out");
        args.push_back(target);
    }
    args.push_back("--threads");
    args.push_back(std::to_string(o.threads));
    return dispatch(args, out, err);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Branching processes in varying environment with immigration"};
    app.name("bpvei");
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_version_flag("--version", BPVEI_VERSION);
    app.add_option("--model", o.model, "preset:NAME or model JSON file");
    app.add_option("--offspring", o.offspring, "offspring law for preset:example_a (FAMILY:PARAM or JSON)");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--out", o.out, "output path (stdout when omitted)");
    app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* validate = app.add_subcommand("validate", "check a model");
    validate->add_option("--horizon", o.horizon, "generations to check");

    auto* pgf = app.add_subcommand("pgf", "generating function curve f_{k,n} or F_n");
    pgf->add_option("--n", o.n)->required();
    pgf->add_option("--k", o.k, "window start; omit for the process p.g.f.");
    pgf->add_option("--grid", o.grid, "grid points on [0,1]")->check(CLI::Range(2, 1000000));

    auto* oracle = app.add_subcommand("oracle", "exact pmf of Z_n by truncated propagation");
    oracle->add_option("--n", o.n)->required();
    oracle->add_option("--cutoff", o.cutoff)->check(CLI::PositiveNumber);
    oracle->add_option("--max-cutoff", o.max_cutoff)->check(CLI::PositiveNumber);
    oracle->add_option("--tol", o.tol);
    oracle->add_flag("--no-grow", o.no_grow, "keep the initial cutoff");

    auto* moments = app.add_subcommand("moments", "mean and variance table");
    moments->add_option("--horizon", o.horizon);

    auto* crit = app.add_subcommand("criticality", "criticality evidence");
    crit->add_option("--horizon", o.horizon);

    auto* ext = app.add_subcommand("extinction", "extinction criterion evidence");
    ext->add_option("--horizon", o.horizon);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo samples of Z_n");
    auto* surv = app.add_subcommand("survival", "Monte Carlo survival curve");
    for (CLI::App* sc : {sim, surv}) {
        sc->add_option("--horizon", o.horizon);
        sc->add_option("--reps", o.reps)->check(CLI::PositiveNumber);
        sc->add_option("--record", o.record, "checkpoints")->delimiter(',');
        sc->add_option("--engine", o.engine)->check(CLI::IsMember({"direct", "decomposition"}));
        sc->add_flag("--slow", o.slow, "individual-by-individual sampling");
    }
    sim->add_flag("--raw", o.raw, "one value per line instead of the summary");

    auto* fig = app.add_subcommand("figure1", "survival curves of example_b and example_c");
    fig->add_option("--reps", o.reps)->check(CLI::PositiveNumber);
    fig->add_option("--horizon", o.horizon);

    auto* gl = app.add_subcommand("gamma-limit", "gamma limit of Z_n / a_n");
    gl->add_option("--n", o.n_list)->delimiter(',');
    gl->add_option("--reps", o.reps)->check(CLI::PositiveNumber);
    gl->add_option("--lambdas", o.lambdas)->delimiter(',');
    gl->add_option("--audit-horizon", o.audit_horizon);

    auto* replay = app.add_subcommand("replay", "re-run a manifest");
    replay->add_option("manifest", o.manifest)->required();

    try {
        app.parse(reversed(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (replay->parsed()) return run_replay(o, out, err);

        CLI::App* sub = app.get_subcommands().front();
        const LoadedModel lm = sub == fig ? LoadedModel{preset("example_b"), "preset:example_b+example_c", false}
                                          : load_model(o);
        Emitter emit(out);
        RunContext ctx{o, lm, emit};
        const std::string name = sub->get_name();
        if (sub == validate) run_validate(ctx);
        else if (sub == pgf) run_pgf(ctx);
        else if (sub == oracle) run_oracle(ctx);
        else if (sub == moments) run_moments(ctx);
        else if (sub == crit) run_criticality(ctx);
        else if (sub == ext) run_extinction(ctx);
        else if (sub == sim) run_simulate(ctx);
        else if (sub == surv) run_survival(ctx);
        else if (sub == fig) run_figure1(ctx);
        else if (sub == gl) run_gamma_limit(ctx);

        if (!emit.written().empty()) {
            json manifest{{"tool", "bpvei"},
                          {"version", BPVEI_VERSION},
                          {"subcommand", name},
                          {"model_source", lm.source},
                          {"model", sub == fig ? json(nullptr) : model_to_json(lm.model)},
                          {"seed", o.seed},
                          {"format", o.format},
                          {"config", ctx.config},
                          {"out", o.out},
                          {"outputs", emit.written()},
                          {"args", replay_args(args, lm)},
                          {"exit_code", ctx.code}};
            const std::string base = o.out.empty() ? std::string("figure1") : o.out;
            Emitter(out).write(base + ".manifest.json", dump(manifest));
        }
        if (ctx.code == numeric_guard) err << "bpvei: completed with flagged numerics (see output)\n";
        return ctx.code;
    } catch (const std::exception& e) {
        err << "bpvei: error: " << e.what() << '\n';
        return usage_error;
    }
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace bpvei::cli
