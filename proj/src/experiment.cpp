#include "pabc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "pabc/data.hpp"
#include "pabc/io.hpp"
#include "pabc/rng.hpp"

namespace pabc {

using nlohmann::json;

std::string to_string(InstanceSource s) {
    switch (s) {
        case InstanceSource::named: return "named";
        case InstanceSource::file: return "file";
        case InstanceSource::random: return "random";
    }
    return "?";
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::pabc: return "pabc";
        case Algorithm::pabc_l: return "pabc-l";
        case Algorithm::pabc_oa: return "pabc-oa";
        case Algorithm::population_pabc: return "population-pabc";
        case Algorithm::population_pabc_l: return "population-pabc-l";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    for (auto a : {Algorithm::pabc, Algorithm::pabc_l, Algorithm::pabc_oa, Algorithm::population_pabc,
                   Algorithm::population_pabc_l})
        if (to_string(a) == s) return a;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

namespace {

bool is_population(Algorithm a) { return a == Algorithm::population_pabc || a == Algorithm::population_pabc_l; }
bool is_lagrangian_algorithm(Algorithm a) { return a == Algorithm::pabc_l || a == Algorithm::population_pabc_l; }

bool needs_realizability(Guarantee g) {
    switch (g) {
        case Guarantee::value_identification:
        case Guarantee::policy_gap:
        case Guarantee::lagrangian_value:
        case Guarantee::lagrangian_policy: return true;
        default: return false;
    }
}

bool uses_true_gap(Guarantee g) {
    return g == Guarantee::policy_gap || g == Guarantee::lagrangian_policy || g == Guarantee::policy_gap_linf ||
           g == Guarantee::lagrangian_policy_linf;
}

bool uses_user_gap(Guarantee g) {
    return g == Guarantee::policy_gap_robust || g == Guarantee::lagrangian_policy_robust;
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
    if (c.trials == 0) throw std::invalid_argument("trials must be at least 1");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (c.source == InstanceSource::file && c.path.empty()) throw std::invalid_argument("instance file path missing");
    if (c.guarantee) {
        if (c.alpha || c.n) throw std::invalid_argument("give either a guarantee mode or explicit alpha/n, not both");
        if (!(c.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
        if (c.algorithm == Algorithm::pabc_oa) throw std::invalid_argument("pabc-oa takes an explicit n, not a guarantee");
        if (is_lagrangian(*c.guarantee) != is_lagrangian_algorithm(c.algorithm))
            throw std::invalid_argument("guarantee '" + to_string(*c.guarantee) + "' does not apply to " +
                                        to_string(c.algorithm));
        if (uses_user_gap(*c.guarantee) && !(c.c_gap > 0.0))
            throw std::invalid_argument("this guarantee needs a positive C_gap");
    } else {
        const bool constrained = c.algorithm == Algorithm::pabc || c.algorithm == Algorithm::population_pabc;
        if (constrained && !c.alpha) throw std::invalid_argument("alpha is required without a guarantee mode");
        if (!is_population(c.algorithm) && !c.n) throw std::invalid_argument("n is required for sampled runs");
        if (c.alpha && !(*c.alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
    }
    if (!(c.c_gap >= 0.0)) throw std::invalid_argument("C_gap must be nonnegative");
    if (c.n && *c.n == 0) throw std::invalid_argument("n must be positive");
}

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string s = "validation failed";
          for (const auto& p : problems) s += "\n  " + p;
          return s;
      }()),
      problems_(std::move(problems)) {}

NamedInstance load_experiment_instance(const ExperimentConfig& c) {
    NamedInstance inst;
    switch (c.source) {
        case InstanceSource::named:
            if (c.named == "counterexample") inst = build_counterexample();
            else if (c.named == "table1") inst = build_table1_example();
            else throw std::invalid_argument("unknown named instance '" + c.named + "'");
            break;
        case InstanceSource::file: inst = io::load_instance(c.path); break;
        case InstanceSource::random: inst = random_instance(c.instance_seed, c.random); break;
    }
    return inst;
}

std::vector<std::string> assumption_failures(const ExperimentConfig& c, const NamedInstance& inst) {
    std::vector<std::string> out;
    const bool oa = c.algorithm == Algorithm::pabc_oa;
    if (!c.guarantee && !oa) return out;
    const bool realizable = oa || needs_realizability(*c.guarantee);
    const auto& a = inst.annotations;
    if (c.checks.q_realizable && realizable && !a.q_star_in_F)
        out.push_back("Q*-realizability: the optimal Q-function is not a member of F");
    if (c.checks.w_realizable && realizable) {
        if (!a.w_star_exists)
            out.push_back("w*-realizability: the density ratio d*/d^D does not exist (d^D misses a pair the optimal "
                          "policy visits)");
        else if (!a.w_star_in_W)
            out.push_back("w*-realizability: the density ratio d*/d^D is not a member of W");
    }
    if (c.checks.value_range)
        for (auto& v : value_range_violations(inst.F)) out.push_back("value range: " + v);
    if (c.checks.weight_bound) {
        const double C = inst.W.bound_C();
        if (!(C > 0.0) || !std::isfinite(C)) out.push_back("weight bound: max |w| over W must be finite and positive");
    }
    if (c.checks.gap && (oa || uses_true_gap(*c.guarantee)) && !(a.gap_q_star > 0.0 && std::isfinite(a.gap_q_star)))
        out.push_back("gap: the optimal Q-function needs a unique greedy action with a positive margin at every state");
    return out;
}

ResolvedHyperparameters resolve_hyperparameters(const ExperimentConfig& c, const NamedInstance& inst) {
    ResolvedHyperparameters r;
    if (!c.guarantee) {
        r.alpha = c.alpha;
        r.c_gap = c.c_gap;
        r.n = is_population(c.algorithm) ? 0 : c.n.value_or(0);
        return r;
    }
    const Guarantee g = *c.guarantee;
    HyperparameterInput in;
    in.mode = g;
    in.epsilon = c.epsilon;
    in.delta = c.delta;
    in.horizon = inst.mdp.horizon;
    in.C = inst.W.bound_C();
    in.size_F = inst.F.size();
    in.size_W = inst.W.size();
    if (uses_true_gap(g)) in.gap = inst.annotations.gap_q_star;
    if (uses_user_gap(g)) in.gap = c.c_gap;
    switch (g) {
        case Guarantee::value_identification_robust:
        case Guarantee::lagrangian_value_robust:
            in.eps_F = eps_F(inst.F, inst.W, inst.mdp, inst.data_dist).value;
            break;
        case Guarantee::policy_gap_robust:
        case Guarantee::lagrangian_policy_robust:
            in.eps_F = eps_F(prescreen(inst.F, c.c_gap).kept, inst.W, inst.mdp, inst.data_dist).value;
            break;
        case Guarantee::policy_gap_linf:
        case Guarantee::lagrangian_policy_linf: in.eps_F_inf = eps_F_inf(inst.F, inst.mdp).value; break;
        default: break;
    }
    if (!needs_realizability(g)) r.eps_W = eps_W(inst.F, inst.W, inst.mdp, inst.data_dist).value;
    const Hyperparameters hp = hyperparameters(in);
    r.alpha = hp.alpha;
    r.c_gap = hp.c_gap;
    r.n = is_population(c.algorithm) ? 0 : hp.n_required;
    r.input = in;
    r.slack = robustness_slack(in, r.eps_W);
    return r;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Aggregate aggregate(const std::vector<TrialRow>& rows, double delta) {
    Aggregate a;
    a.trials = rows.size();
    a.target_rate = 1.0 - delta;
    std::vector<double> errs, subs;
    for (const auto& r : rows) {
        if (!r.error.empty()) ++a.errors;
        if (r.success) {
            ++a.evaluated;
            if (*r.success) ++a.successes;
        }
        if (r.error.empty()) {
            errs.push_back(r.value_error);
            subs.push_back(r.suboptimality);
        }
    }
    a.success_rate = a.evaluated ? static_cast<double>(a.successes) / static_cast<double>(a.evaluated) : 0.0;
    a.meets_target = a.evaluated > 0 && a.success_rate >= a.target_rate;
    if (!errs.empty()) {
        double s = 0.0;
        for (double e : errs) s += e;
        a.mean_value_error = s / static_cast<double>(errs.size());
        a.median_value_error = median(errs);
        a.median_suboptimality = median(subs);
        a.max_suboptimality = *std::max_element(subs.begin(), subs.end());
    }
    return a;
}

namespace {

constexpr double kSlack = 1e-12;

struct TrialContext {
    const ExperimentConfig& config;
    const NamedInstance& inst;
    const ResolvedHyperparameters& hyper;
    double v_star;
    double threshold;
    PabcConfig pabc_config;
};

void score_selection(const TrialContext& ctx, const Selection& s, TrialRow& row) {
    row.member = s.name;
    row.estimate = s.estimate;
    row.v_pi = policy_value(ctx.inst.mdp, s.policy);
    row.value_error = std::abs(s.estimate - ctx.v_star);
    row.suboptimality = ctx.v_star - row.v_pi;
    if (ctx.config.guarantee) {
        row.success = is_policy_guarantee(*ctx.config.guarantee) ? row.suboptimality <= ctx.threshold + kSlack
                                                                  : row.value_error <= ctx.threshold + kSlack;
    } else if (ctx.config.target) {
        row.success = ctx.hyper.c_gap > 0.0 ? row.suboptimality <= *ctx.config.target + kSlack
                                            : row.value_error <= *ctx.config.target + kSlack;
    }
}

TrialRow run_trial(const TrialContext& ctx, std::size_t i) {
    const auto& c = ctx.config;
    const auto& inst = ctx.inst;
    TrialRow row;
    row.trial = i;
    row.seed = derive_seed(c.seed, i);
    const bool predicate = c.guarantee.has_value() || c.target.has_value() || c.algorithm == Algorithm::pabc_oa;
    try {
        if (c.algorithm == Algorithm::pabc_oa) {
            const Dataset d = sample_dataset(inst.mdp, inst.data_dist, ctx.hyper.n, row.seed);
            const LossSource src = LossSource::empirical(inst.mdp, d);
            Simulator sim(inst.mdp);
            OaConfig oc;
            oc.delta = c.delta;
            oc.seed = derive_seed(row.seed, 1);
            oc.max_iterations = c.oa_max_iterations;
            oc.initial_guess = c.oa_initial_guess;
            oc.greedy = ctx.pabc_config.greedy;
            oc.member_tie = ctx.pabc_config.member_tie;
            OaTranscript tr = pabc_oa(inst.F, inst.W, src, sim, oc);
            row.iterations = tr.iterations.size();
            row.online_samples = tr.total_online_samples;
            if (!tr.stopped) {
                row.error = "iteration cap reached";
                row.success = false;
            } else {
                const auto& last = tr.iterations.back();
                row.member = last.member_name;
                row.estimate = last.v_star_hat.value_or(0.0);
                row.v_pi = policy_value(inst.mdp, *tr.final_policy);
                row.value_error = std::abs(row.estimate - ctx.v_star);
                row.suboptimality = ctx.v_star - row.v_pi;
                const double gap = inst.annotations.gap_q_star;
                if (gap > 0.0 && std::isfinite(gap)) {
                    const double H = static_cast<double>(inst.mdp.horizon);
                    const auto t_max = static_cast<std::size_t>(std::ceil(std::log2(2.0 * H / gap)));
                    const double bound = oa_suboptimality_bound(static_cast<double>(tr.n), tr.C, inst.mdp.horizon,
                                                                inst.F.size(), inst.W.size(), c.delta, gap);
                    const double budget = oa_online_budget(static_cast<double>(tr.n), tr.C, inst.mdp.horizon, c.delta, gap);
                    row.success = last.t <= t_max && row.suboptimality <= bound + kSlack &&
                                  static_cast<double>(tr.total_online_samples) <= budget + H * static_cast<double>(row.iterations);
                }
            }
            row.transcript = std::move(tr);
            return row;
        }

        LossSource src = is_population(c.algorithm)
                             ? LossSource::population(inst.mdp, inst.data_dist)
                             : LossSource::empirical(inst.mdp, sample_dataset(inst.mdp, inst.data_dist, ctx.hyper.n, row.seed));
        Selection s = is_lagrangian_algorithm(c.algorithm) ? pabc_l(inst.F, inst.W, src, ctx.pabc_config)
                                                           : pabc(inst.F, inst.W, src, ctx.pabc_config);
        score_selection(ctx, s, row);
        row.selection = std::move(s);
    } catch (const EmptyVersionSpaceError& e) {
        row.error = e.what();
        if (predicate) row.success = false;
    }
    return row;
}

}  // namespace

TrialReport run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    return run_experiment(config, load_experiment_instance(config));
}

TrialReport run_experiment(const ExperimentConfig& config, const NamedInstance& instance_in) {
    validate_config(config);
    NamedInstance inst = instance_in;
    if (!config.adversarial_ties) {
        inst.greedy = GreedyRule{};
        inst.greedy.tolerance = inst.F.tie_tolerance();
        inst.member_tie = MemberTieRule{};
    }
    auto problems = assumption_failures(config, inst);
    if (!problems.empty()) throw ValidationError(std::move(problems));

    TrialReport rep;
    rep.instance = inst.name;
    rep.algorithm = config.algorithm;
    rep.hyper = resolve_hyperparameters(config, inst);
    rep.v_star = inst.annotations.v_star;
    rep.gap_q_star = inst.annotations.gap_q_star;
    rep.threshold = config.guarantee ? config.epsilon + rep.hyper.slack : config.target.value_or(0.0);
    if (!is_population(config.algorithm) && rep.hyper.n == 0) throw ValidationError({"n resolved to 0"});

    PabcConfig pc;
    pc.alpha = rep.hyper.alpha.value_or(0.0);
    pc.c_gap = rep.hyper.c_gap;
    pc.greedy = inst.greedy;
    pc.member_tie = inst.member_tie;
    const TrialContext ctx{config, inst, rep.hyper, rep.v_star, rep.threshold, pc};

    rep.rows.resize(config.trials);
    std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, config.trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < config.trials; i = next++) {
            try {
                rep.rows[i] = run_trial(ctx, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    rep.aggregate = aggregate(rep.rows, config.delta);
    return rep;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepGrid& grid) {
    if (grid.n.empty() && grid.epsilon.empty() && grid.c_gap.empty()) throw std::invalid_argument("empty sweep grid");
    auto dim = [](std::size_t k) { return std::max<std::size_t>(k, 1); };
    const std::size_t cells = dim(grid.n.size()) * dim(grid.epsilon.size()) * dim(grid.c_gap.size());
    if (cells > grid.max_cells) throw std::invalid_argument("sweep grid has too many cells");
    if (!grid.n.empty() && base.guarantee) throw std::invalid_argument("an n grid needs explicit hyperparameters");

    const NamedInstance inst = load_experiment_instance(base);
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < dim(grid.n.size()); ++i)
        for (std::size_t j = 0; j < dim(grid.epsilon.size()); ++j)
            for (std::size_t k = 0; k < dim(grid.c_gap.size()); ++k) {
                ExperimentConfig c = base;
                if (!grid.n.empty()) c.n = grid.n[i];
                if (!grid.epsilon.empty()) c.epsilon = grid.epsilon[j];
                if (!grid.c_gap.empty()) c.c_gap = grid.c_gap[k];
                SweepRow row;
                row.n = c.n.value_or(0);
                row.epsilon = c.epsilon;
                const TrialReport rep = run_experiment(c, inst);
                row.c_gap = rep.hyper.c_gap;
                if (base.guarantee) row.n = rep.hyper.n;
                for (std::size_t m = 0; m < inst.F.size(); ++m)
                    if (inst.F.gap(m) >= row.c_gap) ++row.prescreened_size;
                row.aggregate = rep.aggregate;
                rows.push_back(row);
            }
    return rows;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

}  // namespace

void write_trials_csv(const std::filesystem::path& path, const TrialReport& report) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "trial,seed,member,estimate,v_pi,value_error,suboptimality,success,iterations,online_samples,error\n";
    for (const auto& r : report.rows)
        out << r.trial << ',' << r.seed << ',' << csv_escape(r.member) << ',' << fmt(r.estimate) << ',' << fmt(r.v_pi)
            << ',' << fmt(r.value_error) << ',' << fmt(r.suboptimality) << ','
            << (r.success ? (*r.success ? "1" : "0") : "") << ',' << r.iterations << ',' << r.online_samples << ','
            << csv_escape(r.error) << '\n';
}

json aggregate_to_json(const Aggregate& a) {
    return {{"trials", a.trials},
            {"evaluated", a.evaluated},
            {"successes", a.successes},
            {"errors", a.errors},
            {"success_rate", io::number(a.success_rate)},
            {"target_rate", io::number(a.target_rate)},
            {"meets_target", a.meets_target},
            {"mean_value_error", io::number(a.mean_value_error)},
            {"median_value_error", io::number(a.median_value_error)},
            {"median_suboptimality", io::number(a.median_suboptimality)},
            {"max_suboptimality", io::number(a.max_suboptimality)}};
}

json report_to_json(const TrialReport& r) {
    json j;
    j["instance"] = r.instance;
    j["algorithm"] = to_string(r.algorithm);
    j["v_star"] = io::number(r.v_star);
    j["gap_q_star"] = io::number(r.gap_q_star);
    j["threshold"] = io::number(r.threshold);
    j["alpha"] = r.hyper.alpha ? io::number(*r.hyper.alpha) : json(nullptr);
    j["c_gap"] = io::number(r.hyper.c_gap);
    j["n"] = r.hyper.n;
    j["eps_W"] = io::number(r.hyper.eps_W);
    j["slack"] = io::number(r.hyper.slack);
    j["aggregate"] = aggregate_to_json(r.aggregate);
    return j;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "n,epsilon,c_gap,prescreened_size,trials,successes,success_rate,median_value_error,median_suboptimality\n";
    for (const auto& r : rows)
        out << r.n << ',' << fmt(r.epsilon) << ',' << fmt(r.c_gap) << ',' << r.prescreened_size << ','
            << r.aggregate.trials << ',' << r.aggregate.successes << ',' << fmt(r.aggregate.success_rate) << ','
            << fmt(r.aggregate.median_value_error) << ',' << fmt(r.aggregate.median_suboptimality) << '\n';
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            throw std::invalid_argument(std::string("unknown key '") + it.key() + "' in " + where);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j,
                   {"source", "named", "path", "instance_seed", "random", "algorithm", "guarantee", "epsilon", "delta",
                    "alpha", "c_gap", "n", "target", "trials", "seed", "adversarial_ties", "checks", "threads",
                    "oa_max_iterations", "oa_initial_guess"},
                   "experiment config");
    ExperimentConfig c;
    const std::string src = j.value("source", std::string("named"));
    if (src == "named") c.source = InstanceSource::named;
    else if (src == "file") c.source = InstanceSource::file;
    else if (src == "random") c.source = InstanceSource::random;
    else throw std::invalid_argument("unknown instance source '" + src + "'");
    c.named = j.value("named", c.named);
    c.path = j.value("path", std::string());
    c.instance_seed = j.value("instance_seed", c.instance_seed);
    if (j.contains("random")) {
        const json& r = j.at("random");
        reject_unknown(r,
                       {"min_horizon", "max_horizon", "max_states", "max_actions", "min_actions", "sparsity",
                        "deterministic_transitions", "gap_floor", "support", "mixture_weight", "f_distractors",
                        "perturbation", "w_distractors", "include_q_star", "include_w_star", "max_policy_count"},
                       "random options");
        auto& o = c.random;
        o.min_horizon = r.value("min_horizon", o.min_horizon);
        o.max_horizon = r.value("max_horizon", o.max_horizon);
        o.max_states = r.value("max_states", o.max_states);
        o.max_actions = r.value("max_actions", o.max_actions);
        o.min_actions = r.value("min_actions", o.min_actions);
        o.sparsity = r.value("sparsity", o.sparsity);
        o.deterministic_transitions = r.value("deterministic_transitions", o.deterministic_transitions);
        o.gap_floor = r.value("gap_floor", o.gap_floor);
        if (r.contains("support")) o.support = data_support_from_string(r.at("support").get<std::string>());
        o.mixture_weight = r.value("mixture_weight", o.mixture_weight);
        o.f_distractors = r.value("f_distractors", o.f_distractors);
        o.perturbation = r.value("perturbation", o.perturbation);
        o.w_distractors = r.value("w_distractors", o.w_distractors);
        o.include_q_star = r.value("include_q_star", o.include_q_star);
        o.include_w_star = r.value("include_w_star", o.include_w_star);
        o.max_policy_count = r.value("max_policy_count", o.max_policy_count);
    }
    c.algorithm = algorithm_from_string(j.value("algorithm", std::string("pabc")));
    if (j.contains("guarantee")) c.guarantee = guarantee_from_string(j.at("guarantee").get<std::string>());
    c.epsilon = j.value("epsilon", c.epsilon);
    c.delta = j.value("delta", c.delta);
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    c.c_gap = j.value("c_gap", c.c_gap);
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("target")) c.target = j.at("target").get<double>();
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.adversarial_ties = j.value("adversarial_ties", c.adversarial_ties);
    if (j.contains("checks")) {
        const json& k = j.at("checks");
        reject_unknown(k, {"q_realizable", "w_realizable", "value_range", "weight_bound", "gap"}, "checks");
        c.checks.q_realizable = k.value("q_realizable", true);
        c.checks.w_realizable = k.value("w_realizable", true);
        c.checks.value_range = k.value("value_range", true);
        c.checks.weight_bound = k.value("weight_bound", true);
        c.checks.gap = k.value("gap", true);
    }
    c.threads = j.value("threads", c.threads);
    c.oa_max_iterations = j.value("oa_max_iterations", c.oa_max_iterations);
    if (j.contains("oa_initial_guess"))
        c.oa_initial_guess = initial_guess_from_string(j.at("oa_initial_guess").get<std::string>());
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["source"] = to_string(c.source);
    j["named"] = c.named;
    j["path"] = c.path.string();
    j["instance_seed"] = c.instance_seed;
    j["algorithm"] = to_string(c.algorithm);
    if (c.guarantee) j["guarantee"] = to_string(*c.guarantee);
    j["epsilon"] = c.epsilon;
    j["delta"] = c.delta;
    if (c.alpha) j["alpha"] = *c.alpha;
    j["c_gap"] = c.c_gap;
    if (c.n) j["n"] = *c.n;
    if (c.target) j["target"] = *c.target;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["adversarial_ties"] = c.adversarial_ties;
    j["checks"] = {{"q_realizable", c.checks.q_realizable},
                   {"w_realizable", c.checks.w_realizable},
                   {"value_range", c.checks.value_range},
                   {"weight_bound", c.checks.weight_bound},
                   {"gap", c.checks.gap}};
    j["threads"] = c.threads;
    j["oa_max_iterations"] = c.oa_max_iterations;
    j["oa_initial_guess"] = to_string(c.oa_initial_guess);
    return j;
}

}  // namespace pabc
