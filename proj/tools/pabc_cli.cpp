#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"
#include "pabc/experiment.hpp"
#include "pabc/io.hpp"
#include "pabc/online.hpp"
#include "pabc/rng.hpp"
#include "pabc/solvers.hpp"

using namespace pabc;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kPredicateFailed = 1;
constexpr int kInvalid = 2;

struct InstanceArgs {
    std::string file;
    std::string named;
    std::optional<std::uint64_t> random_seed;

    void add(CLI::App* app) {
        app->add_option("--instance", file, "instance.json written by export-instance");
        app->add_option("--named", named, "built-in instance: counterexample | table1");
        app->add_option("--random-instance", random_seed, "generate a random instance from this seed");
    }

    NamedInstance load() const {
        const int given = !file.empty() + !named.empty() + random_seed.has_value();
        if (given != 1) throw std::invalid_argument("give exactly one of --instance, --named, --random-instance");
        ExperimentConfig c;
        if (!file.empty()) {
            c.source = InstanceSource::file;
            c.path = file;
        } else if (!named.empty()) {
            c.named = named;
        } else {
            c.source = InstanceSource::random;
            c.instance_seed = *random_seed;
        }
        return load_experiment_instance(c);
    }
};

void emit(const json& j, const std::string& out) {
    if (out.empty()) std::cout << j.dump(2) << '\n';
    else io::write_json(out, j);
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
    if (!seed) throw std::invalid_argument("--seed is required for commands that sample");
    return *seed;
}

PabcConfig pabc_config(const NamedInstance& inst, double alpha, double c_gap, bool adversarial) {
    PabcConfig pc;
    pc.alpha = alpha;
    pc.c_gap = c_gap;
    if (adversarial) {
        pc.greedy = inst.greedy;
        pc.member_tie = inst.member_tie;
    } else {
        pc.greedy.tolerance = inst.F.tie_tolerance();
    }
    return pc;
}

struct SolverArgs {
    InstanceArgs instance;
    bool population = false;
    double alpha = 0.0;
    double c_gap = 0.0;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    bool adversarial = false;
    std::string out;
    std::string dataset_out;

    void add(CLI::App* app, bool with_alpha) {
        instance.add(app);
        app->add_flag("--population", population, "use exact population losses instead of a sample");
        if (with_alpha) app->add_option("--alpha", alpha, "loss tolerance")->required()->check(CLI::NonNegativeNumber);
        app->add_option("--c-gap", c_gap, "gap prescreening threshold")->check(CLI::NonNegativeNumber);
        app->add_option("--n", n, "samples per timestep");
        app->add_option("--seed", seed, "dataset seed");
        app->add_flag("--adversarial-ties", adversarial, "use the instance's stored tie rules");
        app->add_option("--out", out, "write the selection JSON here");
        app->add_option("--dataset-out", dataset_out, "also write the sampled dataset");
    }
};

int run_solver(const SolverArgs& a, bool lagrangian) {
    const NamedInstance inst = a.instance.load();
    std::optional<LossSource> src;
    if (a.population) {
        src = LossSource::population(inst.mdp, inst.data_dist);
    } else {
        if (!a.n || *a.n == 0) throw std::invalid_argument("--n is required without --population");
        const Dataset d = sample_dataset(inst.mdp, inst.data_dist, *a.n, require_seed(a.seed));
        if (!a.dataset_out.empty()) io::write_json(a.dataset_out, io::dataset_to_json(d));
        src = LossSource::empirical(inst.mdp, d);
    }
    const PabcConfig pc = pabc_config(inst, a.alpha, a.c_gap, a.adversarial);
    try {
        const Selection s = lagrangian ? pabc_l(inst.F, inst.W, *src, pc) : pabc::pabc(inst.F, inst.W, *src, pc);
        json j = io::selection_to_json(inst.mdp, s);
        j["v_pi"] = io::number(policy_value(inst.mdp, s.policy));
        j["v_star"] = io::number(inst.annotations.v_star);
        emit(j, a.out);
    } catch (const EmptyVersionSpaceError& e) {
        std::cerr << e.what() << '\n';
        return kPredicateFailed;
    }
    return kOk;
}

struct ExperimentArgs {
    std::string config;
    InstanceArgs instance;
    std::string algorithm, guarantee, initial_guess;
    std::optional<double> epsilon, delta, alpha, c_gap, target;
    std::optional<std::size_t> n, trials, threads, max_iterations;
    std::optional<std::uint64_t> seed;
    bool adversarial = false;
    bool no_q = false, no_w = false, no_range = false, no_bound = false, no_gap = false;
    std::string csv, json_out;

    void add(CLI::App* app) {
        app->add_option("--config", config, "experiment config JSON; flags override its fields");
        instance.add(app);
        app->add_option("--algorithm", algorithm, "pabc | pabc-l | pabc-oa | population-pabc | population-pabc-l");
        app->add_option("--guarantee", guarantee, "derive alpha, C_gap and n from this guarantee mode");
        app->add_option("--epsilon", epsilon);
        app->add_option("--delta", delta);
        app->add_option("--alpha", alpha);
        app->add_option("--c-gap", c_gap);
        app->add_option("--n", n);
        app->add_option("--target", target, "success threshold for explicit runs");
        app->add_option("--trials", trials);
        app->add_option("--seed", seed, "base seed");
        app->add_option("--threads", threads);
        app->add_option("--max-iterations", max_iterations, "pabc-oa iteration cap");
        app->add_option("--initial-guess", initial_guess, "pabc-oa initial gap guess: horizon | max-class-gap");
        app->add_flag("--adversarial-ties", adversarial);
        app->add_flag("--no-check-q-realizable", no_q);
        app->add_flag("--no-check-w-realizable", no_w);
        app->add_flag("--no-check-value-range", no_range);
        app->add_flag("--no-check-weight-bound", no_bound);
        app->add_flag("--no-check-gap", no_gap);
        app->add_option("--csv", csv, "per-trial rows");
        app->add_option("--json", json_out, "aggregate report");
    }

    ExperimentConfig build() const {
        ExperimentConfig c;
        bool seeded = false;
        if (!config.empty()) {
            const json j = io::read_json(config);
            c = config_from_json(j);
            seeded = j.contains("seed");
        }
        if (!instance.file.empty()) {
            c.source = InstanceSource::file;
            c.path = instance.file;
        }
        if (!instance.named.empty()) {
            c.source = InstanceSource::named;
            c.named = instance.named;
        }
        if (instance.random_seed) {
            c.source = InstanceSource::random;
            c.instance_seed = *instance.random_seed;
        }
        if (!algorithm.empty()) c.algorithm = algorithm_from_string(algorithm);
        if (!guarantee.empty()) c.guarantee = guarantee_from_string(guarantee);
        if (epsilon) c.epsilon = *epsilon;
        if (delta) c.delta = *delta;
        if (alpha) c.alpha = *alpha;
        if (c_gap) c.c_gap = *c_gap;
        if (n) c.n = *n;
        if (target) c.target = *target;
        if (trials) c.trials = *trials;
        if (threads) c.threads = *threads;
        if (max_iterations) c.oa_max_iterations = *max_iterations;
        if (!initial_guess.empty()) c.oa_initial_guess = initial_guess_from_string(initial_guess);
        if (seed) {
            c.seed = *seed;
            seeded = true;
        }
        if (adversarial) c.adversarial_ties = true;
        if (no_q) c.checks.q_realizable = false;
        if (no_w) c.checks.w_realizable = false;
        if (no_range) c.checks.value_range = false;
        if (no_bound) c.checks.weight_bound = false;
        if (no_gap) c.checks.gap = false;
        const bool samples = c.algorithm != Algorithm::population_pabc && c.algorithm != Algorithm::population_pabc_l;
        if (samples && !seeded) throw std::invalid_argument("--seed is required for commands that sample");
        return c;
    }
};

bool any_failed(const Aggregate& a) { return a.evaluated > 0 && !a.meets_target; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pessimistic offline RL on small layered MDPs"};
    app.require_subcommand(1);

    std::string mdp_path, out;
    auto* validate = app.add_subcommand("validate", "check an MDP or instance file");
    InstanceArgs validate_instance;
    validate->add_option("--mdp", mdp_path, "mdp.json");
    validate_instance.add(validate);

    auto* dp = app.add_subcommand("dp", "optimal values, Q* and gap by backward induction");
    dp->add_option("--mdp", mdp_path, "mdp.json")->required();
    dp->add_option("--out", out);

    auto* eps = app.add_subcommand("eps", "misspecification errors, C and gaps of an instance");
    InstanceArgs eps_instance;
    eps_instance.add(eps);
    double eps_c_gap = 0.0;
    eps->add_option("--c-gap", eps_c_gap, "also report eps_F on the prescreened class");
    eps->add_option("--out", out);

    SolverArgs pabc_args, pabc_l_args;
    auto* pabc_cmd = app.add_subcommand("pabc", "constrained pessimistic selection");
    pabc_args.add(pabc_cmd, true);
    auto* pabc_l_cmd = app.add_subcommand("pabc-l", "penalized pessimistic selection");
    pabc_l_args.add(pabc_l_cmd, false);

    auto* oa = app.add_subcommand("pabc-oa", "gap-agnostic selection with online checks");
    InstanceArgs oa_instance;
    oa_instance.add(oa);
    std::size_t oa_n = 0;
    double oa_delta = 0.1;
    std::optional<std::uint64_t> oa_seed;
    std::size_t oa_cap = 40;
    std::string oa_guess = "horizon";
    oa->add_option("--n", oa_n, "offline samples per timestep")->required();
    oa->add_option("--delta", oa_delta);
    oa->add_option("--seed", oa_seed, "seed for the dataset and the rollouts");
    oa->add_option("--max-iterations", oa_cap);
    oa->add_option("--initial-guess", oa_guess, "horizon | max-class-gap");
    oa->add_option("--out", out);

    ExperimentArgs exp_args, sweep_args;
    auto* experiment = app.add_subcommand("experiment", "seeded trials with success statistics");
    exp_args.add(experiment);

    auto* sweep_cmd = app.add_subcommand("sweep", "experiment over a grid of n, epsilon and C_gap");
    sweep_args.add(sweep_cmd);
    std::vector<std::size_t> grid_n;
    std::vector<double> grid_eps, grid_gap;
    std::size_t max_cells = 1000;
    std::string sweep_csv;
    sweep_cmd->add_option("--grid-n", grid_n)->delimiter(',');
    sweep_cmd->add_option("--grid-epsilon", grid_eps)->delimiter(',');
    sweep_cmd->add_option("--grid-c-gap", grid_gap)->delimiter(',');
    sweep_cmd->add_option("--max-cells", max_cells);

    auto* export_cmd = app.add_subcommand("export-instance", "write a built-in or random instance to a directory");
    std::string export_name;
    std::optional<std::uint64_t> export_seed;
    std::string export_dir;
    export_cmd->add_option("--name", export_name, "counterexample | table1 | random")->required();
    export_cmd->add_option("--seed", export_seed, "seed for --name random");
    export_cmd->add_option("--out", export_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (*validate) {
            if (!mdp_path.empty()) {
                const LayeredMdp mdp = io::load_mdp(mdp_path);
                const auto issues = validate_mdp(mdp);
                for (const auto& i : issues) std::cout << to_string(i.kind) << ": " << i.message << '\n';
                if (!issues.empty()) return kInvalid;
                std::cout << "ok: horizon " << mdp.horizon << '\n';
            } else {
                const NamedInstance inst = validate_instance.load();
                int bad = 0;
                for (const auto& p : check_data_distribution(inst.mdp, inst.data_dist)) {
                    std::cout << "data distribution: " << p << '\n';
                    ++bad;
                }
                for (const auto& p : value_range_violations(inst.F)) {
                    std::cout << "value range: " << p << '\n';
                    ++bad;
                }
                const auto reg = regularity_check(inst.W, inst.data_dist);
                if (!reg.passed()) {
                    std::cout << "weight class: some member is negative or does not normalize under d^D\n";
                    ++bad;
                }
                if (bad) return kInvalid;
                std::cout << "ok: " << inst.name << '\n';
            }
            return kOk;
        }
        if (*dp) {
            const LayeredMdp mdp = io::load_mdp(mdp_path);
            require_valid(mdp);
            const Table q = optimal_q(mdp);
            const Policy pi = greedy_policy(q);
            json j;
            j["v_star"] = io::number(policy_value(mdp, pi));
            j["gap"] = io::number(gap_of_function(q));
            j["q_star"] = io::table_to_json(mdp, q);
            j["policy"] = io::policy_to_json(mdp, pi);
            emit(j, out);
            return kOk;
        }
        if (*eps) {
            const NamedInstance inst = eps_instance.load();
            json j;
            j["instance"] = inst.name;
            j["C"] = io::number(inst.W.bound_C());
            j["eps_W"] = io::number(eps_W(inst.F, inst.W, inst.mdp, inst.data_dist).value);
            j["eps_F"] = io::number(eps_F(inst.F, inst.W, inst.mdp, inst.data_dist).value);
            j["eps_F_inf"] = io::number(eps_F_inf(inst.F, inst.mdp).value);
            if (eps_c_gap > 0.0) {
                try {
                    const auto kept = prescreen(inst.F, eps_c_gap).kept;
                    j["eps_F_prescreened"] = io::number(eps_F(kept, inst.W, inst.mdp, inst.data_dist).value);
                } catch (const EmptyVersionSpaceError&) {
                    j["eps_F_prescreened"] = nullptr;
                }
            }
            j["annotations"] = io::annotations_to_json(inst.annotations);
            emit(j, out);
            return kOk;
        }
        if (*pabc_cmd) {
            return run_solver(pabc_args, false);
        }
        if (*pabc_l_cmd) return run_solver(pabc_l_args, true);
        if (*oa) {
            const NamedInstance inst = oa_instance.load();
            const std::uint64_t seed = require_seed(oa_seed);
            const Dataset d = sample_dataset(inst.mdp, inst.data_dist, oa_n, seed);
            const LossSource src = LossSource::empirical(inst.mdp, d);
            Simulator sim(inst.mdp);
            OaConfig oc;
            oc.delta = oa_delta;
            oc.seed = derive_seed(seed, 1);
            oc.max_iterations = oa_cap;
            oc.initial_guess = initial_guess_from_string(oa_guess);
            oc.greedy.tolerance = inst.F.tie_tolerance();
            const OaTranscript tr = pabc_oa(inst.F, inst.W, src, sim, oc);
            json j = io::transcript_to_json(inst.mdp, tr);
            if (tr.final_policy) j["v_pi"] = io::number(policy_value(inst.mdp, *tr.final_policy));
            j["v_star"] = io::number(inst.annotations.v_star);
            emit(j, out);
            return tr.stopped ? kOk : kPredicateFailed;
        }
        if (*experiment) {
            const ExperimentConfig c = exp_args.build();
            const TrialReport rep = run_experiment(c);
            if (!exp_args.csv.empty()) write_trials_csv(exp_args.csv, rep);
            json j = report_to_json(rep);
            j["config"] = config_to_json(c);
            emit(j, exp_args.json_out);
            return any_failed(rep.aggregate) ? kPredicateFailed : kOk;
        }
        if (*sweep_cmd) {
            const ExperimentConfig c = sweep_args.build();
            const auto rows = sweep(c, SweepGrid{grid_n, grid_eps, grid_gap, max_cells});
            if (!sweep_args.csv.empty()) write_sweep_csv(sweep_args.csv, rows);
            json arr = json::array();
            bool failed = false;
            for (const auto& r : rows) {
                arr.push_back({{"n", r.n},
                               {"epsilon", r.epsilon},
                               {"c_gap", r.c_gap},
                               {"prescreened_size", r.prescreened_size},
                               {"aggregate", aggregate_to_json(r.aggregate)}});
                failed = failed || any_failed(r.aggregate);
            }
            emit(arr, sweep_args.json_out);
            return failed ? kPredicateFailed : kOk;
        }
        if (*export_cmd) {
            ExperimentConfig c;
            if (export_name == "random") {
                c.source = InstanceSource::random;
                c.instance_seed = require_seed(export_seed);
            } else {
                c.named = export_name;
            }
            io::export_instance(load_experiment_instance(c), export_dir);
            std::cout << "wrote " << export_dir << '\n';
            return kOk;
        }
    } catch (const ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const io::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kOk;
}
