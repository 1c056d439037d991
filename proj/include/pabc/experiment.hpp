#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pabc/instances.hpp"
#include "pabc/online.hpp"
#include "pabc/solvers.hpp"

namespace pabc {

enum class InstanceSource { named, file, random };
enum class Algorithm { pabc, pabc_l, pabc_oa, population_pabc, population_pabc_l };

std::string to_string(InstanceSource s);
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

/// Which assumption checks run before any trial.
struct AssumptionChecks {
    bool q_realizable = true;  ///< Q* is a member of F
    bool w_realizable = true;  ///< w* exists and is a member of W
    bool value_range = true;   ///< every f_h lies in [0, H - h]
    bool weight_bound = true;  ///< C is finite and positive
    bool gap = true;           ///< gap(Q*) > 0 for the policy guarantees
};

struct ExperimentConfig {
    InstanceSource source = InstanceSource::named;
    std::string named = "counterexample";
    std::filesystem::path path;
    std::uint64_t instance_seed = 0;
    RandomOptions random;

    Algorithm algorithm = Algorithm::pabc;

    // guarantee-driven hyperparameters
    std::optional<Guarantee> guarantee;
    double epsilon = 0.1;
    double delta = 0.1;

    // explicit hyperparameters
    std::optional<double> alpha;
    double c_gap = 0.0;
    std::optional<std::size_t> n;
    /// Success threshold for explicit runs: value error <= target, or
    /// suboptimality <= target for gap-prescreened runs.
    std::optional<double> target;

    std::size_t trials = 1;
    std::uint64_t seed = 0;
    bool adversarial_ties = false;  ///< use the instance's stored tie rules
    AssumptionChecks checks;
    std::size_t threads = 0;        ///< 0 = hardware concurrency
    std::size_t oa_max_iterations = 40;
    InitialGuess oa_initial_guess = InitialGuess::horizon;
};

/// Throws std::invalid_argument naming the first problem.
void validate_config(const ExperimentConfig& c);

NamedInstance load_experiment_instance(const ExperimentConfig& c);

/// Plain-language descriptions of every failed assumption check relevant to
/// the configured guarantee (realizable modes need Q* in F and w* in W).
std::vector<std::string> assumption_failures(const ExperimentConfig& c, const NamedInstance& inst);

/// Thrown before any trial runs when configuration or assumptions fail.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ResolvedHyperparameters {
    std::optional<double> alpha;
    double c_gap = 0.0;
    std::size_t n = 0;  ///< 0 for the population algorithms
    HyperparameterInput input;  ///< inputs used in guarantee mode
    double eps_W = 0.0;
    double slack = 0.0;         ///< robustness slack added to epsilon
};

ResolvedHyperparameters resolve_hyperparameters(const ExperimentConfig& c, const NamedInstance& inst);

struct TrialRow {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string member;
    double estimate = 0.0;
    double v_pi = 0.0;
    double value_error = 0.0;    ///< |estimate - v*|
    double suboptimality = 0.0;  ///< v* - v^pi
    std::optional<bool> success;
    std::string error;           ///< set when the run produced no selection
    std::size_t iterations = 0;  ///< PABC-OA only
    std::size_t online_samples = 0;
    std::optional<Selection> selection;
    std::optional<OaTranscript> transcript;
};

struct Aggregate {
    std::size_t trials = 0;
    std::size_t evaluated = 0;  ///< rows with a success verdict
    std::size_t successes = 0;
    std::size_t errors = 0;
    double success_rate = 0.0;
    double target_rate = 0.0;   ///< 1 - delta
    bool meets_target = false;
    double mean_value_error = 0.0;
    double median_value_error = 0.0;
    double median_suboptimality = 0.0;
    double max_suboptimality = 0.0;
};

struct TrialReport {
    std::string instance;
    Algorithm algorithm = Algorithm::pabc;
    ResolvedHyperparameters hyper;
    double v_star = 0.0;
    double gap_q_star = 0.0;
    double threshold = 0.0;  ///< epsilon (+ slack) used by the success predicate
    std::vector<TrialRow> rows;  ///< sorted by trial index
    Aggregate aggregate;
};

/// Recomputes the aggregate from per-trial rows.
Aggregate aggregate(const std::vector<TrialRow>& rows, double delta);

double median(std::vector<double> v);

/// Loads and validates the instance, then runs the trials in parallel over
/// seeds; trial i uses seed derive_seed(config.seed, i).
TrialReport run_experiment(const ExperimentConfig& config);
TrialReport run_experiment(const ExperimentConfig& config, const NamedInstance& instance);

struct SweepGrid {
    std::vector<std::size_t> n;
    std::vector<double> epsilon;
    std::vector<double> c_gap;
    std::size_t max_cells = 1000;
};

struct SweepRow {
    std::size_t n = 0;
    double epsilon = 0.0;
    double c_gap = 0.0;
    std::size_t prescreened_size = 0;  ///< |F(C_gap)|
    Aggregate aggregate;
};

/// Cartesian product of the non-empty grid dimensions; empty dimensions keep
/// the base configuration's value. Throws on an all-empty or oversized grid.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepGrid& grid);

void write_trials_csv(const std::filesystem::path& path, const TrialReport& report);
nlohmann::json report_to_json(const TrialReport& report);
nlohmann::json aggregate_to_json(const Aggregate& a);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

/// Config file mirroring ExperimentConfig; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace pabc
