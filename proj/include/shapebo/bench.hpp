#pragma once

#include "shapebo/bo.hpp"
#include "shapebo/objectives.hpp"

namespace shapebo {

/// 1 - SS_res/SS_tot; may be negative. Throws on constant test outputs.
double r2_score(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y);
double r2_eval(const Surrogate& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y);

struct R2BenchConfig {
    ProblemId problem = ProblemId::OverCircle;
    std::vector<int> sizes{20, 50, 100, 200};
    std::vector<std::string> methods; // empty: the family's default roster
    int runs = 5;
    int test_size = 500;
    int database_size = 5000;
    MappingSpec mapping;
    FitOptions fit;
    std::uint64_t seed = 1;
};

struct R2Row {
    std::string method;
    int n = 0;
    double mean_r2 = 0.0;
    double sd_r2 = 0.0;
    int failures = 0; // fit failures, excluded from the statistics
    int runs = 0;     // successful runs
};

/// Average R2 over `runs` space-filling DoEs per size, evaluated on a fresh
/// test set per run shared by every method. Methods whose model dimension
/// reaches n are skipped for that n.
std::vector<R2Row> bench_metamodels(const R2BenchConfig& config);

struct TargetStat {
    double target = 0.0;
    int successes = 0;
    int runs = 0;
    double value = 0.0; // mean evaluations, or Ts/ps when some runs missed
    double sd = 0.0;    // only meaningful when every run succeeded
    bool runtime_estimator = false;
    bool unreached = false;
};

struct OptRow {
    std::string method;
    double best_mean = 0.0;
    double best_sd = 0.0;
    std::vector<TargetStat> targets;
};

struct OptBenchConfig {
    ProblemId problem = ProblemId::Catenoid;
    std::vector<std::string> methods; // empty: family default roster
    std::vector<double> targets;
    int runs = 5;
    int n0 = 20;
    int iterations = 60;
    int n0_highdim = -1;         // default: 40 (d <= 30) or 50
    int iterations_highdim = -1; // default: keeps the total budget constant
    int database_size = 5000;
    MappingSpec mapping;
    AcquisitionConfig acquisition;
    FitOptions fit;
    std::vector<int> direct_fixed_active{0, 1}; // additive models in X space
    std::uint64_t seed = 1;
};

std::vector<OptRow> bench_optimizers(const OptBenchConfig& config);

/// Statistics of first-hit evaluation counts: mean and sd when every run
/// reached the target, the empirical-runtime estimator Ts/ps when only some
/// did, `unreached` when none did.
TargetStat target_stat(const std::vector<int>& hit_evals, int runs, double target);

/// Translate a method descriptor ("gp-x", "gp-alpha-7-norep", "addgp-embed",
/// "addgp-x-embed", "gp-x-sub2", ...) into a run configuration.
RunConfig method_run_config(const std::string& method, const OptBenchConfig& config);

const std::vector<std::string>& default_r2_methods(ProblemId problem);
const std::vector<std::string>& default_opt_methods(ProblemId problem);
std::vector<double> default_targets(ProblemId problem);

} // namespace shapebo
