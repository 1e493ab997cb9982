#include "shapebo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

namespace shapebo {

double r2_score(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y) {
    if (y.size() == 0 || predictions.size() != y.size())
        throw std::invalid_argument("r2_score: size mismatch or empty test set");
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    if (!(ss_tot > 0.0)) throw std::invalid_argument("r2_score: constant test outputs");
    const double ss_res = (y - predictions).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

double r2_eval(const Surrogate& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y) {
    Eigen::VectorXd pred(y.size());
    for (int i = 0; i < inputs.rows(); ++i) pred[i] = model.predict(inputs.row(i).transpose()).mean;
    return r2_score(pred, y);
}

namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
    MeanSd out;
    if (v.empty()) return out;
    double acc = 0.0;
    for (double x : v) acc += x;
    out.mean = acc / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = v.size() > 1 ? std::sqrt(ss / (static_cast<double>(v.size()) - 1.0)) : 0.0;
    return out;
}

Box design_box(ProblemId id) {
    const ProblemInfo& info = problem_info(id);
    Box box;
    box.lo.resize(info.dim);
    box.hi.resize(info.dim);
    for (int j = 0; j < info.dim; ++j) {
        box.lo[j] = info.bounds[static_cast<std::size_t>(j)].lo;
        box.hi[j] = info.bounds[static_cast<std::size_t>(j)].hi;
    }
    return box;
}

int method_model_dim(const std::string& method, int d) {
    if (method == "gp-x") return d;
    if (method.rfind("gp-alpha-", 0) == 0) return std::stoi(method.substr(9));
    // selection-based methods keep delta + 3 hyperparameters regardless of
    // d', so they run at every DoE size
    return 0;
}

} // namespace

const std::vector<std::string>& default_r2_methods(ProblemId problem) {
    static const std::vector<std::string> circle{"gp-x", "gp-alpha-3"};
    static const std::vector<std::string> rectangle{"gp-x",       "gp-alpha-40", "gp-alpha-2",
                                                    "gp-alpha-4", "gp-alpha-16", "gp-active",
                                                    "addgp"};
    static const std::vector<std::string> catenoid{"gp-x",      "gp-alpha-29", "gp-alpha-4",
                                                   "gp-alpha-7", "gp-active",  "addgp"};
    static const std::vector<std::string> generic{"gp-x", "gp-active", "addgp"};
    switch (problem) {
        case ProblemId::OverCircle: return circle;
        case ProblemId::Rectangle: return rectangle;
        case ProblemId::Catenoid: return catenoid;
        default: return generic;
    }
}

const std::vector<std::string>& default_opt_methods(ProblemId problem) {
    static const std::vector<std::string> catenoid{
        "gp-x",
        "gp-alpha-7-onmanifold",
        "gp-alpha-7",
        "gp-alpha-7-norep",
        "gp-alpha-7-viax",
        "addgp-embed-onmanifold",
        "addgp-embed-norep",
        "addgp-embed",
        "gp-alpha-4"};
    static const std::vector<std::string> heart{
        "gp-x",        "gp-alpha-2", "gp-alpha-4",  "gp-alpha-16", "gp-alpha-40",
        "gp-active",   "addgp-viax", "addgp-embed", "addgp-active", "addgp-full"};
    static const std::vector<std::string> griewank{
        "gp-x-sub2", "gp-x-sub10", "gp-x", "addgp-x-active", "addgp-x-embed", "addgp-x-full"};
    static const std::vector<std::string> generic{"gp-x", "addgp-embed"};
    switch (problem) {
        case ProblemId::Catenoid: return catenoid;
        case ProblemId::Rectangle: return heart;
        case ProblemId::Griewank: return griewank;
        default: return generic;
    }
}

std::vector<double> default_targets(ProblemId problem) {
    switch (problem) {
        case ProblemId::Catenoid: return {27.0, 30.0, 35.0};
        case ProblemId::Rectangle: return {0.5, 1.0, 3.0};
        case ProblemId::Griewank: return {1.0, 2.0};
        default: return {};
    }
}

std::vector<R2Row> bench_metamodels(const R2BenchConfig& config) {
    const ProblemInfo& info = problem_info(config.problem);
    const Objective objective = make_objective(config.problem);
    const std::vector<std::string> methods =
        config.methods.empty() ? default_r2_methods(config.problem) : config.methods;

    // one database / basis shared by every run of the benchmark
    const ShapeDatabase db =
        build_database(config.problem, config.database_size, config.mapping, config.seed);
    const EigenBasis basis = pca_fit(db);
    const int d_prime = std::max(basis.d_prime, 1);

    int k_max = d_prime;
    for (const auto& m : methods)
        if (m.rfind("gp-alpha-", 0) == 0) k_max = std::max(k_max, std::stoi(m.substr(9)));
    k_max = std::min(k_max, basis.retained());

    const Box box = design_box(config.problem);
    const auto project_rows = [&](const Eigen::MatrixXd& designs, int k) {
        Eigen::MatrixXd out(designs.rows(), k);
        for (int i = 0; i < designs.rows(); ++i) {
            DesignVector x{config.problem, designs.row(i).transpose()};
            out.row(i) = project(basis, shape_representation(x, config.mapping), k).transpose();
        }
        return out;
    };

    std::map<std::string, std::map<int, std::vector<double>>> scores;
    std::map<std::string, std::map<int, int>> failures;

    for (int r = 0; r < config.runs; ++r) {
        const std::uint64_t run_seed = mix_seed(config.seed, 7000 + static_cast<std::uint64_t>(r));

        // fresh test set per run, drawn from the family's design distribution
        Eigen::MatrixXd test_x(config.test_size, info.dim);
        Eigen::VectorXd test_y(config.test_size);
        {
            Rng rng = make_rng(run_seed, 0x7e5);
            for (int i = 0; i < config.test_size; ++i) {
                const DesignVector x = sample_design(config.problem, rng);
                test_x.row(i) = x.values.transpose();
                test_y[i] = eval_objective(objective, x);
            }
        }
        const Eigen::MatrixXd test_alpha = project_rows(test_x, k_max);

        for (int n : config.sizes) {
            // shared space-filling DoE in X for every method at this size
            Rng rng = make_rng(run_seed, 9000 + static_cast<std::uint64_t>(n));
            const Eigen::MatrixXd unit = latin_hypercube(n, info.dim, rng);
            Eigen::MatrixXd train_x(n, info.dim);
            Eigen::VectorXd train_y(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < info.dim; ++j)
                    train_x(i, j) = box.lo[j] + unit(i, j) * (box.hi[j] - box.lo[j]);
                train_y[i] = eval_objective(objective, DesignVector{config.problem,
                                                                    train_x.row(i).transpose()});
            }
            const Eigen::MatrixXd train_alpha = project_rows(train_x, k_max);

            for (const auto& method : methods) {
                if (method_model_dim(method, info.dim) >= n) continue; // too few points for this model dimension
                FitOptions fit = config.fit;
                fit.seed = mix_seed(run_seed, std::hash<std::string>{}(method));
                try {
                    double r2 = 0.0;
                    if (method == "gp-x") {
                        PlainGpSurrogate s(fit_gp(train_x, train_y, KernelFamily::Matern52, 0.0, fit));
                        r2 = r2_eval(s, test_x, test_y);
                    } else if (method.rfind("gp-alpha-", 0) == 0) {
                        const int k = std::min(std::stoi(method.substr(9)), k_max);
                        PlainGpSurrogate s(fit_gp(train_alpha.leftCols(k), train_y,
                                                  KernelFamily::Matern52, 0.0, fit));
                        r2 = r2_eval(s, test_alpha.leftCols(k), test_y);
                    } else if (method == "gp-active") {
                        SelectOptions sel;
                        sel.fit = fit;
                        const ActiveSet set =
                            select_active(train_alpha.leftCols(d_prime), train_y, sel);
                        Eigen::MatrixXd sub(n, set.count());
                        Eigen::MatrixXd test_sub(config.test_size, set.count());
                        for (int j = 0; j < set.count(); ++j) {
                            sub.col(j) = train_alpha.col(set.indices[static_cast<std::size_t>(j)]);
                            test_sub.col(j) =
                                test_alpha.col(set.indices[static_cast<std::size_t>(j)]);
                        }
                        PlainGpSurrogate s(fit_gp(sub, train_y, KernelFamily::Matern52, 0.0, fit));
                        r2 = r2_eval(s, test_sub, test_y);
                    } else if (method == "addgp") {
                        SelectOptions sel;
                        sel.fit = fit;
                        const ActiveSet set =
                            select_active(train_alpha.leftCols(d_prime), train_y, sel);
                        AdditiveGpSurrogate s(
                            fit_additive(train_alpha.leftCols(d_prime), train_y, set, fit));
                        r2 = r2_eval(s, test_alpha.leftCols(d_prime), test_y);
                    } else {
                        throw std::invalid_argument("unknown R2 method '" + method + "'");
                    }
                    scores[method][n].push_back(r2);
                } catch (const std::runtime_error&) {
                    failures[method][n] += 1;
                }
            }
        }
    }

    std::vector<R2Row> rows;
    for (const auto& method : methods)
        for (int n : config.sizes) {
            if (method_model_dim(method, info.dim) >= n) continue;
            R2Row row;
            row.method = method;
            row.n = n;
            const auto& v = scores[method][n];
            const MeanSd ms = mean_sd(v);
            row.mean_r2 = ms.mean;
            row.sd_r2 = ms.sd;
            row.runs = static_cast<int>(v.size());
            row.failures = failures[method][n];
            rows.push_back(row);
        }
    return rows;
}

RunConfig method_run_config(const std::string& method, const OptBenchConfig& config) {
    RunConfig rc;
    rc.problem = config.problem;
    rc.mapping = config.mapping;
    rc.database_size = config.database_size;
    rc.acquisition = config.acquisition;
    rc.fit = config.fit;
    rc.initial_doe = config.n0;
    rc.iterations = config.iterations;
    rc.replication = true; // the default in all alpha-space searches
    rc.seed = config.seed;

    std::string m = method;
    const auto strip = [&m](const std::string& suffix) {
        if (m.size() >= suffix.size() && m.compare(m.size() - suffix.size(), suffix.size(), suffix) == 0) {
            m.resize(m.size() - suffix.size());
            return true;
        }
        return false;
    };
    if (strip("-norep")) rc.replication = false;
    if (strip("-onmanifold")) rc.acquisition.domain = EiDomain::OnManifold;
    bool via_x = strip("-viax");

    const int d = problem_info(config.problem).dim;
    if (m == "gp-x") {
        rc.space = SpaceKind::DirectSpace;
        rc.model = ModelKind::PlainAll;
        rc.acquisition.strategy = via_x ? EiStrategy::ViaX : EiStrategy::FullAlpha;
        rc.replication = false; // exact pre-images; nothing to replicate
    } else if (m.rfind("gp-x-sub", 0) == 0) {
        rc.space = SpaceKind::DirectSpace;
        rc.subset_dim = std::stoi(m.substr(8));
        rc.model = ModelKind::PlainAll;
        rc.acquisition.strategy = EiStrategy::FullAlpha;
        rc.replication = false;
    } else if (m.rfind("gp-alpha-", 0) == 0) {
        rc.space = SpaceKind::EigenSpace;
        rc.model_components = std::stoi(m.substr(9));
        rc.model = ModelKind::PlainAll;
        rc.acquisition.strategy = via_x ? EiStrategy::ViaX : EiStrategy::FullAlpha;
    } else if (m == "gp-active") {
        rc.space = SpaceKind::EigenSpace;
        rc.model = ModelKind::PlainActive;
        rc.acquisition.strategy = via_x ? EiStrategy::ViaX : EiStrategy::ActiveOnly;
    } else if (m.rfind("addgp-x-", 0) == 0) {
        rc.space = SpaceKind::DirectSpace;
        rc.model = ModelKind::Additive;
        rc.selection_cadence = 0;
        rc.fixed_active = config.direct_fixed_active;
        rc.replication = false;
        const std::string variant = m.substr(8);
        rc.acquisition.strategy = variant == "embed"    ? EiStrategy::Embed
                                  : variant == "active" ? EiStrategy::ActiveOnly
                                                        : EiStrategy::FullAlpha;
    } else if (m.rfind("addgp-", 0) == 0 || m == "addgp") {
        rc.space = SpaceKind::EigenSpace;
        rc.model = ModelKind::Additive;
        const std::string variant = m == "addgp" ? "embed" : m.substr(6);
        rc.acquisition.strategy = via_x || variant == "viax" ? EiStrategy::ViaX
                                  : variant == "embed"       ? EiStrategy::Embed
                                  : variant == "active"      ? EiStrategy::ActiveOnly
                                                             : EiStrategy::FullAlpha;
    } else {
        throw std::invalid_argument("unknown optimizer method '" + method + "'");
    }

    // high-dimensional models need a larger initial design: shift budget from
    // iterations to the DoE, keeping the total number of evaluations fixed
    int model_dim = d;
    if (rc.space == SpaceKind::EigenSpace)
        model_dim = rc.model_components > 0 ? rc.model_components : d;
    if (rc.subset_dim > 0) model_dim = rc.subset_dim;
    if (rc.model == ModelKind::PlainAll && model_dim >= rc.initial_doe) {
        const int total = config.n0 + config.iterations;
        rc.initial_doe = config.n0_highdim > 0 ? config.n0_highdim : (model_dim <= 30 ? 40 : 50);
        rc.iterations = config.iterations_highdim > 0 ? config.iterations_highdim
                                                      : std::max(total - rc.initial_doe, 1);
    }
    return rc;
}

TargetStat target_stat(const std::vector<int>& hit_evals, int runs, double target) {
    TargetStat stat;
    stat.target = target;
    stat.runs = runs;
    stat.successes = static_cast<int>(hit_evals.size());
    if (stat.successes == 0) {
        stat.unreached = true;
        return stat;
    }
    std::vector<double> counts(hit_evals.begin(), hit_evals.end());
    const MeanSd ms = mean_sd(counts);
    if (stat.successes == runs) {
        stat.value = ms.mean;
        stat.sd = ms.sd;
    } else {
        // empirical runtime: mean successful evaluations / success rate
        const double ps = static_cast<double>(stat.successes) / runs;
        stat.value = ms.mean / ps;
        stat.runtime_estimator = true;
    }
    return stat;
}

std::vector<OptRow> bench_optimizers(const OptBenchConfig& config) {
    const Objective objective = make_objective(config.problem);
    const ObjectiveFn fn = [&](const DesignVector& x) { return eval_objective(objective, x); };
    const std::vector<std::string> methods =
        config.methods.empty() ? default_opt_methods(config.problem) : config.methods;
    const std::vector<double> targets =
        config.targets.empty() ? default_targets(config.problem) : config.targets;

    std::vector<OptRow> rows;
    for (const auto& method : methods) {
        RunConfig rc = method_run_config(method, config);
        const BoSpace space = make_bo_space(rc); // shared database across the runs
        std::vector<double> best_values;
        std::vector<std::vector<int>> hits(targets.size());

        for (int r = 0; r < config.runs; ++r) {
            rc.seed = mix_seed(config.seed, 500 + static_cast<std::uint64_t>(r));
            const RunResult res = run(rc, fn, space);
            best_values.push_back(res.best_y);
            for (std::size_t t = 0; t < targets.size(); ++t) {
                for (std::size_t e = 0; e < res.trace.size(); ++e) {
                    if (res.trace[e] <= targets[t]) {
                        hits[t].push_back(static_cast<int>(e) + 1);
                        break;
                    }
                }
            }
        }

        OptRow row;
        row.method = method;
        const MeanSd best = mean_sd(best_values);
        row.best_mean = best.mean;
        row.best_sd = best.sd;
        for (std::size_t t = 0; t < targets.size(); ++t)
            row.targets.push_back(target_stat(hits[t], config.runs, targets[t]));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace shapebo
