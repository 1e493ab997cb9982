#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "shapebo/io.hpp"
#include "shapebo/simd.hpp"

namespace fs = std::filesystem;
using namespace shapebo;

namespace {

struct CommonArgs {
    std::string problem;
    std::string mapping = "contour";
    int n = 5000;
    std::uint64_t seed = 1;
    std::string config;
    std::string out = ".";
    bool have_seed_flag = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_mapping = true) {
    cmd->add_option("--problem", args.problem, "problem family")->required();
    if (with_mapping)
        cmd->add_option("--mapping", args.mapping, "characteristic | signed-distance | contour");
    cmd->add_option("--n", args.n, "sample / DoE size");
    cmd->add_option("--seed", args.seed, "random seed")
        ->each([&args](const std::string&) { args.have_seed_flag = true; });
    cmd->add_option("--config", args.config, "JSON config file");
    cmd->add_option("--out", args.out, "output directory");
}

MappingSpec mapping_of(const CommonArgs& args, ProblemId problem) {
    return default_mapping(problem, mapping_from_name(args.mapping));
}

int cmd_build_db(const CommonArgs& args, bool csv) {
    const ProblemId problem = problem_from_name(args.problem);
    const MappingSpec spec = mapping_of(args, problem);
    const ShapeDatabase db = build_database(problem, args.n, spec, args.seed);
    const fs::path dir(args.out);
    io::save_database(db, dir / (args.problem + "_db.txt"));
    if (csv) io::save_database_csv(db, dir / (args.problem + "_db.csv"));
    std::cout << "database: " << db.phi.rows() << " x " << db.phi.cols() << " ("
              << mapping_name(spec.mapping) << ", simd backend " << simd::backend_name() << ")\n";
    return 0;
}

int cmd_pca_report(const CommonArgs& args, const std::string& db_file, const std::string& route) {
    const ProblemId problem = problem_from_name(args.problem);
    ShapeDatabase db;
    if (!db_file.empty()) {
        db = io::load_database(db_file);
    } else {
        db = build_database(problem, args.n, mapping_of(args, problem), args.seed);
    }
    PcaRoute pca_route = PcaRoute::Auto;
    if (route == "covariance") pca_route = PcaRoute::Covariance;
    else if (route == "gram") pca_route = PcaRoute::Gram;
    else if (route != "auto") throw CLI::ValidationError("--route must be auto|covariance|gram");

    const EigenBasis basis = pca_fit(db, pca_route);
    const fs::path dir(args.out);
    io::save_spectrum_csv(basis, dir / (args.problem + "_spectrum.csv"), 64);
    io::save_basis(basis, db.mapping, dir / (args.problem + "_basis.txt"));

    const double lam1 = basis.eigenvalues.size() ? basis.eigenvalues[0] : 0.0;
    int significant = 0;
    for (int j = 0; j < basis.eigenvalues.size(); ++j)
        if (basis.eigenvalues[j] > 1e-8 * lam1) ++significant;
    std::cout << "eigenvalues > 1e-8*lambda_1: " << significant << "\n";
    std::cout << "effective dimension d': " << basis.d_prime << "\n";
    return 0;
}

// DoE in the eigenspace of a fresh database, outputs from the family's
// objective (the NACA families use the lift proxy)
void doe_alphas(ProblemId problem, const MappingSpec& spec, int n_db, int n_doe,
                std::uint64_t seed, Eigen::MatrixXd& alphas, Eigen::VectorXd& y) {
    const ShapeDatabase db = build_database(problem, n_db, spec, seed);
    const EigenBasis basis = pca_fit(db);
    const ProblemInfo& info = problem_info(problem);

    const bool lift = problem == ProblemId::Naca3 || problem == ProblemId::Naca22;
    Objective obj;
    if (!lift) obj = make_objective(problem);

    Rng rng = make_rng(seed, 0xd0e);
    const Eigen::MatrixXd unit = latin_hypercube(n_doe, info.dim, rng);
    alphas.resize(n_doe, basis.d_prime);
    y.resize(n_doe);
    for (int i = 0; i < n_doe; ++i) {
        DesignVector x{problem, Eigen::VectorXd(info.dim)};
        for (int j = 0; j < info.dim; ++j) {
            const Bounds& b = info.bounds[static_cast<std::size_t>(j)];
            x.values[j] = b.lo + unit(i, j) * (b.hi - b.lo);
        }
        alphas.row(i) = project(basis, shape_representation(x, spec), basis.d_prime).transpose();
        y[i] = lift ? naca_lift_proxy(x) : eval_objective(obj, x);
    }
}

int cmd_fit_model(const CommonArgs& args) {
    const ProblemId problem = problem_from_name(args.problem);
    Eigen::MatrixXd alphas;
    Eigen::VectorXd y;
    doe_alphas(problem, mapping_of(args, problem), 2000, args.n, args.seed, alphas, y);
    FitOptions fit;
    fit.seed = args.seed;
    const GpModel model = fit_gp(alphas, y, KernelFamily::Matern52, 0.0, fit);
    io::save_gp_model(model, fs::path(args.out) / (args.problem + "_gp.txt"));
    std::cout << "fitted GP on " << alphas.rows() << " points in " << alphas.cols()
              << " eigencomponents, loglik " << model.loglik << "\n";
    return 0;
}

int cmd_select_active(const CommonArgs& args) {
    const ProblemId problem = problem_from_name(args.problem);
    Eigen::MatrixXd alphas;
    Eigen::VectorXd y;
    doe_alphas(problem, mapping_of(args, problem), 2000, args.n, args.seed, alphas, y);
    SelectOptions sel;
    sel.fit.seed = args.seed;
    const ActiveSet set = select_active(alphas, y, sel);
    io::save_selection_csv(set, fs::path(args.out) / (args.problem + "_selection.csv"));
    std::cout << "active components:";
    for (int j : set.indices) std::cout << " " << j + 1;
    std::cout << "\n";
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    const ProblemId problem = problem_from_name(args.problem);
    RunConfig rc;
    if (!args.config.empty()) {
        rc = io::load_run_config(args.config, problem,
                                 args.have_seed_flag ? std::optional<std::uint64_t>(args.seed)
                                                     : std::nullopt);
    } else {
        rc.problem = problem;
        rc.mapping = mapping_of(args, problem);
        if (!problem_info(problem).has_shape) rc.space = SpaceKind::DirectSpace;
        rc.seed = args.seed;
    }

    const Objective obj = make_objective(rc.problem);
    const RunResult res =
        run(rc, [&](const DesignVector& x) { return eval_objective(obj, x); });
    io::save_run_log(res.log, fs::path(args.out) / (args.problem + "_run_log.csv"));
    std::cout << "best value " << res.best_y << " after " << res.trace.size()
              << " evaluations\n";
    return 0;
}

int cmd_bench_r2(const CommonArgs& args) {
    const ProblemId problem = problem_from_name(args.problem);
    R2BenchConfig cfg;
    if (!args.config.empty()) {
        cfg = io::load_r2_config(args.config, problem,
                                 args.have_seed_flag ? std::optional<std::uint64_t>(args.seed)
                                                     : std::nullopt);
    } else {
        cfg.problem = problem;
        cfg.mapping = mapping_of(args, problem);
        cfg.seed = args.seed;
    }
    const auto rows = bench_metamodels(cfg);
    io::save_r2_report(rows, fs::path(args.out) / (args.problem + "_r2.csv"));
    for (const auto& r : rows)
        std::cout << r.method << " n=" << r.n << " R2 " << r.mean_r2 << " (sd " << r.sd_r2
                  << ")\n";
    return 0;
}

int cmd_bench_opt(const CommonArgs& args) {
    const ProblemId problem = problem_from_name(args.problem);
    OptBenchConfig cfg;
    if (!args.config.empty()) {
        cfg = io::load_opt_config(args.config, problem,
                                  args.have_seed_flag ? std::optional<std::uint64_t>(args.seed)
                                                      : std::nullopt);
    } else {
        cfg.problem = problem;
        cfg.mapping = mapping_of(args, problem);
        cfg.seed = args.seed;
    }
    const auto rows = bench_optimizers(cfg);
    io::save_opt_report(rows, fs::path(args.out) / (args.problem + "_opt.csv"));
    for (const auto& r : rows)
        std::cout << r.method << " best " << r.best_mean << " (sd " << r.best_sd << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian shape optimization in an eigenshape basis"};
    app.require_subcommand(1);

    CommonArgs args;
    bool csv = false;
    std::string db_file;
    std::string route = "auto";

    auto* build_db = app.add_subcommand("build-db", "sample designs and build a shape database");
    add_common(build_db, args);
    build_db->add_flag("--csv", csv, "also write the CSV variant");

    auto* pca = app.add_subcommand("pca-report", "PCA spectrum and basis of a database");
    add_common(pca, args);
    pca->add_option("--db", db_file, "existing database file (skips sampling)");
    pca->add_option("--route", route, "auto | covariance | gram");

    auto* fit = app.add_subcommand("fit-model", "fit a GP to a DoE in the eigenbasis");
    add_common(fit, args);

    auto* select = app.add_subcommand("select-active", "penalized-likelihood selection report");
    add_common(select, args);

    auto* opt = app.add_subcommand("optimize", "run the Bayesian optimization loop");
    add_common(opt, args);

    auto* br2 = app.add_subcommand("bench-r2", "metamodel comparison (R2 report)");
    add_common(br2, args);

    auto* bopt = app.add_subcommand("bench-opt", "optimizer benchmark report");
    add_common(bopt, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (build_db->parsed()) return cmd_build_db(args, csv);
        if (pca->parsed()) return cmd_pca_report(args, db_file, route);
        if (fit->parsed()) return cmd_fit_model(args);
        if (select->parsed()) return cmd_select_active(args);
        if (opt->parsed()) return cmd_optimize(args);
        if (br2->parsed()) return cmd_bench_r2(args);
        if (bopt->parsed()) return cmd_bench_opt(args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
