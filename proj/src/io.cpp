#include "shapebo/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace shapebo::io {

namespace {

using nlohmann::json;

void require_open(const std::ios& stream, const std::filesystem::path& path) {
    if (!stream.good()) throw std::runtime_error("cannot open '" + path.string() + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    require_open(out, path);
    out.precision(17);
    return out;
}

void write_mapping(std::ostream& out, const MappingSpec& spec) {
    out << "mapping " << mapping_name(spec.mapping) << "\n";
    if (spec.mapping == Mapping::Contour) {
        out << "num_points " << spec.num_points << "\n";
    } else {
        out << "grid " << spec.grid.nx << " " << spec.grid.ny << " " << spec.grid.xmin << " "
            << spec.grid.xmax << " " << spec.grid.ymin << " " << spec.grid.ymax << "\n";
    }
}

} // namespace

void save_database(const ShapeDatabase& db, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "# shapebo-database v1\n";
    out << "problem " << problem_info(db.problem).name << "\n";
    write_mapping(out, db.mapping);
    out << "n " << db.phi.rows() << "\n";
    out << "d " << db.designs.cols() << "\n";
    out << "D " << db.phi.cols() << "\n";
    out << "seed " << db.seed << "\n";
    out << "rows\n";
    for (int i = 0; i < db.phi.rows(); ++i) {
        for (int j = 0; j < db.designs.cols(); ++j) out << db.designs(i, j) << " ";
        for (int j = 0; j < db.phi.cols(); ++j) out << db.phi(i, j) << (j + 1 < db.phi.cols() ? " " : "");
        out << "\n";
    }
}

ShapeDatabase load_database(const std::filesystem::path& path) {
    std::ifstream in(path);
    require_open(in, path);
    std::string line;
    std::getline(in, line); // banner
    ShapeDatabase db;
    int n = 0, d = 0, big_d = 0;
    for (;;) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated database file");
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "rows") break;
        if (key == "problem") {
            std::string name;
            ls >> name;
            db.problem = problem_from_name(name);
        } else if (key == "mapping") {
            std::string name;
            ls >> name;
            db.mapping.mapping = mapping_from_name(name);
        } else if (key == "num_points") {
            ls >> db.mapping.num_points;
        } else if (key == "grid") {
            ls >> db.mapping.grid.nx >> db.mapping.grid.ny >> db.mapping.grid.xmin >>
                db.mapping.grid.xmax >> db.mapping.grid.ymin >> db.mapping.grid.ymax;
        } else if (key == "n") {
            ls >> n;
        } else if (key == "d") {
            ls >> d;
        } else if (key == "D") {
            ls >> big_d;
        } else if (key == "seed") {
            ls >> db.seed;
        } else {
            throw std::runtime_error("unknown database header key '" + key + "'");
        }
    }
    if (n < 2 || d < 1 || big_d < 1) throw std::runtime_error("bad database header");
    db.designs.resize(n, d);
    db.phi.resize(n, big_d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) in >> db.designs(i, j);
        for (int j = 0; j < big_d; ++j) in >> db.phi(i, j);
    }
    if (!in.good() && !in.eof()) throw std::runtime_error("truncated database rows");
    return db;
}

void save_database_csv(const ShapeDatabase& db, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (int j = 0; j < db.designs.cols(); ++j) out << "design_" << j << ",";
    for (int j = 0; j < db.phi.cols(); ++j) out << "phi_" << j << (j + 1 < db.phi.cols() ? "," : "");
    out << "\n";
    for (int i = 0; i < db.phi.rows(); ++i) {
        for (int j = 0; j < db.designs.cols(); ++j) out << db.designs(i, j) << ",";
        for (int j = 0; j < db.phi.cols(); ++j) out << db.phi(i, j) << (j + 1 < db.phi.cols() ? "," : "");
        out << "\n";
    }
}

void save_basis(const EigenBasis& basis, const MappingSpec& mapping,
                const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "# shapebo-basis v1\n";
    out << "D " << basis.dim() << "\n";
    out << "d_prime " << basis.d_prime << "\n";
    out << "retained " << basis.retained() << "\n";
    write_mapping(out, mapping);
    out << "mean";
    for (int i = 0; i < basis.mean_shape.size(); ++i) out << " " << basis.mean_shape[i];
    out << "\neigenvalues";
    for (int i = 0; i < basis.eigenvalues.size(); ++i) out << " " << basis.eigenvalues[i];
    out << "\n";
    for (int j = 0; j < basis.retained(); ++j) {
        out << "v" << j + 1;
        for (int i = 0; i < basis.dim(); ++i) out << " " << basis.eigenvectors(i, j);
        out << "\n";
    }
}

void save_spectrum_csv(const EigenBasis& basis, const std::filesystem::path& path, int max_rows) {
    std::ofstream out = open_out(path);
    out << "j,eigenvalue,cumulative_pct\n";
    const double total = basis.eigenvalues.sum();
    const int rows = max_rows > 0 ? std::min<int>(max_rows, basis.eigenvalues.size())
                                  : static_cast<int>(basis.eigenvalues.size());
    double cum = 0.0;
    for (int j = 0; j < rows; ++j) {
        cum += basis.eigenvalues[j];
        out << j + 1 << "," << basis.eigenvalues[j] << ","
            << (total > 0.0 ? 100.0 * cum / total : 0.0) << "\n";
    }
}

namespace {

const char* kernel_family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::Matern52: return "matern52";
        case KernelFamily::Matern32: return "matern32";
        case KernelFamily::SqExp: return "sqexp";
    }
    return "matern52";
}

void write_kernel(std::ostream& out, const char* tag, const KernelSpec& k) {
    out << tag << "_family " << kernel_family_name(k.family) << "\n";
    out << tag << "_variance " << k.variance << "\n";
    out << tag << "_lengthscales";
    for (int j = 0; j < k.lengthscales.size(); ++j) out << " " << k.lengthscales[j];
    out << "\n";
}

void write_training(std::ostream& out, const Eigen::MatrixXd& inputs,
                    const Eigen::VectorXd& outputs) {
    out << "data\n";
    for (int i = 0; i < inputs.rows(); ++i) {
        for (int j = 0; j < inputs.cols(); ++j) out << inputs(i, j) << " ";
        out << outputs[i] << "\n";
    }
}

} // namespace

void save_gp_model(const GpModel& model, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "# shapebo-gp v1\n";
    out << "p " << model.p() << "\n";
    out << "n " << model.n() << "\n";
    write_kernel(out, "kernel", model.kernel);
    out << "beta " << model.beta_hat << "\n";
    out << "jitter " << model.jitter_rel << "\n";
    out << "loglik " << model.loglik << "\n";
    write_training(out, model.inputs, model.outputs);
}

void save_additive_model(const AdditiveGpModel& model, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "# shapebo-addgp v1\n";
    out << "p " << model.dim() << "\n";
    out << "n " << model.n() << "\n";
    out << "active";
    for (int a : model.active) out << " " << a + 1;
    out << "\n";
    write_kernel(out, "active", model.kernel_a);
    write_kernel(out, "inactive", model.kernel_i);
    out << "beta " << model.beta_hat << "\n";
    out << "jitter " << model.jitter_rel << "\n";
    out << "loglik " << model.loglik << "\n";
    write_training(out, model.inputs, model.outputs);
}

void save_selection_csv(const ActiveSet& set, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "j,theta_j,range_j,normalized_theta_j,active\n";
    for (int j = 0; j < set.theta.size(); ++j) {
        const bool active =
            std::find(set.indices.begin(), set.indices.end(), j) != set.indices.end();
        out << j + 1 << "," << set.theta[j] << "," << set.ranges[j] << ","
            << set.normalized_theta[j] << "," << (active ? 1 : 0) << "\n";
    }
}

void save_run_log(const std::vector<EvalRecord>& log, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    if (log.empty()) {
        out << "iter,eval_index,y,f_min,replicated,strategy,active_set,ei_value,wall_ms,"
               "ei_candidates\n";
        return;
    }
    out << "iter,eval_index";
    for (int j = 0; j < log.front().x.size(); ++j) out << ",x_" << j;
    for (int j = 0; j < log.front().alpha.size(); ++j) out << ",alpha_" << j;
    out << ",y,f_min,replicated,strategy,active_set,ei_value,wall_ms,ei_candidates\n";
    for (const auto& r : log) {
        out << r.iter << "," << r.eval_index;
        for (int j = 0; j < r.x.size(); ++j) out << "," << r.x[j];
        for (int j = 0; j < r.alpha.size(); ++j) out << "," << r.alpha[j];
        out << "," << r.y << "," << r.f_min << "," << (r.replicated ? 1 : 0) << "," << r.strategy
            << "," << r.active_set << "," << r.ei << "," << r.wall_ms << "," << r.ei_candidates
            << "\n";
    }
}

void save_r2_report(const std::vector<R2Row>& rows, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "method,n,mean_r2,sd_r2,runs,failures\n";
    for (const auto& r : rows)
        out << r.method << "," << r.n << "," << r.mean_r2 << "," << r.sd_r2 << "," << r.runs << ","
            << r.failures << "\n";
}

void save_opt_report(const std::vector<OptRow>& rows, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "method,best_mean,best_sd,target,stat,sd,successes,runs\n";
    for (const auto& r : rows) {
        if (r.targets.empty()) {
            out << r.method << "," << r.best_mean << "," << r.best_sd << ",,,,,\n";
            continue;
        }
        for (const auto& t : r.targets) {
            out << r.method << "," << r.best_mean << "," << r.best_sd << "," << t.target << ",";
            if (t.unreached)
                out << "x,";
            else
                out << t.value << "," << (t.runtime_estimator ? std::string() : std::to_string(t.sd));
            out << "," << t.successes << "," << t.runs << "\n";
        }
    }
}

namespace {

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    require_open(in, path);
    json j;
    in >> j;
    return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::filesystem::path& path) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw std::runtime_error("unknown config key '" + key + "' in " + path.string());
}

MappingSpec mapping_from_json(const json& j, ProblemId problem) {
    MappingSpec spec = default_mapping(problem, Mapping::Contour);
    if (j.contains("mapping")) spec = default_mapping(problem, mapping_from_name(j["mapping"]));
    if (j.contains("num_points")) spec.num_points = j["num_points"];
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        spec.grid.nx = g.at(0);
        spec.grid.ny = g.at(1);
        spec.grid.xmin = g.at(2);
        spec.grid.xmax = g.at(3);
        spec.grid.ymin = g.at(4);
        spec.grid.ymax = g.at(5);
    }
    return spec;
}

AcquisitionConfig acquisition_from_json(const json& j) {
    AcquisitionConfig acq;
    if (j.contains("strategy")) acq.strategy = strategy_from_name(j["strategy"]);
    if (j.contains("domain"))
        acq.domain = j["domain"] == "on-manifold" ? EiDomain::OnManifold : EiDomain::CoveringBox;
    if (j.contains("population")) acq.population = j["population"];
    if (j.contains("generations")) acq.generations = j["generations"];
    if (j.contains("polish_starts")) acq.polish_starts = j["polish_starts"];
    if (j.contains("sample_inactive")) acq.sample_inactive = j["sample_inactive"];
    return acq;
}

FitOptions fit_from_json(const json& j) {
    FitOptions fit;
    if (j.contains("fit_starts")) fit.starts = j["fit_starts"];
    if (j.contains("fit_iterations")) fit.max_iterations = j["fit_iterations"];
    return fit;
}

const std::set<std::string> kCommonKeys = {
    "problem",     "mapping",        "num_points",  "grid",       "seed",
    "strategy",    "domain",         "population",  "generations", "polish_starts",
    "sample_inactive", "fit_starts", "fit_iterations"};

} // namespace

namespace {

std::uint64_t required_seed(const json& j, std::optional<std::uint64_t> seed_flag,
                            const std::filesystem::path& path) {
    if (seed_flag) return *seed_flag;
    if (j.contains("seed")) return j["seed"].get<std::uint64_t>();
    throw std::invalid_argument("config " + path.string() + " must set a seed (or pass --seed)");
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path, ProblemId fallback_problem,
                          std::optional<std::uint64_t> seed_flag) {
    const json j = load_json(path);
    std::set<std::string> keys = kCommonKeys;
    keys.insert({"space", "n_database", "components", "subset_dim", "model", "n0", "iterations",
                 "replication", "selection_cadence", "fixed_active", "lambda"});
    check_keys(j, keys, path);

    RunConfig rc;
    rc.problem = j.contains("problem") ? problem_from_name(j["problem"]) : fallback_problem;
    rc.mapping = mapping_from_json(j, rc.problem);
    if (j.contains("space")) rc.space = space_kind_from_name(j["space"]);
    else if (!problem_info(rc.problem).has_shape) rc.space = SpaceKind::DirectSpace;
    if (j.contains("n_database")) rc.database_size = j["n_database"];
    if (j.contains("components")) rc.model_components = j["components"];
    if (j.contains("subset_dim")) rc.subset_dim = j["subset_dim"];
    if (j.contains("model")) rc.model = model_kind_from_name(j["model"]);
    rc.acquisition = acquisition_from_json(j);
    if (j.contains("n0")) rc.initial_doe = j["n0"];
    if (j.contains("iterations")) rc.iterations = j["iterations"];
    if (j.contains("replication")) rc.replication = j["replication"];
    if (j.contains("selection_cadence")) rc.selection_cadence = j["selection_cadence"];
    if (j.contains("fixed_active"))
        rc.fixed_active = j["fixed_active"].get<std::vector<int>>();
    if (j.contains("lambda")) rc.lambda_override = j["lambda"];
    rc.fit = fit_from_json(j);
    rc.seed = required_seed(j, seed_flag, path);
    return rc;
}

R2BenchConfig load_r2_config(const std::filesystem::path& path, ProblemId fallback_problem,
                             std::optional<std::uint64_t> seed_flag) {
    const json j = load_json(path);
    std::set<std::string> keys = kCommonKeys;
    keys.insert({"sizes", "methods", "runs", "test_size", "n_database"});
    check_keys(j, keys, path);

    R2BenchConfig cfg;
    cfg.problem = j.contains("problem") ? problem_from_name(j["problem"]) : fallback_problem;
    cfg.mapping = mapping_from_json(j, cfg.problem);
    if (j.contains("sizes")) cfg.sizes = j["sizes"].get<std::vector<int>>();
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("runs")) cfg.runs = j["runs"];
    if (j.contains("test_size")) cfg.test_size = j["test_size"];
    if (j.contains("n_database")) cfg.database_size = j["n_database"];
    cfg.fit = fit_from_json(j);
    cfg.seed = required_seed(j, seed_flag, path);
    return cfg;
}

OptBenchConfig load_opt_config(const std::filesystem::path& path, ProblemId fallback_problem,
                               std::optional<std::uint64_t> seed_flag) {
    const json j = load_json(path);
    std::set<std::string> keys = kCommonKeys;
    keys.insert({"methods", "targets", "runs", "n0", "iterations", "n0_highdim",
                 "iterations_highdim", "n_database", "fixed_active"});
    check_keys(j, keys, path);

    OptBenchConfig cfg;
    cfg.problem = j.contains("problem") ? problem_from_name(j["problem"]) : fallback_problem;
    cfg.mapping = mapping_from_json(j, cfg.problem);
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("targets")) cfg.targets = j["targets"].get<std::vector<double>>();
    if (j.contains("runs")) cfg.runs = j["runs"];
    if (j.contains("n0")) cfg.n0 = j["n0"];
    if (j.contains("iterations")) cfg.iterations = j["iterations"];
    if (j.contains("n0_highdim")) cfg.n0_highdim = j["n0_highdim"];
    if (j.contains("iterations_highdim")) cfg.iterations_highdim = j["iterations_highdim"];
    if (j.contains("n_database")) cfg.database_size = j["n_database"];
    if (j.contains("fixed_active"))
        cfg.direct_fixed_active = j["fixed_active"].get<std::vector<int>>();
    cfg.acquisition = acquisition_from_json(j);
    cfg.fit = fit_from_json(j);
    cfg.seed = required_seed(j, seed_flag, path);
    return cfg;
}

} // namespace shapebo::io
