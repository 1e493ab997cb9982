#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapebo/acquisition.hpp"

namespace shapebo {

using ObjectiveFn = std::function<double(const DesignVector&)>;

enum class ModelKind { PlainAll, PlainActive, Additive };
enum class SpaceKind { EigenSpace, DirectSpace };

ModelKind model_kind_from_name(const std::string& name);
SpaceKind space_kind_from_name(const std::string& name);

struct RunConfig {
    ProblemId problem = ProblemId::Catenoid;
    SpaceKind space = SpaceKind::EigenSpace;
    MappingSpec mapping;       // eigen space only
    int database_size = 5000;  // N
    int model_components = -1; // eigen: number of alpha components (-1: d')
    int subset_dim = -1;       // direct: model/EI restricted to the first k coords
    ModelKind model = ModelKind::Additive;
    AcquisitionConfig acquisition;
    int initial_doe = 20; // n0
    int iterations = 80;  // p
    bool replication = true;
    int selection_cadence = 1;     // re-select actives every k iterations; 0 = fixed
    std::vector<int> fixed_active; // used when selection_cadence = 0
    double lambda_override = -1.0; // selection penalty (default n/d')
    FitOptions fit;
    std::uint64_t seed = 1;
};

/// The coordinate system a run works in: either the eigenshape space backed
/// by a database + PCA (with a pre-image solver), or the design space itself
/// (identity feature map, exact pre-images).
struct BoSpace {
    SpaceKind kind = SpaceKind::DirectSpace;
    ProblemId problem = ProblemId::Griewank;
    int model_dim = 0;
    ManifoldStats stats;
    Box x_box; // design bounds

    // eigen-space payload
    std::optional<ShapeDatabase> db;
    std::optional<EigenBasis> basis;
    MappingSpec mapping;
    int subset_dim = -1;

    [[nodiscard]] Eigen::VectorXd alpha_of_design(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd design_of_model_point(const Eigen::VectorXd& z) const; // direct only

    struct PreImage {
        Eigen::VectorXd x;
        Eigen::VectorXd alpha;
        double distance = 0.0; // || alpha_star - alpha ||
        double residual = 0.0;
    };
    [[nodiscard]] PreImage solve_pre_image(const Eigen::VectorXd& alpha_star,
                                           std::uint64_t seed) const;
};

BoSpace make_bo_space(const RunConfig& config);

struct EvalRecord {
    int iter = 0;       // 0 for the DoE
    int eval_index = 0; // 1-based true-evaluation counter (virtual rows repeat it)
    Eigen::VectorXd x;
    Eigen::VectorXd alpha;
    double y = 0.0;
    double f_min = 0.0;
    bool replicated = false;
    std::string strategy;
    std::string active_set;
    double ei = 0.0;
    double wall_ms = 0.0;
    int ei_candidates = 0; // acquisition diagnostics: criterion evaluations
};

struct RunState {
    std::vector<EvalRecord> rows; // training rows, append order
    double f_min = 0.0;
    Eigen::VectorXd best_x;
    int true_evals = 0;
    int iteration = 0;
    std::vector<double> trace;      // f_min after each true evaluation
    std::vector<int> last_active;   // selection carried between iterations

    [[nodiscard]] Eigen::MatrixXd alphas() const;
    [[nodiscard]] Eigen::VectorXd outputs() const;
};

RunState initial_doe(const BoSpace& space, const ObjectiveFn& objective, int n0,
                     std::uint64_t seed);

/// One iteration of the loop: re-select actives, refit, maximize EI, solve
/// the pre-image, evaluate, apply the replication rule, update bookkeeping.
void bo_step(RunState& state, const RunConfig& config, const BoSpace& space,
             const ObjectiveFn& objective);

struct RunResult {
    Eigen::VectorXd best_x;
    double best_y = 0.0;
    std::vector<double> trace; // f_min after each true evaluation (n0 + p entries)
    std::vector<EvalRecord> log;
};

RunResult run(const RunConfig& config, const ObjectiveFn& objective);
RunResult run(const RunConfig& config, const ObjectiveFn& objective, const BoSpace& space);

} // namespace shapebo
