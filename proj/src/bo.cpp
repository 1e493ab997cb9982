#include "shapebo/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace shapebo {

namespace {

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

// Surrogate over a subset of the model coordinates (used by PlainActive:
// the GP sees only the active coordinates, proposals stay d'-dimensional).
class SubsetSurrogate final : public Surrogate {
public:
    SubsetSurrogate(GpModel model, std::vector<int> idx, int full_dim)
        : inner_(std::move(model)), idx_(std::move(idx)), full_dim_(full_dim) {}
    [[nodiscard]] int dim() const override { return full_dim_; }
    [[nodiscard]] Prediction predict(const Eigen::VectorXd& q) const override {
        return inner_.predict(gather(q));
    }
    void gradient(const Eigen::VectorXd& q, Eigen::VectorXd& dm, Eigen::VectorXd& ds) const override {
        Eigen::VectorXd dmi, dsi;
        inner_.gradient(gather(q), dmi, dsi);
        dm = Eigen::VectorXd::Zero(full_dim_);
        ds = Eigen::VectorXd::Zero(full_dim_);
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            dm[idx_[i]] = dmi[static_cast<Eigen::Index>(i)];
            ds[idx_[i]] = dsi[static_cast<Eigen::Index>(i)];
        }
    }
    [[nodiscard]] double total_variance() const override { return inner_.total_variance(); }

private:
    [[nodiscard]] Eigen::VectorXd gather(const Eigen::VectorXd& q) const {
        Eigen::VectorXd z(static_cast<Eigen::Index>(idx_.size()));
        for (std::size_t i = 0; i < idx_.size(); ++i) z[static_cast<Eigen::Index>(i)] = q[idx_[i]];
        return z;
    }
    PlainGpSurrogate inner_;
    std::vector<int> idx_;
    int full_dim_;
};

std::string active_set_string(const std::vector<int>& active) {
    std::ostringstream os;
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (i) os << '+';
        os << active[i] + 1; // 1-based, matching the eigenshape numbering
    }
    return os.str();
}

constexpr double kDuplicateTol = 1e-10;

bool collides(const RunState& state, const Eigen::VectorXd& alpha) {
    for (const auto& row : state.rows) {
        if (row.alpha.size() != alpha.size()) continue;
        if ((row.alpha - alpha).norm() <= kDuplicateTol * (1.0 + alpha.norm())) return true;
    }
    return false;
}

} // namespace

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "gp" || name == "plain") return ModelKind::PlainAll;
    if (name == "gp-active") return ModelKind::PlainActive;
    if (name == "addgp" || name == "additive") return ModelKind::Additive;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

SpaceKind space_kind_from_name(const std::string& name) {
    if (name == "eigen" || name == "alpha") return SpaceKind::EigenSpace;
    if (name == "direct" || name == "x") return SpaceKind::DirectSpace;
    throw std::invalid_argument("unknown space kind '" + name + "'");
}

Eigen::VectorXd BoSpace::alpha_of_design(const Eigen::VectorXd& x) const {
    if (kind == SpaceKind::EigenSpace) {
        DesignVector dv{problem, x};
        return project(*basis, shape_representation(dv, mapping), model_dim);
    }
    if (subset_dim > 0) return x.head(subset_dim);
    return x;
}

Eigen::VectorXd BoSpace::design_of_model_point(const Eigen::VectorXd& z) const {
    if (kind != SpaceKind::DirectSpace)
        throw std::logic_error("design_of_model_point: direct space only");
    if (subset_dim <= 0) return x_box.clamp(z);
    // unspecified coordinates sit at the middle of their interval
    Eigen::VectorXd x = 0.5 * (x_box.lo + x_box.hi);
    for (int j = 0; j < subset_dim; ++j) x[j] = std::clamp(z[j], x_box.lo[j], x_box.hi[j]);
    return x;
}

BoSpace::PreImage BoSpace::solve_pre_image(const Eigen::VectorXd& alpha_star,
                                           std::uint64_t seed) const {
    PreImage out;
    if (kind == SpaceKind::DirectSpace) {
        out.x = design_of_model_point(alpha_star);
        out.alpha = alpha_of_design(out.x);
        out.distance = (out.alpha - alpha_star).norm();
        out.residual = out.distance;
        return out;
    }
    const PreImageResult res = pre_image(*basis, alpha_star, problem, mapping,
                                         db ? &*db : nullptr, seed, {}, &stats.alphas);
    out.x = res.x.values;
    out.alpha = res.alpha.head(model_dim);
    out.distance = (out.alpha - alpha_star).norm();
    out.residual = res.residual;
    return out;
}

BoSpace make_bo_space(const RunConfig& config) {
    BoSpace space;
    space.kind = config.space;
    space.problem = config.problem;
    space.x_box = design_box(config.problem);
    space.mapping = config.mapping;
    space.subset_dim = config.subset_dim;

    if (config.space == SpaceKind::EigenSpace) {
        space.db = build_database(config.problem, config.database_size, config.mapping, config.seed);
        space.basis = pca_fit(*space.db);
        space.model_dim = config.model_components > 0
                              ? std::min(config.model_components, space.basis->retained())
                              : space.basis->d_prime;
        // manifold sample over exactly the model coordinates
        EigenBasis view = *space.basis;
        view.d_prime = space.model_dim;
        space.stats = manifold_stats(view, *space.db);
        space.basis->d_prime = std::max(space.basis->d_prime, space.model_dim);
    } else {
        const int d = problem_info(config.problem).dim;
        space.model_dim = config.subset_dim > 0 ? config.subset_dim : d;
        // pseudo-manifold: space-filling sample of the box (exact pre-images
        // make d0/d95 inert; the covering box is the design box itself)
        Rng rng = make_rng(config.seed, 0x5a);
        const int n_sample = 256;
        Eigen::MatrixXd sample = latin_hypercube(n_sample, space.model_dim, rng);
        ManifoldStats stats;
        stats.alphas.resize(n_sample, space.model_dim);
        stats.box_lo.resize(space.model_dim);
        stats.box_hi.resize(space.model_dim);
        for (int j = 0; j < space.model_dim; ++j) {
            stats.box_lo[j] = space.x_box.lo[j];
            stats.box_hi[j] = space.x_box.hi[j];
            stats.alphas.col(j) =
                (space.x_box.lo[j] +
                 sample.col(j).array() * (space.x_box.hi[j] - space.x_box.lo[j]))
                    .matrix();
        }
        stats.d0 = 0.0;
        stats.d95 = std::numeric_limits<double>::infinity();
        space.stats = stats;
    }
    return space;
}

Eigen::MatrixXd RunState::alphas() const {
    if (rows.empty()) return {};
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), rows.front().alpha.size());
    for (std::size_t i = 0; i < rows.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = rows[i].alpha.transpose();
    return a;
}

Eigen::VectorXd RunState::outputs() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = rows[i].y;
    return y;
}

RunState initial_doe(const BoSpace& space, const ObjectiveFn& objective, int n0,
                     std::uint64_t seed) {
    if (n0 < 2) throw std::invalid_argument("initial_doe: need n0 >= 2");
    RunState state;
    state.f_min = std::numeric_limits<double>::infinity();

    Rng rng = make_rng(seed, 0xd0e);
    const int dim = space.model_dim;
    const Eigen::MatrixXd unit = latin_hypercube(n0, dim, rng);

    for (int i = 0; i < n0; ++i) {
        Eigen::VectorXd z(dim);
        for (int j = 0; j < dim; ++j)
            z[j] = space.stats.box_lo[j] +
                   unit(i, j) * (space.stats.box_hi[j] - space.stats.box_lo[j]);

        EvalRecord rec;
        rec.iter = 0;
        if (space.kind == SpaceKind::EigenSpace) {
            const BoSpace::PreImage pre = space.solve_pre_image(z, mix_seed(seed, 100 + i));
            rec.x = pre.x;
            rec.alpha = pre.alpha;
        } else {
            rec.x = space.design_of_model_point(z);
            rec.alpha = space.alpha_of_design(rec.x);
        }
        const double y = objective(DesignVector{space.problem, rec.x});
        if (!std::isfinite(y))
            throw std::runtime_error("initial_doe: objective returned a non-finite value");
        rec.y = y;
        state.true_evals += 1;
        rec.eval_index = state.true_evals;
        if (y < state.f_min) {
            state.f_min = y;
            state.best_x = rec.x;
        }
        rec.f_min = state.f_min;
        state.trace.push_back(state.f_min);
        state.rows.push_back(std::move(rec));
    }
    return state;
}

void bo_step(RunState& state, const RunConfig& config, const BoSpace& space,
             const ObjectiveFn& objective) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const int iter = state.iteration + 1;
    const std::uint64_t iter_seed = mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(iter));

    const Eigen::MatrixXd alphas = state.alphas();
    const Eigen::VectorXd ys = state.outputs();
    const int d = static_cast<int>(alphas.cols());

    // (a) active-set selection
    std::vector<int> active;
    if (config.model == ModelKind::PlainAll) {
        active.resize(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) active[static_cast<std::size_t>(j)] = j;
    } else if (config.selection_cadence == 0 && !config.fixed_active.empty()) {
        active = config.fixed_active;
    } else {
        const bool reselect = config.selection_cadence > 0 &&
                              (iter - 1) % config.selection_cadence == 0;
        if (!reselect && !state.rows.empty() && !state.last_active.empty()) {
            active = state.last_active;
        } else {
            SelectOptions sel;
            sel.lambda_override = config.lambda_override;
            sel.fit = config.fit;
            sel.fit.seed = iter_seed;
            active = select_active(alphas, ys, sel).indices;
        }
    }
    state.last_active = active;

    // (b) model fit
    std::unique_ptr<Surrogate> model;
    FitOptions fit = config.fit;
    fit.seed = mix_seed(iter_seed, 2);
    if (config.model == ModelKind::PlainAll) {
        model = std::make_unique<PlainGpSurrogate>(fit_gp(alphas, ys, KernelFamily::Matern52, 0.0, fit));
    } else if (config.model == ModelKind::PlainActive) {
        Eigen::MatrixXd sub(alphas.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t j = 0; j < active.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = alphas.col(active[j]);
        model = std::make_unique<SubsetSurrogate>(fit_gp(sub, ys, KernelFamily::Matern52, 0.0, fit),
                                                  active, d);
    } else {
        ActiveSet set;
        set.indices = active;
        model = std::make_unique<AdditiveGpSurrogate>(fit_additive(alphas, ys, set, fit));
    }

    // (c) acquisition
    AcquisitionConfig acq = config.acquisition;
    EiSearchContext ctx;
    ctx.stats = &space.stats;
    EmbeddingSpec embedding;
    if (acq.strategy == EiStrategy::Embed) {
        if (static_cast<int>(active.size()) >= d) {
            acq.strategy = EiStrategy::ActiveOnly; // degenerate embedding
        } else {
            embedding = draw_embedding(active, d, mix_seed(iter_seed, 3));
            const auto [lo, hi] = embed_bounds(space.stats, embedding);
            embedding.abar_min = lo;
            embedding.abar_max = hi;
            ctx.embedding = &embedding;
        }
    }
    if (acq.strategy == EiStrategy::ActiveOnly) ctx.active = &active;
    if (acq.strategy == EiStrategy::ViaX) {
        ctx.x_box = &space.x_box;
        ctx.x_to_alpha = [&space](const Eigen::VectorXd& x) { return space.alpha_of_design(x); };
    }
    // warm start at the incumbent
    int best_row = 0;
    for (std::size_t i = 0; i < state.rows.size(); ++i)
        if (!state.rows[i].replicated && state.rows[i].y <= state.rows[static_cast<std::size_t>(best_row)].y)
            best_row = static_cast<int>(i);
    ctx.warm_starts.push_back(state.rows[static_cast<std::size_t>(best_row)].alpha);

    const EiResult ei = maximize_ei(*model, acq, ctx, state.f_min, mix_seed(iter_seed, 4));

    // (d) pre-image; ViaX proposals are already designs, no search needed
    BoSpace::PreImage pre;
    if (acq.strategy == EiStrategy::ViaX && ei.x.size() > 0) {
        pre.x = space.x_box.clamp(ei.x);
        pre.alpha = ei.alpha;
        pre.distance = 0.0;
        pre.residual = 0.0;
    } else {
        pre = space.solve_pre_image(ei.alpha, mix_seed(iter_seed, 5));
    }

    // (e) evaluate
    const double y = objective(DesignVector{space.problem, pre.x});
    state.true_evals += 1;
    if (y < state.f_min) {
        state.f_min = y;
        state.best_x = pre.x;
    }
    state.trace.push_back(state.f_min);

    const double wall =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    EvalRecord rec;
    rec.iter = iter;
    rec.eval_index = state.true_evals;
    rec.x = pre.x;
    rec.alpha = pre.alpha;
    rec.y = y;
    rec.f_min = state.f_min;
    rec.strategy = ei.strategy;
    rec.active_set = active_set_string(active);
    rec.ei = ei.ei;
    rec.wall_ms = wall;
    rec.ei_candidates = ei.evaluations;

    const bool real_collides = collides(state, rec.alpha);
    if (!real_collides) state.rows.push_back(rec);

    // (f) replication: when the EI maximizer lies measurably off the manifold
    // (farther than d0 from its pre-image), keep it as a virtual point with
    // the same output
    if (config.replication && pre.distance > space.stats.d0) {
        EvalRecord virt = rec;
        virt.alpha = ei.alpha;
        virt.replicated = true;
        if (!collides(state, virt.alpha)) state.rows.push_back(std::move(virt));
    }

    state.iteration = iter;
}

RunResult run(const RunConfig& config, const ObjectiveFn& objective) {
    const BoSpace space = make_bo_space(config);
    return run(config, objective, space);
}

RunResult run(const RunConfig& config, const ObjectiveFn& objective, const BoSpace& space) {
    RunState state = initial_doe(space, objective, config.initial_doe, config.seed);
    for (int p = 0; p < config.iterations; ++p) bo_step(state, config, space, objective);

    RunResult result;
    result.log = state.rows;
    result.trace = state.trace;
    result.best_y = state.f_min;
    result.best_x = state.best_x;
    return result;
}

} // namespace shapebo
