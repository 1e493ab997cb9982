#include "shapebo/acquisition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace shapebo {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2_v<double> / 2.0); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

} // namespace

double expected_improvement(double mean, double sd, double threshold) {
    if (!(sd > 0.0)) return std::max(threshold - mean, 0.0);
    const double z = (threshold - mean) / sd;
    return (threshold - mean) * normal_cdf(z) + sd * normal_pdf(z);
}

double ei_value(const Surrogate& model, const Eigen::VectorXd& alpha, double threshold) {
    const Prediction p = model.predict(alpha);
    return expected_improvement(p.mean, p.sd(), threshold);
}

Eigen::VectorXd ei_gradient(const Surrogate& model, const Eigen::VectorXd& alpha,
                            double threshold) {
    const Prediction p = model.predict(alpha);
    const double sd = p.sd();
    if (!(sd > 0.0)) throw std::domain_error("ei_gradient: s = 0 at query");
    Eigen::VectorXd dm, ds;
    model.gradient(alpha, dm, ds);
    const double z = (threshold - p.mean) / sd;
    return -dm * normal_cdf(z) + ds * normal_pdf(z);
}

EiStrategy strategy_from_name(const std::string& name) {
    if (name == "full" || name == "full-alpha") return EiStrategy::FullAlpha;
    if (name == "active" || name == "active-only") return EiStrategy::ActiveOnly;
    if (name == "embed") return EiStrategy::Embed;
    if (name == "via-x" || name == "viax") return EiStrategy::ViaX;
    throw std::invalid_argument("unknown EI strategy '" + name + "'");
}

std::string strategy_name(EiStrategy s) {
    switch (s) {
        case EiStrategy::FullAlpha: return "full-alpha";
        case EiStrategy::ActiveOnly: return "active-only";
        case EiStrategy::Embed: return "embed";
        case EiStrategy::ViaX: return "via-x";
    }
    return "full-alpha";
}

EmbeddingSpec draw_embedding(const std::vector<int>& active, int d_prime, std::uint64_t seed) {
    const int delta = static_cast<int>(active.size());
    if (delta >= d_prime)
        throw std::invalid_argument("draw_embedding: no inactive coordinates (delta = d')");

    EmbeddingSpec spec;
    spec.active = active;
    std::sort(spec.active.begin(), spec.active.end());
    for (int j = 0; j < d_prime; ++j)
        if (!std::binary_search(spec.active.begin(), spec.active.end(), j))
            spec.inactive.push_back(j);

    Rng rng = make_rng(seed, 0xe3b);
    spec.a_bar.resize(static_cast<Eigen::Index>(spec.inactive.size()));
    for (int i = 0; i < spec.a_bar.size(); ++i) spec.a_bar[i] = gaussian(rng);
    spec.a_bar.normalize();

    spec.a_emb = Eigen::MatrixXd::Zero(d_prime, delta + 1);
    for (int i = 0; i < delta; ++i) spec.a_emb(spec.active[static_cast<std::size_t>(i)], i) = 1.0;
    for (std::size_t i = 0; i < spec.inactive.size(); ++i)
        spec.a_emb(spec.inactive[i], delta) = spec.a_bar[static_cast<Eigen::Index>(i)];
    return spec;
}

std::pair<double, double> embed_bounds(const ManifoldStats& stats, const EmbeddingSpec& spec) {
    const int m = static_cast<int>(spec.inactive.size());
    if (m == 0) return {0.0, 0.0};

    // initial bounds: smallest and largest projection of A_N onto a_bar
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < stats.alphas.rows(); ++i) {
        double proj = 0.0;
        for (int j = 0; j < m; ++j) proj += stats.alphas(i, spec.inactive[static_cast<std::size_t>(j)]) *
                                            spec.a_bar[j];
        lo = std::min(lo, proj);
        hi = std::max(hi, proj);
    }
    // clip so that abar * a_bar stays inside the covering hyper-rectangle
    for (int j = 0; j < m; ++j) {
        const double aj = spec.a_bar[j];
        if (aj == 0.0) continue;
        const int col = spec.inactive[static_cast<std::size_t>(j)];
        double l = stats.box_lo[col] / aj;
        double h = stats.box_hi[col] / aj;
        if (l > h) std::swap(l, h);
        lo = std::max(lo, l);
        hi = std::min(hi, h);
    }
    if (lo > hi) return {0.0, 0.0};
    return {lo, hi};
}

EiResult maximize_ei(const Surrogate& model, const AcquisitionConfig& config,
                     const EiSearchContext& ctx, double threshold, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    if (ctx.stats == nullptr) throw std::invalid_argument("maximize_ei: missing manifold stats");
    const int d = model.dim();

    // strategy plumbing: search box + lift from search coordinates to alpha
    Box box;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> lift;
    Eigen::VectorXd inactive_fill; // ActiveOnly only
    switch (config.strategy) {
        case EiStrategy::FullAlpha:
            box.lo = ctx.stats->box_lo;
            box.hi = ctx.stats->box_hi;
            lift = [](const Eigen::VectorXd& z) { return z; };
            break;
        case EiStrategy::ActiveOnly: {
            if (ctx.active == nullptr) throw std::invalid_argument("maximize_ei: missing active set");
            const std::vector<int>& act = *ctx.active;
            box.lo.resize(static_cast<Eigen::Index>(act.size()));
            box.hi.resize(static_cast<Eigen::Index>(act.size()));
            for (std::size_t i = 0; i < act.size(); ++i) {
                box.lo[static_cast<Eigen::Index>(i)] = ctx.stats->box_lo[act[i]];
                box.hi[static_cast<Eigen::Index>(i)] = ctx.stats->box_hi[act[i]];
            }
            inactive_fill = Eigen::VectorXd::Zero(d);
            if (config.sample_inactive) {
                // the sampled variant: alpha_inactive ~ N(0, lambda_j), one draw
                // per maximization, lambda approximated by the sample variance
                Rng rng = make_rng(seed, 0xf11);
                std::vector<char> is_active(static_cast<std::size_t>(d), 0);
                for (int a : act) is_active[static_cast<std::size_t>(a)] = 1;
                for (int j = 0; j < d; ++j) {
                    if (is_active[static_cast<std::size_t>(j)]) continue;
                    const auto col = ctx.stats->alphas.col(j);
                    const double var = (col.array() - col.mean()).square().sum() /
                                       std::max<int>(1, static_cast<int>(col.size()));
                    inactive_fill[j] = gaussian(rng, 0.0, std::sqrt(std::max(var, 0.0)));
                }
            }
            lift = [act, inactive_fill, d](const Eigen::VectorXd& z) {
                Eigen::VectorXd alpha = inactive_fill;
                for (std::size_t i = 0; i < act.size(); ++i)
                    alpha[act[i]] = z[static_cast<Eigen::Index>(i)];
                return alpha;
            };
            break;
        }
        case EiStrategy::Embed: {
            if (ctx.embedding == nullptr) throw std::invalid_argument("maximize_ei: missing embedding");
            const EmbeddingSpec& emb = *ctx.embedding;
            const int delta = static_cast<int>(emb.active.size());
            box.lo.resize(delta + 1);
            box.hi.resize(delta + 1);
            for (int i = 0; i < delta; ++i) {
                box.lo[i] = ctx.stats->box_lo[emb.active[static_cast<std::size_t>(i)]];
                box.hi[i] = ctx.stats->box_hi[emb.active[static_cast<std::size_t>(i)]];
            }
            box.lo[delta] = emb.abar_min;
            box.hi[delta] = emb.abar_max;
            lift = [&emb](const Eigen::VectorXd& z) { return emb.lift(z); };
            break;
        }
        case EiStrategy::ViaX: {
            if (ctx.x_box == nullptr || !ctx.x_to_alpha)
                throw std::invalid_argument("maximize_ei: missing X-space context");
            box = *ctx.x_box;
            lift = ctx.x_to_alpha;
            break;
        }
    }

    int evaluations = 0;
    Eigen::VectorXd best_s_alpha;      // highest-uncertainty candidate (degenerate fallback)
    Eigen::VectorXd best_s_z;
    double best_s = -1.0;
    const bool on_manifold_rule = config.domain == EiDomain::OnManifold;
    const ObjFn score = [&](const Eigen::VectorXd& z) {
        const Eigen::VectorXd alpha = lift(z);
        ++evaluations;
        const Prediction p = model.predict(alpha);
        if (p.sd() > best_s) {
            best_s = p.sd();
            best_s_alpha = alpha;
            best_s_z = z;
        }
        if (on_manifold_rule && !is_on_manifold(*ctx.stats, alpha)) return 0.0;
        return expected_improvement(p.mean, p.sd(), threshold);
    };

    // warm starts arrive in alpha space; usable directly only when the search
    // runs in alpha space
    std::vector<Eigen::VectorXd> seeds;
    if (config.strategy == EiStrategy::FullAlpha)
        for (const auto& w : ctx.warm_starts) seeds.push_back(w);
    if (config.strategy == EiStrategy::ActiveOnly && ctx.active)
        for (const auto& w : ctx.warm_starts) {
            Eigen::VectorXd z(static_cast<Eigen::Index>(ctx.active->size()));
            for (std::size_t i = 0; i < ctx.active->size(); ++i)
                z[static_cast<Eigen::Index>(i)] = w[(*ctx.active)[i]];
            seeds.push_back(z);
        }

    Rng rng = make_rng(seed, 0xea);
    GaOptions ga;
    ga.population = config.population;
    ga.generations = config.generations;
    OptimResult global = ga_maximize(score, box, ga, rng, seeds);

    Eigen::VectorXd best_z = global.x;
    double best_ei = global.f;

    // local polish from the global optimum (gradient-based where analytic)
    const bool gradient_ok = config.strategy != EiStrategy::ViaX && !on_manifold_rule;
    for (int s = 0; s < config.polish_starts; ++s) {
        Eigen::VectorXd z0 = s == 0 ? best_z : box.sample(rng);
        if (gradient_ok) {
            const GradObjFn neg_ei = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
                const Eigen::VectorXd alpha = lift(z);
                ++evaluations;
                const Prediction p = model.predict(alpha);
                const double ei = expected_improvement(p.mean, p.sd(), threshold);
                if (grad) {
                    if (p.sd() > 0.0 && ei > 0.0) {
                        const Eigen::VectorXd g = ei_gradient(model, alpha, threshold);
                        // chain rule through the lift (A_emb^T grad for the embedding)
                        if (config.strategy == EiStrategy::Embed)
                            *grad = -(ctx.embedding->a_emb.transpose() * g);
                        else if (config.strategy == EiStrategy::ActiveOnly) {
                            grad->resize(z.size());
                            for (std::size_t i = 0; i < ctx.active->size(); ++i)
                                (*grad)[static_cast<Eigen::Index>(i)] = -g[(*ctx.active)[i]];
                        } else
                            *grad = -g;
                    } else {
                        grad->setZero(z.size());
                    }
                }
                return -ei;
            };
            LbfgsOptions lb;
            lb.box = &box;
            lb.max_iterations = 60;
            const OptimResult res = lbfgs_minimize(neg_ei, z0, lb);
            if (-res.f > best_ei) {
                best_ei = -res.f;
                best_z = res.x;
            }
        } else {
            NelderMeadOptions nm;
            nm.box = &box;
            nm.max_iterations = 200;
            const OptimResult res =
                nelder_mead_minimize([&](const Eigen::VectorXd& z) { return -score(z); }, z0, 0.05,
                                     nm);
            if (-res.f > best_ei) {
                best_ei = -res.f;
                best_z = res.x;
            }
        }
    }

    EiResult out;
    out.strategy = strategy_name(config.strategy);
    out.evaluations = evaluations;
    if (best_ei > 0.0) {
        out.alpha = lift(best_z);
        out.ei = best_ei;
        if (config.strategy == EiStrategy::ViaX) out.x = best_z;
    } else {
        // zero EI everywhere: fall back to the highest-uncertainty candidate
        const bool have_s = best_s >= 0.0;
        out.alpha = have_s ? best_s_alpha : lift(best_z);
        if (config.strategy == EiStrategy::ViaX) out.x = have_s ? best_s_z : best_z;
        out.ei = 0.0;
        out.degenerate = true;
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    return out;
}

} // namespace shapebo
