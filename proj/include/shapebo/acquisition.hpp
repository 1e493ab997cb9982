#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapebo/eigenbasis.hpp"
#include "shapebo/optim.hpp"
#include "shapebo/surrogate.hpp"

namespace shapebo {

/// EI(m, s; a) = (a - m) Phi(z) + s phi(z), z = (a - m)/s; max(a - m, 0) at s = 0.
double expected_improvement(double mean, double sd, double threshold);

double ei_value(const Surrogate& model, const Eigen::VectorXd& alpha, double threshold);

/// Closed-form gradient -grad(m) Phi(z) + grad(s) phi(z). Requires s > 0.
Eigen::VectorXd ei_gradient(const Surrogate& model, const Eigen::VectorXd& alpha,
                            double threshold);

enum class EiStrategy { FullAlpha, ActiveOnly, Embed, ViaX };
enum class EiDomain { CoveringBox, OnManifold };

EiStrategy strategy_from_name(const std::string& name);
std::string strategy_name(EiStrategy s);

struct AcquisitionConfig {
    EiStrategy strategy = EiStrategy::Embed;
    EiDomain domain = EiDomain::CoveringBox;
    int population = 50;
    int generations = 40;
    int polish_starts = 5;
    bool sample_inactive = false; // ActiveOnly: draw alpha_inactive ~ N(0, lambda) instead of 0
};

/// Random one-dimensional embedding over the inactive coordinates:
/// A_emb maps [alpha_a, abar] to the d'-dimensional alpha space. Columns
/// 1..delta are the canonical basis vectors at the active rows; column
/// delta+1 carries the unit-norm random direction a_bar on the inactive rows.
struct EmbeddingSpec {
    std::vector<int> active;
    std::vector<int> inactive;
    Eigen::VectorXd a_bar;  // size d' - delta
    Eigen::MatrixXd a_emb;  // d' x (delta + 1)
    double abar_min = 0.0;
    double abar_max = 0.0;

    [[nodiscard]] Eigen::VectorXd lift(const Eigen::VectorXd& z) const { return a_emb * z; }
};

/// Draws a_bar i.i.d. standard normal, normalized to unit length.
/// Requires delta < d_prime.
EmbeddingSpec draw_embedding(const std::vector<int>& active, int d_prime, std::uint64_t seed);

/// [abar_min, abar_max]: projections of A_N onto a_bar intersected with the
/// constraint that abar * a_bar stays inside the covering hyper-rectangle.
/// Returns a degenerate [0, 0] when the intersection is empty.
std::pair<double, double> embed_bounds(const ManifoldStats& stats, const EmbeddingSpec& spec);

struct EiResult {
    Eigen::VectorXd alpha; // d'-dimensional proposal
    Eigen::VectorXd x;     // ViaX only: the design the search ran over
    double ei = 0.0;
    bool degenerate = false; // zero EI everywhere; alpha is the best-uncertainty point
    int evaluations = 0;
    double wall_ms = 0.0;
    std::string strategy;
};

/// Hooks the maximizer needs beyond the model: the covering box / manifold
/// test, the strategy-specific pieces, and warm starts.
struct EiSearchContext {
    const ManifoldStats* stats = nullptr;        // required
    const EmbeddingSpec* embedding = nullptr;    // Embed strategy
    const std::vector<int>* active = nullptr;    // ActiveOnly strategy
    // ViaX: search box in X and the map x -> alpha
    const Box* x_box = nullptr;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> x_to_alpha;
    std::vector<Eigen::VectorXd> warm_starts;    // alpha-space seeds for the global phase
};

/// Evolutionary global search plus gradient-based local polish (analytic
/// gradients except ViaX, which polishes derivative-free). Under OnManifold,
/// candidates failing the membership test score EI = 0.
EiResult maximize_ei(const Surrogate& model, const AcquisitionConfig& config,
                     const EiSearchContext& ctx, double threshold, std::uint64_t seed);

} // namespace shapebo
