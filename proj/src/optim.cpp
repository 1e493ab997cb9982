#include "shapebo/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace shapebo {

OptimResult lbfgs_minimize(const GradObjFn& f, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts) {
    const int n = static_cast<int>(x0.size());
    Eigen::VectorXd x = opts.box ? opts.box->clamp(x0) : x0;
    Eigen::VectorXd g(n);
    double fx = f(x, &g);
    int evals = 1;

    OptimResult result{x, fx, evals, false};
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (g.norm() <= opts.grad_tol * (1.0 + std::abs(fx))) {
            result.converged = true;
            break;
        }
        // two-loop recursion
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[static_cast<std::size_t>(i)] =
                rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
            q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
        }
        if (!y_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        if (dir.dot(g) >= 0.0) dir = -g; // not a descent direction: steepest descent restart

        // backtracking Armijo line search
        double step = 1.0;
        const double slope = dir.dot(g);
        Eigen::VectorXd x_new;
        Eigen::VectorXd g_new(n);
        double f_new = fx;
        bool ok = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = x + step * dir;
            if (opts.box) x_new = opts.box->clamp(x_new);
            f_new = f(x_new, &g_new);
            ++evals;
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) break;

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        const double df = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if (fx < result.f) {
            result.x = x;
            result.f = fx;
        }
        if (df <= opts.f_tol * (1.0 + std::abs(fx)) && s.norm() < 1e-12 + 1e-9 * x.norm()) {
            result.converged = true;
            break;
        }
        if (df <= opts.f_tol * (1.0 + std::abs(fx)) && iter > 2) {
            result.converged = true;
            break;
        }
    }
    result.evals = evals;
    if (result.f > fx) {
        result.x = x;
        result.f = fx;
    }
    return result;
}

OptimResult nelder_mead_minimize(const ObjFn& f, const Eigen::VectorXd& x0, double scale,
                                 const NelderMeadOptions& opts) {
    const int n = static_cast<int>(x0.size());
    if (n < 1) throw std::invalid_argument("nelder_mead: empty input");
    const auto clamp = [&](Eigen::VectorXd v) { return opts.box ? opts.box->clamp(v) : v; };

    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(clamp(x0));
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd v = x0;
        v[j] += scale * (1.0 + std::abs(x0[j]));
        pts.push_back(clamp(v));
    }
    int evals = 0;
    for (const auto& p : pts) {
        vals.push_back(f(p));
        ++evals;
    }

    std::vector<int> order(pts.size());
    const auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return vals[static_cast<std::size_t>(a)] <
                                                    vals[static_cast<std::size_t>(b)]; });
    };

    OptimResult result;
    result.converged = false;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        sort_simplex();
        const int best = order.front();
        const int worst = order.back();
        const int second = order[order.size() - 2];
        if (std::abs(vals[static_cast<std::size_t>(worst)] - vals[static_cast<std::size_t>(best)]) <=
            opts.f_tol * (1.0 + std::abs(vals[static_cast<std::size_t>(best)]))) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i : order)
            if (i != worst) centroid += pts[static_cast<std::size_t>(i)];
        centroid /= n;

        const auto try_point = [&](double coef) {
            Eigen::VectorXd p = clamp(centroid + coef * (centroid - pts[static_cast<std::size_t>(worst)]));
            const double v = f(p);
            ++evals;
            return std::pair<Eigen::VectorXd, double>{std::move(p), v};
        };

        auto [xr, fr] = try_point(1.0); // reflection
        if (fr < vals[static_cast<std::size_t>(best)]) {
            auto [xe, fe] = try_point(2.0); // expansion
            if (fe < fr) {
                pts[static_cast<std::size_t>(worst)] = xe;
                vals[static_cast<std::size_t>(worst)] = fe;
            } else {
                pts[static_cast<std::size_t>(worst)] = xr;
                vals[static_cast<std::size_t>(worst)] = fr;
            }
        } else if (fr < vals[static_cast<std::size_t>(second)]) {
            pts[static_cast<std::size_t>(worst)] = xr;
            vals[static_cast<std::size_t>(worst)] = fr;
        } else {
            auto [xc, fc] = try_point(fr < vals[static_cast<std::size_t>(worst)] ? 0.5 : -0.5);
            if (fc < std::min(fr, vals[static_cast<std::size_t>(worst)])) {
                pts[static_cast<std::size_t>(worst)] = xc;
                vals[static_cast<std::size_t>(worst)] = fc;
            } else { // shrink towards the best vertex
                for (int i : order) {
                    if (i == best) continue;
                    pts[static_cast<std::size_t>(i)] =
                        clamp(pts[static_cast<std::size_t>(best)] +
                              0.5 * (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(best)]));
                    vals[static_cast<std::size_t>(i)] = f(pts[static_cast<std::size_t>(i)]);
                    ++evals;
                }
            }
        }
    }
    sort_simplex();
    result.x = pts[static_cast<std::size_t>(order.front())];
    result.f = vals[static_cast<std::size_t>(order.front())];
    result.evals = evals;
    return result;
}

GradObjFn with_fd_gradient(const ObjFn& f, double h_rel) {
    return [f, h_rel](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        const double fx = f(x);
        if (grad) {
            grad->resize(x.size());
            Eigen::VectorXd xp = x;
            for (int j = 0; j < x.size(); ++j) {
                const double h = h_rel * (1.0 + std::abs(x[j]));
                xp[j] = x[j] + h;
                const double fp = f(xp);
                xp[j] = x[j] - h;
                const double fm = f(xp);
                xp[j] = x[j];
                (*grad)[j] = (fp - fm) / (2.0 * h);
            }
        }
        return fx;
    };
}

OptimResult ga_maximize(const ObjFn& f, const Box& box, const GaOptions& opts, Rng& rng,
                        const std::vector<Eigen::VectorXd>& seeds) {
    const int n = box.dim();
    const int pop_size = std::max(opts.population, 4);
    const Eigen::VectorXd range = box.hi - box.lo;

    std::vector<Eigen::VectorXd> pop;
    pop.reserve(static_cast<std::size_t>(pop_size));
    for (const auto& s : seeds) {
        if (static_cast<int>(pop.size()) >= pop_size) break;
        pop.push_back(box.clamp(s));
    }
    const Eigen::MatrixXd lhs = latin_hypercube(pop_size - static_cast<int>(pop.size()), n, rng);
    for (int i = 0; i < lhs.rows(); ++i)
        pop.push_back(box.lo + lhs.row(i).transpose().cwiseProduct(range));

    std::vector<double> fit(static_cast<std::size_t>(pop_size));
    OptimResult best;
    best.f = -std::numeric_limits<double>::infinity();
    int evals = 0;
    const auto eval_all = [&] {
        for (int i = 0; i < pop_size; ++i) {
            fit[static_cast<std::size_t>(i)] = f(pop[static_cast<std::size_t>(i)]);
            ++evals;
            if (fit[static_cast<std::size_t>(i)] > best.f) {
                best.f = fit[static_cast<std::size_t>(i)];
                best.x = pop[static_cast<std::size_t>(i)];
            }
        }
    };
    eval_all();

    const auto tournament = [&]() -> int {
        int winner = static_cast<int>(rng() % static_cast<std::uint64_t>(pop_size));
        for (int k = 0; k < 2; ++k) {
            const int c = static_cast<int>(rng() % static_cast<std::uint64_t>(pop_size));
            if (fit[static_cast<std::size_t>(c)] > fit[static_cast<std::size_t>(winner)]) winner = c;
        }
        return winner;
    };

    for (int gen = 0; gen < opts.generations; ++gen) {
        std::vector<int> order(static_cast<std::size_t>(pop_size));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return fit[static_cast<std::size_t>(a)] > fit[static_cast<std::size_t>(b)];
        });
        std::vector<Eigen::VectorXd> next;
        next.reserve(static_cast<std::size_t>(pop_size));
        next.push_back(pop[static_cast<std::size_t>(order[0])]); // elitism
        next.push_back(pop[static_cast<std::size_t>(order[1])]);

        const double mut_sd =
            opts.mutation_scale * (1.0 - 0.9 * static_cast<double>(gen) / opts.generations);
        while (static_cast<int>(next.size()) < pop_size) {
            const Eigen::VectorXd& pa = pop[static_cast<std::size_t>(tournament())];
            const Eigen::VectorXd& pb = pop[static_cast<std::size_t>(tournament())];
            Eigen::VectorXd child(n);
            for (int j = 0; j < n; ++j) {
                // BLX-alpha blend
                const double lo = std::min(pa[j], pb[j]);
                const double hi = std::max(pa[j], pb[j]);
                const double span = hi - lo;
                child[j] = uniform(rng, lo - 0.3 * span, hi + 0.3 * span);
                if (uniform(rng) < 2.0 / n) child[j] += gaussian(rng, 0.0, mut_sd * range[j]);
            }
            next.push_back(box.clamp(child));
        }
        pop.swap(next);
        eval_all();
    }
    best.evals = evals;
    best.converged = true;
    return best;
}

Eigen::MatrixXd latin_hypercube(int n, int dim, Rng& rng) {
    Eigen::MatrixXd out(n, dim);
    if (n == 0) return out;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int j = 0; j < dim; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < n; ++i)
            out(i, j) = (perm[static_cast<std::size_t>(i)] + uniform(rng)) / n;
    }
    return out;
}

} // namespace shapebo
