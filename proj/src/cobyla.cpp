#include "qsim/cobyla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsim/fit.hpp"  // detail::solve_linear

namespace qsim {

namespace {

struct Point {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> con;

    double viol() const {
        double v = 0.0;
        for (double c : con) v = std::max(v, -c);
        return std::max(v, 0.0);
    }
    double merit(double mu) const { return f + mu * viol(); }
};

// Cyclic Jacobi eigensolver for a small symmetric matrix (row-major n*n).
// Fills ascending eigenvalues and column-major eigenvectors.
void jacobi_eig(std::vector<double> a, int n, std::vector<double>& evals,
                std::vector<double>& evecs) {
    evecs.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i) evecs[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = evecs[k * n + p], vkq = evecs[k * n + q];
                    evecs[k * n + p] = c * vkp - s * vkq;
                    evecs[k * n + q] = s * vkp + c * vkq;
                }
            }
    }
    evals.resize(n);
    for (int i = 0; i < n; ++i) evals[i] = a[i * n + i];
    // selection sort ascending, permuting eigenvector columns alongside
    for (int i = 0; i < n; ++i) {
        int lo = i;
        for (int j = i + 1; j < n; ++j)
            if (evals[j] < evals[lo]) lo = j;
        if (lo != i) {
            std::swap(evals[i], evals[lo]);
            for (int k = 0; k < n; ++k) std::swap(evecs[k * n + i], evecs[k * n + lo]);
        }
    }
}

// Smallest singular value of the edge matrix (columns e_1..e_n) and the
// corresponding left singular direction (unit vector poorly spanned).
double weak_direction(const std::vector<std::vector<double>>& edges, int n,
                      std::vector<double>& dir) {
    std::vector<double> s(n * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += edges[i][k] * edges[j][k];
            s[i * n + j] = acc;
        }
    std::vector<double> evals, evecs;
    jacobi_eig(std::move(s), n, evals, evecs);
    const double sigma = std::sqrt(std::max(evals[0], 0.0));
    dir.assign(n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) dir[k] += edges[i][k] * evecs[i * n + 0];
    double nrm = 0.0;
    for (double v : dir) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-300) {
        for (double& v : dir) v /= nrm;
    } else {
        // simplex fully degenerate along some axis: fall back to the canonical
        // direction least represented by the edges
        int best_k = 0;
        double best_res = -1.0;
        for (int k = 0; k < n; ++k) {
            double proj = 0.0;
            for (int i = 0; i < n; ++i) {
                double en = 0.0, dot = 0.0;
                for (int kk = 0; kk < n; ++kk) en += edges[i][kk] * edges[i][kk];
                dot = edges[i][k];
                if (en > 1e-300) proj += dot * dot / en;
            }
            if (-proj > best_res) {
                best_res = -proj;
                best_k = k;
            }
        }
        dir.assign(n, 0.0);
        dir[best_k] = 1.0;
    }
    return sigma;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Trust-region subproblem on the linear models, in two stages: first drive
// the greatest constraint violation to its minimum over the ball, then
// minimize the linear objective without worsening that violation level.
// Solved by projected (sub)gradient passes; evaluations of the real objective
// dominate total cost, so a few thousand cheap iterations are acceptable.
std::vector<double> solve_subproblem(const std::vector<double>& grad,
                                     const std::vector<double>& cvals,
                                     const std::vector<std::vector<double>>& cgrads, double rho,
                                     int n) {
    const int m = static_cast<int>(cvals.size());
    auto violation = [&](const std::vector<double>& d) {
        double v = 0.0;
        for (int j = 0; j < m; ++j) v = std::max(v, -(cvals[j] + dot(cgrads[j], d)));
        return std::max(v, 0.0);
    };
    auto ball = [&](std::vector<double>& d) {
        const double nrm = std::sqrt(dot(d, d));
        if (nrm > rho)
            for (double& v : d) v *= rho / nrm;
    };

    // stage 1: minimize the max violation within the ball
    std::vector<double> d(n, 0.0), sg(n);
    double vstar = violation(d);
    if (vstar > 0.0) {
        std::vector<double> best = d;
        for (int t = 0; t < 800; ++t) {
            int jstar = -1;
            double v = 0.0;
            for (int j = 0; j < m; ++j) {
                const double vj = -(cvals[j] + dot(cgrads[j], d));
                if (vj > v) {
                    v = vj;
                    jstar = j;
                }
            }
            if (jstar < 0) {
                best = d;
                vstar = 0.0;
                break;
            }
            double nrm = std::sqrt(dot(cgrads[jstar], cgrads[jstar]));
            if (nrm < 1e-300) break;
            const double eta = rho / std::sqrt(t + 1.0);
            for (int k = 0; k < n; ++k) d[k] += eta * cgrads[jstar][k] / nrm;
            ball(d);
            const double w = violation(d);
            if (w < vstar) {
                vstar = w;
                best = d;
                if (vstar == 0.0) break;
            }
        }
        d = best;
    }

    // stage 2: minimize grad.d subject to violation(d) <= vstar (relaxed
    // halfspaces a_j.d >= -c_j - vstar) by gradient steps with alternating
    // projections onto the violated halfspaces and the ball
    const double gn = std::sqrt(dot(grad, grad));
    if (gn > 1e-300) {
        // the unconstrained optimum of the linear objective on the ball is
        // exact whenever it violates nothing
        std::vector<double> du(n);
        for (int k = 0; k < n; ++k) du[k] = -rho * grad[k] / gn;
        if (violation(du) <= vstar + 1e-12 * (1.0 + vstar)) return du;
    }
    const double slack = vstar + 1e-12 * (1.0 + vstar);
    auto restore = [&](std::vector<double>& y) {
        for (int pass = 0; pass < 6; ++pass) {
            for (int j = 0; j < m; ++j) {
                const double lhs = cvals[j] + slack + dot(cgrads[j], y);
                if (lhs < 0.0) {
                    const double nn = dot(cgrads[j], cgrads[j]);
                    if (nn > 1e-300)
                        for (int k = 0; k < n; ++k) y[k] -= lhs * cgrads[j][k] / nn;
                }
            }
            ball(y);
        }
    };

    const double gnorm = std::sqrt(dot(grad, grad));
    if (gnorm < 1e-300) return d;
    std::vector<double> best = d;
    double best_obj = dot(grad, d);
    const double feas_tol = vstar + 1e-9 * (1.0 + vstar) + 1e-12;
    for (int t = 0; t < 2400; ++t) {
        const double eta = rho / std::sqrt(t + 1.0);
        for (int k = 0; k < n; ++k) d[k] -= eta * grad[k] / gnorm;
        restore(d);
        const double obj = dot(grad, d);
        if (violation(d) <= feas_tol && obj < best_obj) {
            best_obj = obj;
            best = d;
        }
    }
    return best;
}

}  // namespace

SolverResult cobyla_minimize(const OptProblem& problem, std::vector<double> x0,
                             const SolverOptions& opts) {
    const int n = static_cast<int>(x0.size());
    const int m = static_cast<int>(problem.constraints.size());
    if (n < 1) throw std::invalid_argument("cobyla_minimize: empty parameter vector");
    if (!(opts.rhobeg > opts.rhoend && opts.rhoend > 0.0))
        throw std::invalid_argument("cobyla_minimize: need rhobeg > rhoend > 0");
    if (opts.maxfun < n + 2) throw std::invalid_argument("cobyla_minimize: maxfun too small");

    SolverResult res;
    std::vector<Point> archive;
    archive.reserve(opts.maxfun);

    auto evaluate = [&](const std::vector<double>& x, Point& p) {
        if (res.evals >= opts.maxfun) return false;
        ++res.evals;
        p.x = x;
        p.f = problem.objective(x);
        p.con.resize(m);
        for (int j = 0; j < m; ++j) p.con[j] = problem.constraints[j](x);
        archive.push_back(p);
        return true;
    };

    // The initial simplex grows from the best point found so far: when a new
    // vertex beats the current base, later coordinate offsets start from it.
    std::vector<Point> sim(n + 1);
    bool budget = evaluate(x0, sim[0]);
    {
        int base = 0;
        for (int i = 1; i <= n && budget; ++i) {
            std::vector<double> x = sim[base].x;
            x[i - 1] += opts.rhobeg;
            budget = evaluate(x, sim[i]);
            if (budget && sim[i].f < sim[base].f) base = i;
        }
    }

    double rho = opts.rhobeg;
    double mu = 0.0;
    constexpr double alpha = 0.25, beta = 2.1;
    // When set, the last evaluation was a trust-region trial and the next
    // action is another trust step; geometry repairs only happen after a
    // failed or short step finds the simplex unacceptable.
    bool ibrnch = false;

    std::vector<std::vector<double>> edges(n, std::vector<double>(n));
    std::vector<std::vector<double>> einv_cols(n);  // columns of E^-1
    std::vector<double> fgrad(n);
    std::vector<double> cvals(m);
    std::vector<std::vector<double>> cgrads(m, std::vector<double>(n));

    while (budget) {
        // best point to slot 0, edges from it to the other vertices
        int best = 0;
        for (int i = 1; i <= n; ++i)
            if (sim[i].merit(mu) < sim[best].merit(mu)) best = i;
        if (best != 0) std::swap(sim[0], sim[best]);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) edges[i][k] = sim[i + 1].x[k] - sim[0].x[k];

        // invert the edge matrix; its columns give each vertex's distance to
        // the opposite face (geometry quality) and the face normals
        std::vector<double> mat(n * n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) mat[i * n + k] = edges[i][k];
        bool invertible = true;
        for (int k = 0; k < n && invertible; ++k) {
            std::vector<double> unit(n, 0.0);
            unit[k] = 1.0;
            invertible = detail::solve_linear(mat, unit, einv_cols[k], n);
        }

        int weakest = 1;
        double worst_sig = 0.0, longest = 0.0;
        bool iflag = invertible;
        if (invertible) {
            // models come for free from the inverse: grad = E^-1 * (value deltas)
            std::vector<double> df(n);
            for (int i = 0; i < n; ++i) df[i] = sim[i + 1].f - sim[0].f;
            for (int k = 0; k < n; ++k) {
                fgrad[k] = 0.0;
                for (int i = 0; i < n; ++i) fgrad[k] += einv_cols[i][k] * df[i];
            }
            for (int j = 0; j < m; ++j) {
                for (int i = 0; i < n; ++i) df[i] = sim[i + 1].con[j] - sim[0].con[j];
                for (int k = 0; k < n; ++k) {
                    cgrads[j][k] = 0.0;
                    for (int i = 0; i < n; ++i) cgrads[j][k] += einv_cols[i][k] * df[i];
                }
                cvals[j] = sim[0].con[j];
            }

            worst_sig = std::numeric_limits<double>::infinity();
            int far_vertex = 1;
            for (int i = 0; i < n; ++i) {
                const double sig = 1.0 / std::sqrt(dot(einv_cols[i], einv_cols[i]));
                if (sig < worst_sig) {
                    worst_sig = sig;
                    weakest = i + 1;
                }
                const double len = std::sqrt(dot(edges[i], edges[i]));
                if (len > longest) {
                    longest = len;
                    far_vertex = i + 1;
                }
            }
            if (longest > beta * rho) {
                iflag = false;
                weakest = far_vertex;
            } else if (worst_sig < alpha * rho) {
                iflag = false;
            }
        }

        if (!ibrnch && !iflag) {
            // geometry step: rebuild the offending vertex half a radius from
            // the best point along its face normal, sign chosen by the models
            std::vector<double> dir(n);
            if (invertible) {
                dir = einv_cols[weakest - 1];
                const double nrm = std::sqrt(dot(dir, dir));
                for (double& v : dir) v /= nrm;
                double plus = 0.5 * rho * dot(fgrad, dir), minus = -plus;
                for (int j = 0; j < m; ++j) {
                    const double dv = 0.5 * rho * dot(cgrads[j], dir);
                    plus += mu * std::max(0.0, -(cvals[j] + dv));
                    minus += mu * std::max(0.0, -(cvals[j] - dv));
                }
                if (minus < plus)
                    for (double& v : dir) v = -v;
            } else {
                weak_direction(edges, n, dir);
                double far_len = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double len = std::sqrt(dot(edges[i], edges[i]));
                    if (len > far_len) {
                        far_len = len;
                        weakest = i + 1;
                    }
                }
            }
            std::vector<double> xnew = sim[0].x;
            for (int k = 0; k < n; ++k) xnew[k] += 0.5 * rho * dir[k];
            Point p;
            if (!(budget = evaluate(xnew, p))) break;
            sim[weakest] = std::move(p);
            continue;
        }
        if (!invertible) {
            // a degenerate simplex cannot support a trust step; repair first
            ibrnch = false;
            continue;
        }

        auto model_viol = [&](const std::vector<double>& d) {
            double v = 0.0;
            for (int j = 0; j < m; ++j) v = std::max(v, -(cvals[j] + dot(cgrads[j], d)));
            return std::max(v, 0.0);
        };

        const std::vector<double> d = solve_subproblem(fgrad, cvals, cgrads, rho, n);
        const double dlen = std::sqrt(dot(d, d));
        bool shortstep = dlen < 0.5 * rho;
        double pred = 0.0;
        if (!shortstep) {
            // merit parameter rule: keep mu large enough that the predicted
            // merit change rewards the violation reduction bought by any f
            // increase
            const double prerec =
                model_viol(std::vector<double>(n, 0.0)) - model_viol(d);
            const double fchange = dot(fgrad, d);
            if (prerec > 1e-300 && fchange > 0.0 && mu * prerec < 1.5 * fchange) {
                mu = 1.5 * fchange / prerec;
                // the heavier weight may re-rank the vertices; if so restart
                // from the new optimal one before spending an evaluation
                bool rerank = false;
                for (int i = 1; i <= n && !rerank; ++i)
                    rerank = sim[i].merit(mu) < sim[0].merit(mu);
                if (rerank) continue;
            }
            pred = mu * prerec - fchange;
            if (pred <= 1e-14 * std::max(1.0, std::abs(sim[0].f))) shortstep = true;
        }

        bool success = false;
        if (!shortstep) {
            std::vector<double> xnew = sim[0].x;
            for (int k = 0; k < n; ++k) xnew[k] += d[k];
            Point trial;
            if (!(budget = evaluate(xnew, trial))) break;
            ibrnch = true;

            const double ared = sim[0].merit(mu) - trial.merit(mu);
            success = ared > 0.0 && ared >= 0.1 * pred;

            // Replacement coefficients: |c_j| is the volume ratio if the
            // trial replaces vertex j. Non-improving trials must strictly
            // grow the volume; a second pass prefers dropping a stale distant
            // vertex when the replacement keeps its face distance healthy.
            int jdrop = 0;
            double cbest = ared > 0.0 ? 0.0 : 1.0;
            std::vector<double> cabs(n);
            for (int j = 1; j <= n; ++j) {
                cabs[j - 1] = std::abs(dot(einv_cols[j - 1], d));
                if (cabs[j - 1] > cbest) {
                    cbest = cabs[j - 1];
                    jdrop = j;
                }
            }
            double edgmax = 1.1 * rho;
            for (int j = 1; j <= n; ++j) {
                const double vsig =
                    1.0 / std::sqrt(dot(einv_cols[j - 1], einv_cols[j - 1]));
                const double sigbar = cabs[j - 1] * vsig;
                if (sigbar >= alpha * rho || sigbar >= vsig) {
                    double dist;
                    if (ared > 0.0) {
                        dist = 0.0;
                        for (int k = 0; k < n; ++k) {
                            const double dx = xnew[k] - sim[j].x[k];
                            dist += dx * dx;
                        }
                        dist = std::sqrt(dist);
                    } else {
                        dist = std::sqrt(dot(edges[j - 1], edges[j - 1]));
                    }
                    if (dist > edgmax) {
                        edgmax = dist;
                        jdrop = j;
                    }
                }
            }
            if (jdrop > 0) sim[jdrop] = std::move(trial);
        }
        if (success) continue;

        // failed or short step: repair unsound geometry before blaming the
        // radius, otherwise tighten the trust region
        if (!iflag) {
            ibrnch = false;
            continue;
        }
        if (rho <= opts.rhoend) {
            res.status = "rhoend";
            break;
        }
        rho *= 0.5;
        if (rho <= 1.5 * opts.rhoend) rho = opts.rhoend;
        // rebalance the merit weight: cap it by the spread of f over the
        // simplex relative to the spread of each near-active constraint
        if (mu > 0.0) {
            double denom = 0.0;
            for (int j = 0; j < m; ++j) {
                double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
                for (int i = 0; i <= n; ++i) {
                    cmin = std::min(cmin, sim[i].con[j]);
                    cmax = std::max(cmax, sim[i].con[j]);
                }
                if (cmin < 0.5 * cmax) {
                    const double temp = std::max(cmax, 0.0) - cmin;
                    denom = denom <= 0.0 ? temp : std::min(denom, temp);
                }
            }
            if (denom == 0.0) {
                mu = 0.0;
            } else {
                double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
                for (int i = 0; i <= n; ++i) {
                    fmin = std::min(fmin, sim[i].f);
                    fmax = std::max(fmax, sim[i].f);
                }
                if (fmax - fmin < mu * denom) mu = (fmax - fmin) / denom;
            }
        }
    }

    if (res.status.empty()) res.status = budget ? "rhoend" : "maxfun";
    res.reached_maxfun = !budget;

    // report the best feasible archive point, else the least-infeasible one
    const Point* pick = nullptr;
    for (const Point& p : archive) {
        if (p.viol() <= opts.ctol) {
            if (!pick || p.f < pick->f) pick = &p;
        }
    }
    if (!pick) {
        for (const Point& p : archive)
            if (!pick || p.viol() < pick->viol() ||
                (p.viol() == pick->viol() && p.f < pick->f))
                pick = &p;
    }
    if (!pick) throw std::runtime_error("cobyla_minimize: no evaluations performed");
    res.x = pick->x;
    res.f = pick->f;
    res.maxviol = pick->viol();
    return res;
}

SolverResult neldermead_minimize(const OptProblem& problem, std::vector<double> x0,
                                 const SolverOptions& opts, double penalty) {
    const int n = static_cast<int>(x0.size());
    if (n < 1) throw std::invalid_argument("neldermead_minimize: empty parameter vector");
    if (opts.maxfun < n + 2) throw std::invalid_argument("neldermead_minimize: maxfun too small");

    SolverResult res;
    std::vector<Point> archive;
    archive.reserve(opts.maxfun);
    const int m = static_cast<int>(problem.constraints.size());

    auto evaluate = [&](const std::vector<double>& x, Point& p) {
        if (res.evals >= opts.maxfun) return false;
        ++res.evals;
        p.x = x;
        p.f = problem.objective(x);
        p.con.resize(m);
        for (int j = 0; j < m; ++j) p.con[j] = problem.constraints[j](x);
        archive.push_back(p);
        return true;
    };
    auto merit = [&](const Point& p) { return p.merit(penalty); };

    std::vector<Point> sim(n + 1);
    bool budget = evaluate(x0, sim[0]);
    for (int i = 1; i <= n && budget; ++i) {
        std::vector<double> x = x0;
        x[i - 1] += opts.rhobeg;
        budget = evaluate(x, sim[i]);
    }

    while (budget) {
        std::sort(sim.begin(), sim.end(),
                  [&](const Point& a, const Point& b) { return merit(a) < merit(b); });
        double spread = 0.0;
        for (int i = 1; i <= n; ++i) {
            double dist = 0.0;
            for (int k = 0; k < n; ++k) {
                const double dx = sim[i].x[k] - sim[0].x[k];
                dist += dx * dx;
            }
            spread = std::max(spread, std::sqrt(dist));
        }
        if (spread <= opts.rhoend) {
            res.status = "rhoend";
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) centroid[k] += sim[i].x[k] / n;

        auto along = [&](double coef) {
            std::vector<double> x(n);
            for (int k = 0; k < n; ++k) x[k] = centroid[k] + coef * (sim[n].x[k] - centroid[k]);
            return x;
        };

        Point refl;
        if (!(budget = evaluate(along(-1.0), refl))) break;
        if (merit(refl) < merit(sim[0])) {
            Point expd;
            if (!(budget = evaluate(along(-2.0), expd))) break;
            sim[n] = merit(expd) < merit(refl) ? std::move(expd) : std::move(refl);
            continue;
        }
        if (merit(refl) < merit(sim[n - 1])) {
            sim[n] = std::move(refl);
            continue;
        }
        Point contr;
        const double ccoef = merit(refl) < merit(sim[n]) ? -0.5 : 0.5;
        if (!(budget = evaluate(along(ccoef), contr))) break;
        if (merit(contr) < std::min(merit(refl), merit(sim[n]))) {
            sim[n] = std::move(contr);
            continue;
        }
        // shrink toward the best vertex
        for (int i = 1; i <= n && budget; ++i) {
            std::vector<double> x(n);
            for (int k = 0; k < n; ++k) x[k] = 0.5 * (sim[0].x[k] + sim[i].x[k]);
            budget = evaluate(x, sim[i]);
        }
    }

    if (res.status.empty()) res.status = budget ? "rhoend" : "maxfun";
    res.reached_maxfun = !budget;

    const Point* pick = nullptr;
    for (const Point& p : archive) {
        if (p.viol() <= opts.ctol) {
            if (!pick || p.f < pick->f) pick = &p;
        }
    }
    if (!pick) {
        for (const Point& p : archive)
            if (!pick || p.viol() < pick->viol() ||
                (p.viol() == pick->viol() && p.f < pick->f))
                pick = &p;
    }
    if (!pick) throw std::runtime_error("neldermead_minimize: no evaluations performed");
    res.x = pick->x;
    res.f = pick->f;
    res.maxviol = pick->viol();
    return res;
}

}  // namespace qsim
