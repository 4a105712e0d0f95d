#include "nrqb/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nrqb/error.hpp"

namespace nrqb {

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, Nørsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double weighted_rms(const Eigen::VectorXcd& v, const Eigen::VectorXd& scale) {
    if (v.size() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double q = std::abs(v(i)) / scale(i);
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

Eigen::VectorXd error_scale(const Eigen::VectorXcd& y0, const Eigen::VectorXcd& y1,
                            const IntegratorOptions& o) {
    Eigen::VectorXd s(y0.size());
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        s(i) = o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    }
    return s;
}

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw InvalidParameter("output grid is empty");
    if (!(grid.front() >= 0.0)) throw InvalidParameter("output grid must start at t >= 0");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw InvalidParameter("output grid must be strictly increasing");
    }
}

struct Counter {
    const ComplexRhs& rhs;
    std::size_t calls = 0;
    void operator()(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        ++calls;
        rhs(t, y, dy);
    }
};

std::vector<Eigen::VectorXcd> run_rk4(Counter& f, const Eigen::VectorXcd& y0,
                                      std::span<const double> grid, const IntegratorOptions& o,
                                      const StepProjector& projector, IntegratorStats& stats) {
    if (!(o.fixed_step > 0.0)) throw InvalidParameter("fixed_step must be > 0");
    std::vector<Eigen::VectorXcd> out;
    out.reserve(grid.size());
    Eigen::VectorXcd y = y0;
    Eigen::VectorXcd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size());
    double t = 0.0;
    for (double target : grid) {
        const double span = target - t;
        if (span > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(span / o.fixed_step - 1e-9));
            const double h = span / static_cast<double>(std::max<std::size_t>(steps, 1));
            for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
                const double ts = t + static_cast<double>(s) * h;
                f(ts, y, k1);
                f(ts + 0.5 * h, y + (0.5 * h) * k1, k2);
                f(ts + 0.5 * h, y + (0.5 * h) * k2, k3);
                f(ts + h, y + h * k3, k4);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (projector) projector(y);
                ++stats.accepted;
            }
            t = target;
        }
        out.push_back(y);
    }
    return out;
}

std::vector<Eigen::VectorXcd> run_dopri(Counter& f, const Eigen::VectorXcd& y0,
                                        std::span<const double> grid, const IntegratorOptions& o,
                                        const StepProjector& projector, IntegratorStats& stats) {
    const Eigen::Index n = y0.size();
    std::vector<Eigen::VectorXcd> out;
    out.reserve(grid.size());
    std::size_t next = 0;

    Eigen::VectorXcd y = y0;
    double t = 0.0;
    while (next < grid.size() && grid[next] == 0.0) {
        out.push_back(y);
        ++next;
    }
    if (next == grid.size()) return out;
    const double t_end = grid.back();

    Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), err(n);
    f(t, y, k1);

    double h = o.initial_step;
    if (!(h > 0.0)) {
        const Eigen::VectorXd sc = error_scale(y, y, o);
        const double dy0 = weighted_rms(y, sc);
        const double df0 = weighted_rms(k1, sc);
        double h0 = (dy0 < 1e-5 || df0 < 1e-5) ? 1e-6 : 0.01 * dy0 / df0;
        h0 = std::min(h0, t_end);
        const Eigen::VectorXcd y1 = y + h0 * k1;
        Eigen::VectorXcd f1(n);
        f(t + h0, y1, f1);
        const double ddf = weighted_rms(f1 - k1, sc) / h0;
        const double big = std::max(df0, ddf);
        const double h1 = big <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / big, 0.2);
        h = std::min(100.0 * h0, h1);
    }
    if (o.max_step > 0.0) h = std::min(h, o.max_step);

    constexpr double safety = 0.9, facmin = 0.2, facmax = 10.0;
    std::size_t steps = 0;
    while (t < t_end) {
        if (++steps > o.max_steps) {
            throw StepSizeUnderflow("step budget exhausted at t = " + std::to_string(t), t);
        }
        bool last = false;
        if (t + h >= t_end || t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }

        f(t + c2 * h, y + h * (a21 * k1), k2);
        f(t + c3 * h, y + h * (a31 * k1 + a32 * k2), k3);
        f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
        f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
        f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double enorm = weighted_rms(err, error_scale(y, ynew, o));
        if (!std::isfinite(enorm)) {
            h *= facmin;
            ++stats.rejected;
            if (h < o.min_step) throw StepSizeUnderflow("non-finite state near t = " + std::to_string(t), t);
            continue;
        }
        if (enorm > 1.0) {
            h *= std::max(facmin, safety * std::pow(enorm, -0.2));
            ++stats.rejected;
            if (h < o.min_step) {
                throw StepSizeUnderflow("step size fell below " + std::to_string(o.min_step) +
                                            " at t = " + std::to_string(t),
                                        t);
            }
            continue;
        }

        // Accepted: emit samples inside (t, t + h] from the dense polynomial.
        const double t_new = last ? t_end : t + h;
        if (next < grid.size() && grid[next] <= t_new) {
            const Eigen::VectorXcd ydiff = ynew - y;
            const Eigen::VectorXcd bspl = h * k1 - ydiff;
            const Eigen::VectorXcd r4 = ydiff - h * k7 - bspl;
            const Eigen::VectorXcd r5 =
                h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            while (next < grid.size() && grid[next] <= t_new) {
                Eigen::VectorXcd ys;
                if (grid[next] == t_new) {
                    ys = ynew;
                } else {
                    const double th = (grid[next] - t) / h;
                    const double th1 = 1.0 - th;
                    ys = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
                }
                if (projector) projector(ys);
                out.push_back(std::move(ys));
                ++next;
            }
        }

        y = ynew;
        if (projector) projector(y);
        t = t_new;
        ++stats.accepted;
        f(t, y, k1);

        double fac = enorm == 0.0 ? facmax : safety * std::pow(enorm, -0.2);
        h *= std::clamp(fac, facmin, facmax);
        if (o.max_step > 0.0) h = std::min(h, o.max_step);
    }
    return out;
}

}  // namespace

std::vector<Eigen::VectorXcd> integrate_ode(const ComplexRhs& rhs, const Eigen::VectorXcd& y0,
                                            std::span<const double> grid,
                                            const IntegratorOptions& opts,
                                            const StepProjector& projector, IntegratorStats* stats) {
    check_grid(grid);
    if (!(opts.rtol >= 0.0) || !(opts.atol >= 0.0) || opts.rtol + opts.atol <= 0.0) {
        throw InvalidParameter("integrator tolerances must be non-negative and not both zero");
    }
    IntegratorStats local;
    Counter f{rhs};
    auto out = opts.method == StepMethod::ClassicalRk4
                   ? run_rk4(f, y0, grid, opts, projector, local)
                   : run_dopri(f, y0, grid, opts, projector, local);
    local.evaluations = f.calls;
    if (stats) *stats = local;
    return out;
}

std::vector<double> uniform_grid(double t_end, std::size_t samples) {
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be > 0");
    if (samples < 2) throw InvalidParameter("a grid needs at least 2 samples");
    std::vector<double> g(samples);
    const double dt = t_end / static_cast<double>(samples - 1);
    for (std::size_t k = 0; k < samples; ++k) g[k] = dt * static_cast<double>(k);
    g.back() = t_end;
    return g;
}

}  // namespace nrqb
