// Random-effects likelihood. Given theta = 1/beta, the increments of one
// process have joint density
//   prod_j dx_j^(alpha dt_j - 1) / Gamma(alpha dt_j) * beta^(alpha tau) e^(-beta s)
// with tau = t_n - t_0 and s = x_n - x_0. Averaging over theta ~ U(a, b) and
// substituting z = s / theta gives
//   s^(1 - alpha tau) / (b - a) * [Gamma(alpha tau - 1, s/b) - Gamma(alpha tau - 1, s/a)].
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cbm/degradation.hpp"
#include "cbm/errors.hpp"
#include "cbm/special_functions.hpp"

namespace cbm {

void DegradationObservations::validate() const {
    const char* where = "DegradationObservations";
    detail::require(!processes.empty(), where, "no processes");
    for (const auto& p : processes) {
        const std::string id = "process " + std::to_string(p.id);
        if (p.times.size() != p.levels.size()) detail::fail_validation(where, id + ": times/levels size mismatch");
        if (p.times.size() < 2) detail::fail_validation(where, id + ": needs at least two observations");
        for (std::size_t j = 0; j < p.times.size(); ++j) {
            if (!std::isfinite(p.times[j]) || !std::isfinite(p.levels[j]) || p.times[j] < 0.0 || p.levels[j] < 0.0)
                detail::fail_validation(where, id + ": non-finite or negative entry");
            if (j > 0 && !(p.times[j] > p.times[j - 1]))
                detail::fail_validation(where, id + ": times must be strictly increasing");
            if (j > 0 && p.levels[j] < p.levels[j - 1])
                detail::fail_validation(where, id + ": levels must be non-decreasing");
        }
    }
}

DegradationObservations read_observations_csv(std::istream& in) {
    const char* where = "read_observations_csv";
    std::string line;
    if (!std::getline(in, line)) detail::fail_validation(where, "empty input");
    line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
    if (line != "process_id,time,level") detail::fail_validation(where, "header must be process_id,time,level");
    DegradationObservations data;
    std::map<std::int64_t, std::size_t> index;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a, b, c, extra;
        if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c, ',') ||
            std::getline(fields, extra, ','))
            detail::fail_validation(where, "row " + std::to_string(row) + ": expected three fields");
        std::int64_t id;
        double t, x;
        try {
            std::size_t used = 0;
            id = std::stoll(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            t = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
            x = std::stod(c, &used);
            if (used != c.size()) throw std::invalid_argument(c);
        } catch (const std::exception&) {
            detail::fail_validation(where, "row " + std::to_string(row) + ": unparsable number");
        }
        auto [it, inserted] = index.try_emplace(id, data.processes.size());
        if (inserted) data.processes.push_back(ProcessObservations{id, {}, {}});
        data.processes[it->second].times.push_back(t);
        data.processes[it->second].levels.push_back(x);
    }
    data.validate();
    return data;
}

DegradationObservations read_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::fail_validation("read_observations_csv", "cannot open " + path);
    return read_observations_csv(in);
}

void write_observations_csv(std::ostream& out, const DegradationObservations& data) {
    out << "process_id,time,level\n";
    char buf[96];
    for (const auto& p : data.processes)
        for (std::size_t j = 0; j < p.times.size(); ++j) {
            // Full precision so a re-read file refits to the same estimate.
            std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(p.id), p.times[j],
                          p.levels[j]);
            out << buf;
        }
}

DegradationObservations simulate_observations(const GammaModel& model, int processes, double horizon, double dt,
                                              Rng& rng) {
    model.validate();
    detail::require(processes >= 1, "simulate_observations", "processes must be >= 1");
    detail::require(horizon > 0.0 && dt > 0.0 && dt <= horizon, "simulate_observations",
                    "requires 0 < dt <= horizon");
    const int steps = static_cast<int>(std::floor(horizon / dt + 1e-9));
    DegradationObservations data;
    for (int i = 0; i < processes; ++i) {
        ProcessObservations p;
        p.id = i + 1;
        const ScaleRealization scale = realize_scale(model, rng);
        double level = 0.0;
        p.times.push_back(0.0);
        p.levels.push_back(0.0);
        for (int j = 1; j <= steps; ++j) {
            level += sample_increment(scale, model.shape_rate, dt, rng);
            p.times.push_back(j * dt);
            p.levels.push_back(level);
        }
        data.processes.push_back(std::move(p));
    }
    return data;
}

double log_likelihood(double shape_rate, double a, double b, const DegradationObservations& data) {
    const char* where = "log_likelihood";
    if (!(shape_rate > 0.0)) detail::fail_validation(where, "alpha must be > 0");
    if (!(a > 0.0) || !(b > a)) detail::fail_validation(where, "requires 0 < a < b");
    data.validate();
    double total = 0.0;
    for (const auto& p : data.processes) {
        for (std::size_t j = 1; j < p.times.size(); ++j) {
            const double dt = p.times[j] - p.times[j - 1];
            const double dx = p.levels[j] - p.levels[j - 1];
            if (!(dx > 0.0))
                detail::fail_validation(where, "process " + std::to_string(p.id) + ": zero increment");
            const double shape = shape_rate * dt;
            total += (shape - 1.0) * std::log(dx) - log_gamma(shape);
        }
        const double tau = p.times.back() - p.times.front();
        const double s = p.levels.back() - p.levels.front();
        const double at = shape_rate * tau;
        total += -std::log(b - a) + (1.0 - at) * std::log(s) + log_incomplete_gamma_difference(at - 1.0, s / b, s / a);
    }
    return total;
}

HalfWidthFit fit_half_width(double shape_rate, double center, const DegradationObservations& data,
                            const std::vector<double>& grid, bool refine) {
    const char* where = "fit_half_width";
    detail::require(!grid.empty(), where, "empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        detail::require(grid[i] > 0.0 && grid[i] < center, where, "grid must lie in (0, center)");
        if (i > 0) detail::require(grid[i] > grid[i - 1], where, "grid must be increasing");
    }
    data.validate();
    auto nll = [&](double w) {
        try {
            const double v = -log_likelihood(shape_rate, center - w, center + w, data);
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    HalfWidthFit fit;
    fit.grid = grid;
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fit.curve.push_back(nll(grid[i]));
        if (fit.curve[i] < fit.curve[best]) best = i;
    }
    if (!std::isfinite(fit.curve[best])) detail::fail_numerical(where, "likelihood is infinite on the whole grid");
    fit.half_width = grid[best];
    fit.neg_log_likelihood = fit.curve[best];
    fit.interior_minimum = grid.size() >= 3 && best > 0 && best + 1 < grid.size();
    if (!refine || grid.size() < 2) return fit;

    // Golden section between the neighbours of the grid minimum.
    double lo = grid[best > 0 ? best - 1 : 0];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = nll(x1), f2 = nll(x2);
    for (int iter = 0; iter < 80 && hi - lo > 1e-7 * std::max(1.0, hi); ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = nll(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = nll(x2);
        }
    }
    const double x = 0.5 * (lo + hi);
    const double fx = nll(x);
    if (fx < fit.neg_log_likelihood) {
        fit.half_width = x;
        fit.neg_log_likelihood = fx;
    }
    return fit;
}

}  // namespace cbm
