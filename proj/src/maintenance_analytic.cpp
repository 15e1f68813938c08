// Analytic cycle quantities.
//
// Paths are nondecreasing, so for one process {sigma_M > a, sigma_L > b} is
// {X(a) < M, X(b) < L}. With V and W the first M- and L-passages of the
// system, define
//   Psi(a, b) = P(V > a, W > b),  a <= b.
// A process arriving at r spoils this event with probability
//   p(r) = 1 - P(X(a - r) < M, X(b - r) < L)   (X of a negative time is 0),
// and the arrivals are Cox with intensity lambda0 + sum e^(-delta (r - S_i)),
// hence
//   Psi = exp(-lambda0 int_0^b p - mu int_0^b (1 - e^(-K(s))) ds),
//   K(s) = int_s^b e^(-delta (r - s)) p(r) dr.
// Over the interval (kT, tau], tau = (k+1)T,
//   P_p = Psi(kT, tau) - S_V(tau),  P_c = S_V(kT) - Psi(kT, tau),
//   E_d = int_kT^tau [S_V(kT) - Psi(kT, w)] dw.
// Under random effects p is the mixture over the scale of each process.
//
// The factorized form treats the M-to-L gap as independent of the first
// M-passage and the no-failure probability g(u, tau) as independent of V:
//   P_p = int f_V(u) G(tau - u) g(u, tau) du,
//   g = exp(-lambda0 int_u^tau F_M (1 - G(tau - v)) dv - mu int_0^tau (1 - e^(-J(s))) ds),
//   J(s) = int_max(s,u)^tau l(v - s) (1 - G(tau - v)) dv,  l = F_M - delta I_M.
// It is kept for comparison; both approximations bias P_p upward.
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "cbm/errors.hpp"
#include "cbm/maintenance.hpp"
#include "cbm/special_functions.hpp"

namespace cbm {
namespace {

struct Node {
    double x, w;
};

struct Panel {
    double lo, hi;
    std::vector<double> x, w, p;
};

class Engine {
  public:
    Engine(const SystemSpec& spec, const PolicyParams& policy, const AnalyticOptions& opt);
    AnalyticCycleQuantities run();

  private:
    void nodes(double a, double b, std::vector<Node>& out) const;
    void panels(double a, double b, std::vector<Panel>& out) const;
    double interpolate(const Panel& panel, double r) const;

    // P(X(x) < M, X(x + d) < L) for one scale.
    double joint_below(const GammaLaw& law, double x, double d) const;
    double spoil_probability(double r, double a, double b) const;
    double psi(double a, double b) const;

    void build_components();
    double preventive_factorized(double lo, double tau) const;
    double gap_survival(std::size_t c, double x) const {
        return x <= 0.0 ? 1.0 : std::clamp(gaps_[c](x), 0.0, 1.0);
    }
    double mixture_gap_survival(double x) const {
        double s = 0.0;
        for (std::size_t c = 0; c < laws_.size(); ++c) s += laws_[c].first * gap_survival(c, x);
        return s;
    }

    const SystemSpec& spec_;
    PolicyParams policy_;
    AnalyticOptions opt_;
    const GaussLegendre& rule_;
    std::vector<double> bary_;  // barycentric weights of the rule nodes on [-1, 1]
    std::vector<std::pair<double, GammaLaw>> laws_;
    std::unique_ptr<FirstPassageCurve> v_curve_;
    std::vector<std::unique_ptr<FirstPassageCurve>> curves_;  // factorized form only
    std::vector<HermiteTable> gaps_;
};

Engine::Engine(const SystemSpec& spec, const PolicyParams& policy, const AnalyticOptions& opt)
    : spec_(spec), policy_(policy), opt_(opt), rule_(gauss_legendre(opt.rule_order)) {
    const auto& x = rule_.nodes();
    bary_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double prod = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i) prod *= x[i] - x[j];
        bary_[i] = 1.0 / prod;
    }
    laws_ = scale_components(spec.growth, opt.scale_nodes);
}

void Engine::nodes(double a, double b, std::vector<Node>& out) const {
    out.clear();
    if (!(b > a)) return;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / opt_.panel_width - 1e-9)));
    const double h = (b - a) / n;
    const auto& x = rule_.nodes();
    const auto& w = rule_.weights();
    for (int p = 0; p < n; ++p) {
        const double c = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < x.size(); ++i) out.push_back({c + 0.5 * h * x[i], 0.5 * h * w[i]});
    }
}

void Engine::panels(double a, double b, std::vector<Panel>& out) const {
    if (!(b > a)) return;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / opt_.panel_width - 1e-9)));
    const double h = (b - a) / n;
    const auto& x = rule_.nodes();
    const auto& w = rule_.weights();
    for (int p = 0; p < n; ++p) {
        Panel panel{a + p * h, p + 1 == n ? b : a + (p + 1) * h, {}, {}, {}};
        const double c = 0.5 * (panel.lo + panel.hi), half = 0.5 * (panel.hi - panel.lo);
        for (std::size_t i = 0; i < x.size(); ++i) {
            panel.x.push_back(c + half * x[i]);
            panel.w.push_back(half * w[i]);
        }
        out.push_back(std::move(panel));
    }
}

double Engine::interpolate(const Panel& panel, double r) const {
    const double c = 0.5 * (panel.lo + panel.hi), half = 0.5 * (panel.hi - panel.lo);
    const double t = (r - c) / half;
    const auto& x = rule_.nodes();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = t - x[i];
        if (diff == 0.0) return panel.p[i];
        const double k = bary_[i] / diff;
        num += k * panel.p[i];
        den += k;
    }
    return num / den;
}

double Engine::joint_below(const GammaLaw& law, double x, double d) const {
    const double M = policy_.preventive_threshold;
    const double L = spec_.failure_threshold;
    const double below_l = d > 0.0 ? 1.0 - hitting_cdf(law, L, x + d) : 1.0 - hitting_cdf(law, L, x);
    if (x <= 0.0 || M >= L) return below_l;
    const double sx = law.shape_rate * x;
    if (d <= 0.0) return gamma_cdf(sx, law.rate, M);
    // Integration by parts of E[F_d(L - X(x)); X(x) < M] keeps the
    // integrand bounded when the shape at x is small.
    const double sd = law.shape_rate * d;
    auto f = [&](double y) { return gamma_cdf(sx, law.rate, y) * gamma_pdf(sd, law.rate, L - y); };
    QuadratureSpec qs;
    qs.abs_tol = 1e-13;
    qs.rel_tol = 1e-10;
    const double tail = integrate(f, 0.0, M, qs, "analytic_cycle_quantities: joint law of X(a), X(b)");
    return std::clamp(gamma_cdf(sx, law.rate, M) * gamma_cdf(sd, law.rate, L - M) + tail, 0.0, 1.0);
}

double Engine::spoil_probability(double r, double a, double b) const {
    double s = 0.0;
    for (const auto& [w, law] : laws_) s += w * joint_below(law, std::max(0.0, a - r), r < a ? b - a : b - r);
    return std::clamp(1.0 - s, 0.0, 1.0);
}

double Engine::psi(double a, double b) const {
    const double lambda0 = spec_.arrivals.lambda0;
    const double mu = spec_.arrivals.mu;
    const double delta = spec_.arrivals.delta;
    std::vector<Panel> ps;
    panels(0.0, a, ps);
    panels(a, b, ps);
    double base = 0.0;
    for (auto& panel : ps) {
        panel.p.resize(panel.x.size());
        for (std::size_t i = 0; i < panel.x.size(); ++i) {
            panel.p[i] = spoil_probability(panel.x[i], a, b);
            base += panel.w[i] * panel.p[i];
        }
    }
    double shot = 0.0;
    if (mu > 0.0) {
        // tail[j] = int from hi_j to b of e^(-delta (r - hi_j)) p(r) dr.
        const std::size_t n = ps.size();
        std::vector<double> tail(n, 0.0);
        for (std::size_t j = n; j-- > 1;) {
            double e = 0.0;
            for (std::size_t i = 0; i < ps[j].x.size(); ++i)
                e += ps[j].w[i] * std::exp(-delta * (ps[j].x[i] - ps[j].lo)) * ps[j].p[i];
            tail[j - 1] = e + std::exp(-delta * (ps[j].hi - ps[j].lo)) * tail[j];
        }
        std::vector<Node> part;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < ps[j].x.size(); ++i) {
                const double s = ps[j].x[i];
                double k = std::exp(-delta * (ps[j].hi - s)) * tail[j];
                nodes(s, ps[j].hi, part);
                for (const Node& r : part) k += r.w * std::exp(-delta * (r.x - s)) * interpolate(ps[j], r.x);
                shot += ps[j].w[i] * -std::expm1(-std::max(0.0, k));
            }
        }
    }
    return std::exp(-lambda0 * base - mu * shot);
}

void Engine::build_components() {
    const double T = policy_.inspection_period;
    const double M = policy_.preventive_threshold;
    const double L = spec_.failure_threshold;
    const double horizon = v_curve_->horizon();
    for (const auto& [w, law] : laws_) {
        (void)w;
        curves_.push_back(std::make_unique<FirstPassageCurve>(
            spec_.arrivals, [law, M](double t) { return t <= 0.0 ? 0.0 : hitting_cdf(law, M, t); }, horizon,
            opt_.curve_step));
        if (M < L) {
            GapSurvival gap(law, M, L);
            const int n = 160;
            std::vector<double> x(n + 1), y(n + 1);
            for (int i = 0; i <= n; ++i) {
                const double s = static_cast<double>(i) / n;
                x[i] = T * s * s;
                y[i] = i == 0 ? gap.at_zero_plus() : std::min(gap(x[i]), y[i - 1]);
            }
            gaps_.push_back(make_pchip(std::move(x), std::move(y)));
        } else {
            gaps_.push_back(HermiteTable({0.0, T}, {0.0, 0.0}, {0.0, 0.0}));
        }
    }
}

double Engine::preventive_factorized(double lo, double tau) const {
    if (!(tau > lo)) return 0.0;
    const double lambda0 = spec_.arrivals.lambda0;
    const double mu = spec_.arrivals.mu;
    auto mix_cdf = [&](double x) {
        double s = 0.0;
        for (std::size_t c = 0; c < laws_.size(); ++c) s += laws_[c].first * curves_[c]->cdf(x);
        return s;
    };
    auto mix_kernel = [&](double x) {
        double s = 0.0;
        for (std::size_t c = 0; c < laws_.size(); ++c) s += laws_[c].first * curves_[c]->displaced_kernel(x);
        return s;
    };
    auto mix_gap_cdf = [&](double x) { return x <= 0.0 ? 0.0 : 1.0 - mixture_gap_survival(x); };
    std::vector<Node> un, vn, sn;
    nodes(lo, tau, un);
    double total = 0.0;
    for (const Node& u : un) {
        nodes(u.x, tau, vn);
        double d1 = 0.0;
        for (const Node& v : vn) d1 += v.w * mix_cdf(v.x) * mix_gap_cdf(tau - v.x);
        double b = 0.0;
        if (mu > 0.0) {
            nodes(0.0, tau, sn);
            for (const Node& s : sn) {
                nodes(std::max(s.x, u.x), tau, vn);
                double j = 0.0;
                for (const Node& v : vn) j += v.w * mix_kernel(v.x - s.x) * mix_gap_cdf(tau - v.x);
                b += s.w * -std::expm1(-j);
            }
        }
        const double g = std::exp(-lambda0 * d1 - mu * b);
        total += u.w * v_curve_->density(u.x) * mixture_gap_survival(tau - u.x) * g;
    }
    return total;
}

AnalyticCycleQuantities Engine::run() {
    const double T = policy_.inspection_period;
    const double M = policy_.preventive_threshold;

    std::function<double(double)> mix_cdf = [laws = laws_, M](double t) {
        if (t <= 0.0) return 0.0;
        double s = 0.0;
        for (const auto& [w, law] : laws) s += w * hitting_cdf(law, M, t);
        return std::min(1.0, s);
    };
    v_curve_ = std::make_unique<FirstPassageCurve>(spec_.arrivals, mix_cdf, T, opt_.curve_step);
    AnalyticCycleQuantities q;
    int k_end = 0;
    for (;;) {
        v_curve_->extend_to((k_end + 1) * T);
        q.survival.push_back(v_curve_->survival(k_end * T));
        ++k_end;
        if (q.survival.back() < opt_.tol || k_end >= opt_.k_max) break;
    }
    const double horizon = k_end * T;
    if (opt_.form == PreventiveForm::factorized) build_components();

    double length = 0.0;
    for (int k = 0; k < k_end; ++k) length += q.survival[k];
    q.expected_length = T * length;
    q.expected_inspections = length;

    // P(V > lo, W > w) under the chosen form.
    auto survive = [&](double lo, double w) {
        if (opt_.form == PreventiveForm::exact) return psi(lo, w);
        return v_curve_->survival(w) + preventive_factorized(lo, w);
    };
    const GaussLegendre& outer = gauss_legendre(opt_.rule_order);
    for (int k = 0; k < k_end; ++k) {
        const double lo = k * T, tau = (k + 1) * T;
        const double s_lo = v_curve_->survival(lo);
        const double s_tau = v_curve_->survival(tau);
        const double both = std::clamp(survive(lo, tau), s_tau, s_lo);
        const double pp = both - s_tau;
        const double pc = s_lo - both;
        double ed = 0.0;
        if (pc > 0.0) {
            auto integrand = [&](double w) { return std::max(0.0, s_lo - survive(lo, w)); };
            ed = outer.integrate(integrand, lo, tau, opt_.downtime_nodes);
        }
        q.preventive.push_back(pp);
        q.corrective.push_back(pc);
        q.downtime.push_back(ed);
    }
    double mass = 0.0;
    for (int k = 0; k < k_end; ++k) mass += q.preventive[k] + q.corrective[k];
    q.truncation_deficit = std::max(0.0, 1.0 - mass);
    q.truncated_early = v_curve_->survival(horizon) >= opt_.tol;
    if (q.truncated_early && q.truncation_deficit > 10.0 * opt_.tol)
        detail::fail_numerical("analytic_cycle_quantities", "truncation deficit " +
                                                                 std::to_string(q.truncation_deficit) +
                                                                 " exceeds 10*tol at k_max; raise k_max");
    return q;
}

}  // namespace

AnalyticCycleQuantities analytic_cycle_quantities(const SystemSpec& spec, const PolicyParams& policy,
                                                  const AnalyticOptions& options) {
    spec.validate();
    policy.validate(spec.failure_threshold);
    detail::require(options.k_max >= 1 && options.tol > 0.0, "analytic_cycle_quantities",
                    "k_max >= 1 and tol > 0 required");
    detail::require(options.rule_order >= 2 && options.panel_width > 0.0 && options.downtime_nodes >= 1 &&
                        options.scale_nodes >= 1 && options.curve_step > 0.0,
                    "analytic_cycle_quantities", "invalid quadrature options");
    Engine engine(spec, policy, options);
    return engine.run();
}

double cost_rate_analytic(const CostRates& costs, const AnalyticCycleQuantities& q) {
    costs.validate();
    double pp = 0.0, pc = 0.0, ed = 0.0;
    for (std::size_t k = 0; k < q.preventive.size(); ++k) {
        pp += q.preventive[k];
        pc += q.corrective[k];
        ed += q.downtime[k];
    }
    return (costs.corrective * pc + costs.preventive * pp + costs.inspection * q.expected_inspections +
            costs.downtime * ed) /
           q.expected_length;
}

double cost_rate_analytic(const SystemSpec& spec, const PolicyParams& policy, const CostRates& costs,
                          const AnalyticOptions& options) {
    return cost_rate_analytic(costs, analytic_cycle_quantities(spec, policy, options));
}

}  // namespace cbm
