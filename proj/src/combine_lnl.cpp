#include "asymerr/combine.hpp"

#include "asymerr/errors.hpp"
#include "lnl_impl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace asymerr {

namespace {

constexpr int kMaxIter = 200;

double sum_at(const std::vector<LnLCurve>& cs, double a) {
    double s = 0;
    for (const auto& c : cs) s += c.value(a);
    return s;
}

double sum_slope(const std::vector<LnLCurve>& cs, double a) {
    double s = 0;
    for (const auto& c : cs) s += c.slope(a);
    return s;
}

std::pair<double, double> common_domain(const std::vector<LnLCurve>& cs) {
    double lo = -kInf, hi = kInf;
    for (const auto& c : cs) {
        lo = std::max(lo, c.lower);
        hi = std::min(hi, c.upper);
    }
    return {lo, hi};
}

double argmax_sum(const std::vector<LnLCurve>& cs, double lo, double hi) {
    // beyond the outermost peaks every curve moves the same way
    double A = kInf, B = -kInf;
    for (const auto& c : cs) {
        A = std::min(A, c.peak);
        B = std::max(B, c.peak);
    }
    const double span = hi - lo;
    const double eps = std::isfinite(span) ? 1e-12 * span : 0.0;
    A = std::max(A, lo + eps);
    B = std::min(B, hi - eps);
    if (!(A <= B))
        fail(ErrorCode::NoMaximum, "combine_lnl_results",
             "the common domain holds none of the input peaks");
    if (A == B) return A;
    auto S = [&](double a) { return sum_at(cs, a); };
    constexpr int n = 64;
    int best = 0;
    double bv = -kInf;
    for (int i = 0; i <= n; ++i) {
        const double v = S(A + (B - A) * i / n);
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    const double a = A + (B - A) * std::max(best - 1, 0) / n;
    const double b = A + (B - A) * std::min(best + 1, n) / n;
    double x = maximize(S, a, b, 1e-10 * (B - A)).x;
    // polish on the slope
    auto d = [&](double t) { return sum_slope(cs, t); };
    const double h = 1e-6 * (B - A);
    const double l = std::max(a, x - h), r = std::min(b, x + h);
    if (d(l) > 0 && d(r) < 0) x = find_root(d, l, r, 1e-15).value;
    return x;
}

enum class Bartlett { None, Sigma, Variance };

Bartlett bartlett_kind(const std::vector<LnLModel>& ms) {
    auto all = [&](LnLFamily f) {
        return std::all_of(ms.begin(), ms.end(), [&](const LnLModel& m) { return m.family() == f; });
    };
    if (all(LnLFamily::LinearSigma)) return Bartlett::Sigma;
    if (all(LnLFamily::LinearVariance)) return Bartlett::Variance;
    return Bartlett::None;
}

struct FastResult {
    double a;
    std::vector<double> w;
    int iterations;
};

// a = sum w_i t_i / sum w_i, iterated; damped once steps start alternating
FastResult iterate_weights(const std::vector<LnLModel>& ms, Bartlett kind) {
    const std::size_t n = ms.size();
    std::vector<double> w(n), target(n);
    auto update = [&](double a) {
        double sw = 0, st = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = ms[i].params();
            const double x = a - ms[i].triple().a_hat;
            if (kind == Bartlett::Sigma) {
                const double d = p[0] + p[1] * x;
                w[i] = p[0] / (d * d * d);
                target[i] = ms[i].triple().a_hat;
            } else {
                const double d = p[0] + p[1] * x;
                w[i] = p[0] / (d * d);
                target[i] = ms[i].triple().a_hat - p[1] * x * x / (2 * p[0]);
            }
            sw += w[i];
            st += w[i] * target[i];
        }
        return st / sw;
    };
    double a = 0, sw = 0;
    for (const auto& m : ms) {
        const double s = 0.5 * (m.triple().sigma_plus + m.triple().sigma_minus);
        a += m.triple().a_hat / (s * s);
        sw += 1 / (s * s);
    }
    a /= sw;
    double damp = 1.0, last_step = 0;
    for (int k = 1; k <= kMaxIter; ++k) {
        const double next = update(a);
        const double step = next - a;
        if (step * last_step < 0) damp = 0.5;
        a += damp * step;
        last_step = step;
        if (std::abs(step) <= 1e-14 * (1 + std::abs(a))) {
            update(a);
            return {a, w, k};
        }
    }
    fail(ErrorCode::NonConvergent, "combine_lnl_results",
         "weight iteration did not settle in " + std::to_string(kMaxIter) + " steps");
}

LnLCombination finish(const std::vector<LnLCurve>& cs, double peak, double lo, double hi) {
    LnLCombination r;
    double scale = kInf;
    for (const auto& c : cs) scale = std::min(scale, c.scale);
    const auto S = [&](double a) { return sum_at(cs, a); };
    const auto d = solve_delta_half(S, peak, 0.25 * scale / std::sqrt(double(cs.size())), lo, hi);
    r.result = {peak, d.sigma_plus, d.sigma_minus};
    double at_own = 0;
    for (const auto& c : cs) at_own += c.value(c.peak);
    r.gof.chi2 = std::max(0.0, -2 * (S(peak) - at_own));
    return r;
}

void set_ndof(LnLCombination& r, std::size_t n, const LnLCombineOptions& opts) {
    r.gof.ndof = static_cast<int>(n) - opts.ndof_offset;
    r.gof.p_value = r.gof.ndof > 0 ? chi2_sf(r.gof.chi2, r.gof.ndof) : 1.0;
}

// w_i such that ln L_i'(a) = (a_i - a) w_i
std::vector<double> effective_weights(const std::vector<LnLCurve>& cs, double a) {
    std::vector<double> w;
    double sum = 0;
    for (const auto& c : cs) {
        const double x = a - c.peak;
        double wi;
        if (std::abs(x) > 1e-6 * c.scale) {
            wi = -c.slope(a) / x;
        } else {
            const double h = 1e-4 * c.scale;
            wi = -(c.slope(c.peak + h) - c.slope(c.peak - h)) / (2 * h);
        }
        w.push_back(wi);
        sum += wi;
    }
    for (auto& x : w) x /= sum;
    return w;
}

} // namespace

LnLCurve as_curve(const LnLModel& lm) {
    auto [lo, hi] = lm.domain();
    const auto& t = lm.triple();
    return {[lm](double a) { return lm(a); }, [lm](double a) { return lm.derivative(a); },
            lm.peak(), lo, hi, std::min(t.sigma_plus, t.sigma_minus)};
}

LnLCombination combine_lnl_results(const std::vector<LnLCurve>& inputs,
                                   const LnLCombineOptions& opts) {
    if (inputs.size() < 2)
        fail(ErrorCode::InvalidArgument, "combine_lnl_results", "need at least two results");
    auto [lo, hi] = common_domain(inputs);
    if (!(lo < hi))
        fail(ErrorCode::NoMaximum, "combine_lnl_results", "the input domains do not overlap");
    const double peak = argmax_sum(inputs, lo, hi);
    auto r = finish(inputs, peak, lo, hi);
    r.weights = effective_weights(inputs, peak);
    set_ndof(r, inputs.size(), opts);
    return r;
}

LnLCombination combine_lnl_results(const std::vector<LnLModel>& inputs,
                                   const LnLCombineOptions& opts) {
    if (inputs.size() < 2)
        fail(ErrorCode::InvalidArgument, "combine_lnl_results", "need at least two results");
    std::vector<LnLCurve> cs;
    for (const auto& m : inputs) cs.push_back(as_curve(m));
    const auto kind = bartlett_kind(inputs);
    if (!opts.fast_path || kind == Bartlett::None) return combine_lnl_results(cs, opts);

    auto [lo, hi] = common_domain(cs);
    if (!(lo < hi))
        fail(ErrorCode::NoMaximum, "combine_lnl_results", "the input domains do not overlap");
    const auto f = iterate_weights(inputs, kind);
    if (!(f.a > lo && f.a < hi))
        fail(ErrorCode::NoMaximum, "combine_lnl_results",
             "iteration settled at " + detail::fmt(f.a) + ", outside the common domain");
    auto r = finish(cs, f.a, lo, hi);
    double sw = 0;
    for (double w : f.w) sw += w;
    for (double w : f.w) r.weights.push_back(w / sw);
    r.fast_path = true;
    r.iterations = f.iterations;
    set_ndof(r, inputs.size(), opts);
    return r;
}

namespace {

struct Profiler {
    const std::vector<LnLTerm>& terms;
    std::vector<double> x; // current deviations from each peak
    double base = 0;

    explicit Profiler(const std::vector<LnLTerm>& t) : terms(t), x(t.size(), 0.0) {
        for (const auto& term : terms) base += term.curve.value(term.curve.peak);
    }

    double weight(std::size_t i, double xi) const {
        const auto& c = terms[i].curve;
        if (std::abs(xi) > 1e-9 * c.scale) return -xi / c.slope(c.peak + xi);
        const double h = 1e-4 * c.scale;
        return 2 * h / -(c.slope(c.peak + h) - c.slope(c.peak - h));
    }

    void check_domain(std::size_t i, double xi, double u) const {
        const auto& c = terms[i].curve;
        const double a = c.peak + xi;
        if (!(a > c.lower && a < c.upper))
            fail(ErrorCode::DomainExhausted, "combine_lnl_errors",
                 "input " + std::to_string(i) + " left its domain at u=" + detail::fmt(u) +
                     " before the profile dropped by 1/2");
    }

    // solve the weight equations at u starting from the stored x
    double at(double u) {
        const std::size_t n = terms.size();
        std::vector<double> next(n), last_step(n, 0.0);
        double damp = 1.0;
        for (int k = 0; k < kMaxIter; ++k) {
            double den = 0;
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = weight(i, x[i]);
                if (!(w[i] > 0) || !std::isfinite(w[i]))
                    fail(ErrorCode::DomainExhausted, "combine_lnl_errors",
                         "input " + std::to_string(i) + " has no usable slope at u=" + detail::fmt(u));
                const double c = terms[i].coefficient;
                den += c * c * w[i];
            }
            double change = 0, size = 0;
            bool flip = false;
            for (std::size_t i = 0; i < n; ++i) {
                next[i] = u * terms[i].coefficient * w[i] / den;
                const double step = next[i] - x[i];
                if (step * last_step[i] < 0) flip = true;
                last_step[i] = step;
                change = std::max(change, std::abs(step));
                size = std::max(size, terms[i].curve.scale + std::abs(x[i]));
            }
            if (flip) damp = 0.5;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += damp * (next[i] - x[i]);
                check_domain(i, x[i], u);
            }
            if (change <= 1e-14 * size) break;
            if (k == kMaxIter - 1)
                fail(ErrorCode::NonConvergent, "combine_lnl_errors",
                     "weight iteration did not settle at u=" + detail::fmt(u));
        }
        double v = 0;
        for (std::size_t i = 0; i < n; ++i) v += terms[i].curve.value(terms[i].curve.peak + x[i]);
        return v - base;
    }

    // walk out from u = 0 until the profile is below -1/2, then refine
    double side(int dir, double h, std::vector<ProfilePoint>& trace) {
        std::fill(x.begin(), x.end(), 0.0);
        double u_in = 0;
        std::vector<double> x_in = x;
        for (int k = 1;; ++k) {
            const double u = dir * k * h;
            const double v = at(u);
            trace.push_back({u, v});
            if (v < -0.5) break;
            u_in = u;
            x_in = x;
            if (k > 1000000)
                fail(ErrorCode::DomainExhausted, "combine_lnl_errors", "profile never drops by 1/2");
        }
        const double u_out = dir * (std::abs(u_in) + h);
        auto g = [&](double u) {
            // restart from the inner point, rescaled
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = u_in != 0 ? x_in[i] * u / u_in : 0.0;
            return at(u) + 0.5;
        };
        const double lo = std::min(u_in, u_out), hi = std::max(u_in, u_out);
        return std::abs(find_root(g, lo, hi, 1e-12 * h).value);
    }
};

} // namespace

LnLErrorCombination combine_lnl_errors(const std::vector<LnLTerm>& terms) {
    if (terms.size() < 2)
        fail(ErrorCode::InvalidArgument, "combine_lnl_errors", "need at least two terms");
    double h = kInf, value = 0;
    for (const auto& t : terms) {
        if (!std::isfinite(t.coefficient) || t.coefficient == 0)
            fail(ErrorCode::InvalidArgument, "combine_lnl_errors",
                 "coefficients must be finite and nonzero");
        h = std::min(h, 0.05 * std::abs(t.coefficient) * t.curve.scale);
        value += t.coefficient * t.curve.peak;
    }
    Profiler p(terms);
    LnLErrorCombination r;
    const double sp = p.side(+1, h, r.profile);
    const double sm = p.side(-1, h, r.profile);
    std::sort(r.profile.begin(), r.profile.end(),
              [](const ProfilePoint& a, const ProfilePoint& b) { return a.u < b.u; });
    r.result = {value, sp, sm};
    return r;
}

LnLErrorCombination combine_lnl_errors(const std::vector<LnLModel>& models,
                                       const std::vector<double>& coefficients) {
    if (models.size() != coefficients.size())
        fail(ErrorCode::InvalidArgument, "combine_lnl_errors",
             "one coefficient per model is needed");
    std::vector<LnLTerm> terms;
    for (std::size_t i = 0; i < models.size(); ++i)
        terms.push_back({as_curve(models[i]), coefficients[i]});
    return combine_lnl_errors(terms);
}

} // namespace asymerr
