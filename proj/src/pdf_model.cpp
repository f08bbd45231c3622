#include "pdf_impl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace asymerr {

using detail::PdfImpl;

double MomentTriple::skewness() const { return gamma / std::pow(V, 1.5); }

const std::vector<PdfFamily>& all_pdf_families() {
    static const std::vector<PdfFamily> all = {
        PdfFamily::Dimidiated, PdfFamily::Distorted, PdfFamily::Railway,
        PdfFamily::DoubleCubic, PdfFamily::SymmetricBeta, PdfFamily::QVW,
        PdfFamily::Fechner, PdfFamily::Edgeworth, PdfFamily::SkewNormal,
        PdfFamily::JohnsonSU, PdfFamily::LogNormal};
    return all;
}

std::string pdf_family_name(PdfFamily f) {
    switch (f) {
    case PdfFamily::Dimidiated: return "dimidiated";
    case PdfFamily::Distorted: return "distorted";
    case PdfFamily::Railway: return "railway";
    case PdfFamily::DoubleCubic: return "double-cubic";
    case PdfFamily::SymmetricBeta: return "symmetric-beta";
    case PdfFamily::QVW: return "qvw";
    case PdfFamily::Fechner: return "fechner";
    case PdfFamily::Edgeworth: return "edgeworth";
    case PdfFamily::SkewNormal: return "skew-normal";
    case PdfFamily::JohnsonSU: return "johnson-su";
    case PdfFamily::LogNormal: return "log-normal";
    }
    return "unknown";
}

std::optional<PdfFamily> parse_pdf_family(const std::string& name) {
    std::string n;
    for (char c : name) {
        if (c == '_' || c == ' ') c = '-';
        n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    for (auto f : all_pdf_families())
        if (pdf_family_name(f) == n) return f;
    if (n == "split-normal" || n == "split-gaussian") return PdfFamily::Dimidiated;
    if (n == "johnson") return PdfFamily::JohnsonSU;
    if (n == "lognormal") return PdfFamily::LogNormal;
    if (n == "skewnormal") return PdfFamily::SkewNormal;
    return std::nullopt;
}

PdfModel::PdfModel(std::shared_ptr<const PdfImpl> impl) : impl_(std::move(impl)) {}
PdfFamily PdfModel::family() const { return impl_->family(); }
std::vector<double> PdfModel::params() const { return impl_->params(); }
std::vector<std::string> PdfModel::param_names() const { return impl_->param_names(); }
const QuantileTriple& PdfModel::quantiles() const { return impl_->cached_quantiles(); }
const MomentTriple& PdfModel::moments() const { return impl_->cached_moments(); }
double PdfModel::density(double x) const { return impl_->density(x); }
double PdfModel::cdf(double x) const { return impl_->cdf(x); }
double PdfModel::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::Domain, "quantile", "p must lie in (0,1)");
    return impl_->quantile(p);
}
double PdfModel::sample(RandomSource& rs) const { return impl_->sample(rs); }
std::pair<double, double> PdfModel::support() const { return impl_->support(); }
bool PdfModel::goes_negative() const { return impl_->goes_negative(); }
const std::string& PdfModel::warning() const { return impl_->warning(); }

namespace detail {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8g", x);
    return buf;
}

PdfModel finish(std::shared_ptr<PdfImpl> impl) {
    impl->finalize();
    return PdfModel(std::move(impl));
}

void PdfImpl::finalize() {
    q_ = compute_quantiles();
    m_ = compute_moments();
}

double PdfImpl::quantile(double p) const {
    const auto [slo, shi] = support();
    const double c = center_hint();
    const double w = width_hint();
    double lo = c, hi = c;
    for (double step = w; cdf(lo) > p; step *= 2) {
        lo = c - step;
        if (lo <= slo) {
            lo = slo;
            break;
        }
        if (step > 1e300) fail(ErrorCode::NonConvergent, "quantile", "no lower bracket");
    }
    for (double step = w; cdf(hi) < p; step *= 2) {
        hi = c + step;
        if (hi >= shi) {
            hi = shi;
            break;
        }
        if (step > 1e300) fail(ErrorCode::NonConvergent, "quantile", "no upper bracket");
    }
    if (lo == hi) return lo;
    return find_root([&](double x) { return cdf(x) - p; }, lo, hi, 1e-15).value;
}

double PdfImpl::sample(RandomSource& rs) const {
    double u = rs.next_uniform();
    while (u <= 0.0) u = rs.next_uniform();
    return quantile(u);
}

QuantileTriple PdfImpl::compute_quantiles() const {
    const double M = quantile(0.5);
    return {M, quantile(kUpperLevel) - M, M - quantile(kLowerLevel)};
}

// ---- transform machinery ----

void TransformImpl::build_segments() {
    std::vector<double> b = breakpoints();
    b.push_back(-kNuLimit);
    b.push_back(kNuLimit);
    std::erase_if(b, [](double v) { return !(v >= -kNuLimit && v <= kNuLimit); });
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    segments_.clear();
    monotone_ = true;
    int first_dir = 0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        Segment s{b[i], b[i + 1], R(b[i]), R(b[i + 1]), 0};
        if (s.rhi > s.rlo) s.dir = 1;
        else if (s.rhi < s.rlo) s.dir = -1;
        if (s.dir != 0) {
            if (first_dir == 0) first_dir = s.dir;
            else if (s.dir != first_dir) monotone_ = false;
        }
        segments_.push_back(s);
    }
    if (first_dir < 0) monotone_ = false;
}

double TransformImpl::width_hint() const {
    const double w = std::abs(R(1.0) - R(-1.0)) / 2;
    return w > 0 ? w : 1.0;
}

double TransformImpl::solve_in(const Segment& s, double x) const {
    auto f = [&](double nu) { return R(nu) - x; };
    return find_root(f, s.lo, s.hi, 1e-15).value;
}

double TransformImpl::density(double x) const {
    double d = 0.0;
    for (const auto& s : segments_) {
        if (s.dir == 0) continue;
        const double lo = std::min(s.rlo, s.rhi), hi = std::max(s.rlo, s.rhi);
        if (x < lo || x > hi) continue;
        // a root exactly on a shared end is counted by one segment only
        if (x == (s.dir > 0 ? s.rhi : s.rlo) && s.hi < kNuLimit) continue;
        const double nu = solve_in(s, x);
        const double j = std::abs(dR(nu));
        if (j > 0) d += gauss_pdf(nu) / j;
        else return kInf;
    }
    return d;
}

double TransformImpl::cdf(double x) const {
    if (monotone_) {
        // single increasing branch
        if (x <= segments_.front().rlo) return 0.0;
        if (x >= segments_.back().rhi) return 1.0;
        for (const auto& s : segments_) {
            if (s.dir == 0 || x > s.rhi) continue;
            return gauss_cdf(solve_in(s, x));
        }
        return 1.0;
    }
    double c = 0.0;
    for (const auto& s : segments_) {
        if (s.dir == 0) {
            if (s.rlo <= x) c += gauss_cdf(s.hi) - gauss_cdf(s.lo);
            continue;
        }
        const double lo = std::min(s.rlo, s.rhi), hi = std::max(s.rlo, s.rhi);
        if (x >= hi) {
            c += gauss_cdf(s.hi) - gauss_cdf(s.lo);
        } else if (x > lo) {
            const double nu = solve_in(s, x);
            c += s.dir > 0 ? gauss_cdf(nu) - gauss_cdf(s.lo) : gauss_cdf(s.hi) - gauss_cdf(nu);
        }
    }
    return std::clamp(c, 0.0, 1.0);
}

double TransformImpl::quantile(double p) const {
    if (monotone_) return R(gauss_quantile(p));
    return PdfImpl::quantile(p);
}

double TransformImpl::sample(RandomSource& rs) const { return R(rs.next_gaussian()); }

std::pair<double, double> TransformImpl::support() const {
    double lo = kInf, hi = -kInf;
    for (const auto& s : segments_) {
        lo = std::min({lo, s.rlo, s.rhi});
        hi = std::max({hi, s.rlo, s.rhi});
    }
    // ends of the nu range stand for infinity unless R is flat there
    const auto& f = segments_.front();
    const auto& b = segments_.back();
    if (f.dir > 0) lo = -kInf;
    if (f.dir < 0) hi = kInf;
    if (b.dir > 0) hi = kInf;
    if (b.dir < 0) lo = -kInf;
    return {lo, hi};
}

MomentTriple TransformImpl::compute_moments() const {
    constexpr double cut = 13.0;
    std::vector<double> pts{-cut, cut};
    for (double v : breakpoints())
        if (v > -cut && v < cut) pts.push_back(v);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return b - a < 1e-9; }),
              pts.end());
    auto piecewise = [&](auto&& g) {
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            sum += integrate(g, pts[i], pts[i + 1], 1e-12, 1e-16);
        return sum;
    };
    const double mu = piecewise([&](double nu) { return R(nu) * gauss_pdf(nu); });
    const double V = piecewise([&](double nu) {
        const double d = R(nu) - mu;
        return d * d * gauss_pdf(nu);
    });
    const double g = piecewise([&](double nu) {
        const double d = R(nu) - mu;
        return d * d * d * gauss_pdf(nu);
    });
    return {mu, V, g};
}

QuantileTriple TransformImpl::compute_quantiles() const {
    const double M = R(0.0);
    return {M, R(1.0) - M, M - R(-1.0)};
}

} // namespace detail

// ---- construction dispatch ----

namespace {

using namespace detail;

void check_triple(const QuantileTriple& q) {
    if (!std::isfinite(q.M) || !std::isfinite(q.sigma_plus) || !std::isfinite(q.sigma_minus))
        fail(ErrorCode::InvalidArgument, "pdf_from_quantiles", "non-finite input");
    if (!(q.sigma_plus > 0) || !(q.sigma_minus > 0))
        fail(ErrorCode::InvalidArgument, "pdf_from_quantiles",
             "sigma_plus and sigma_minus must be positive");
}

void check_moments(const MomentTriple& m) {
    if (!std::isfinite(m.mu) || !std::isfinite(m.V) || !std::isfinite(m.gamma))
        fail(ErrorCode::InvalidArgument, "pdf_from_moments", "non-finite input");
    if (!(m.V > 0)) fail(ErrorCode::InvalidArgument, "pdf_from_moments", "variance must be positive");
}

void check_shape(const ShapeOptions& o) {
    if (o.beta_p < 1 || o.beta_p > 20)
        fail(ErrorCode::InvalidArgument, "shape_options", "symmetric beta p must be in 1..20");
    if (!(o.beta_h >= 0.1 && o.beta_h <= 10))
        fail(ErrorCode::InvalidArgument, "shape_options", "symmetric beta h must be in [0.1,10]");
    for (auto h : {o.railway_hl, o.railway_hr})
        if (h && !(*h >= 0.1 && *h <= 10))
            fail(ErrorCode::InvalidArgument, "shape_options", "railway h must be in [0.1,10]");
}

PdfModel anchored(PdfFamily family, double M, double sp, double sm, const ShapeOptions& o) {
    const double a = (sp + sm) / 2, b = (sp - sm) / 2;
    switch (family) {
    case PdfFamily::Dimidiated: return make_dimidiated(M, sp, sm);
    case PdfFamily::Distorted: return make_distorted(M, a, b);
    case PdfFamily::Railway: return make_railway(M, a, b, o.railway_hl, o.railway_hr);
    case PdfFamily::DoubleCubic: return make_double_cubic(M, sp, sm);
    case PdfFamily::SymmetricBeta: return make_symmetric_beta(M, sp, sm, o.beta_p, o.beta_h);
    default: break;
    }
    fail(ErrorCode::InvalidArgument, "pdf_from_anchors",
         pdf_family_name(family) + " is not a transform family");
}

// Standard shape with anchors (1+A, 1-A) around 0.
MomentTriple shape_moments(PdfFamily family, double A, const ShapeOptions& o) {
    return anchored(family, 0.0, 1 + A, 1 - A, o).moments();
}

double shape_skew(PdfFamily family, double A, const ShapeOptions& o) {
    return shape_moments(family, A, o).skewness();
}

constexpr double kShapeEdge = 1.0 - 1e-9;

PdfModel transform_from_moments(PdfFamily family, const MomentTriple& m, const ShapeOptions& o) {
    const double s = m.skewness();
    double A = 0.0;
    if (s != 0.0) {
        // scan for the first crossing, then refine
        auto f = [&](double x) { return shape_skew(family, x, o) - std::abs(s); };
        constexpr int n = 40;
        double prev_x = 0.0, prev_f = -std::abs(s);
        bool found = false;
        for (int i = 1; i <= n; ++i) {
            const double x = kShapeEdge * i / n;
            const double fx = f(x);
            if (fx >= 0) {
                A = find_root(f, prev_x, x, 1e-13).value;
                found = true;
                break;
            }
            prev_x = x;
            prev_f = fx;
        }
        (void)prev_f;
        if (!found)
            fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
                 pdf_family_name(family) + " skewness " + fmt(s) + " beyond bound " +
                     fmt(max_skewness(family, o)));
        if (s < 0) A = -A;
    }
    const MomentTriple base = shape_moments(family, A, o);
    const double c = std::sqrt(m.V / base.V);
    return anchored(family, m.mu - c * base.mu, c * (1 + A), c * (1 - A), o);
}

PdfModel dimidiated_from_moments(const MomentTriple& m) {
    const double V = m.V, g = m.gamma;
    const double pi = std::numbers::pi;
    const double s = m.skewness();
    const double smax = dimidiated_max_skewness();
    std::string warn;
    double D;
    const double dmax = std::sqrt(2 * V / (1 - 1 / pi));
    if (std::abs(s) > smax * (1 + 1e-12)) {
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "dimidiated skewness " + fmt(s) + " beyond bound " + fmt(smax));
    } else if (std::abs(s) >= smax * (1 - 1e-12)) {
        D = std::copysign(dmax, g);
        warn = "skewness at the dimidiated limit; one half-width is zero";
    } else {
        auto roots = solve_cubic_real(5 / pi - 2, 0.0, 6 * V, -2 * std::sqrt(2 * pi) * g);
        std::erase_if(roots, [&](double r) { return r * r > dmax * dmax * (1 + 1e-12); });
        if (roots.empty())
            fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
                 "dimidiated skewness " + fmt(s) + " beyond bound " + fmt(smax));
        D = *std::min_element(roots.begin(), roots.end(),
                              [](double a, double b) { return std::abs(a) < std::abs(b); });
    }
    const double S = 2 * V + D * D / pi;
    const double root = std::sqrt(std::max(0.0, 2 * S - D * D));
    const double sp = 0.5 * (root + D);
    const double sm = std::max(0.0, 0.5 * (root - D));
    const double M = m.mu - D / std::sqrt(2 * pi);
    return make_dimidiated(M, std::max(0.0, sp), sm, warn);
}

PdfModel distorted_from_moments(const MomentTriple& m) {
    const double V = m.V, g = m.gamma;
    const double bmax = std::sqrt(V / 2);
    const double gmax = 2 * bmax * (3 * V - 2 * bmax * bmax);
    double b = 0.0;
    if (std::abs(g) > gmax * (1 + 1e-12))
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "distorted skewness " + fmt(m.skewness()) + " beyond bound " + fmt(2 * std::sqrt(2.0)));
    if (g != 0.0) {
        if (std::abs(g) >= gmax) b = bmax;
        else b = find_root([&](double x) { return 2 * x * (3 * V - 2 * x * x) - std::abs(g); },
                           0.0, bmax, 1e-15).value;
        b = std::copysign(b, g);
    }
    const double a = std::sqrt(std::max(0.0, V - 2 * b * b));
    return make_distorted(m.mu - b, a, b);
}

PdfModel qvw_from_moments(const MomentTriple& m) {
    const double s = m.skewness();
    const double amax = qvw_max_a();
    const double smax = qvw_skewness(amax);
    if (std::abs(s) >= smax)
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "qvw skewness " + fmt(s) + " beyond bound " + fmt(smax));
    double a = 0.0;
    if (s != 0.0)
        a = std::copysign(find_root([&](double x) { return qvw_skewness(x) - std::abs(s); }, 0.0,
                                    amax, 1e-15).value, s);
    // unit sigma0 moments, then scale
    const auto unit = make_qvw(0.0, 1.0, a).moments();
    const double s0 = std::sqrt(m.V / unit.V);
    return make_qvw(m.mu - s0 * unit.mu, s0, a);
}

} // namespace

PdfModel pdf_from_quantiles(PdfFamily family, const QuantileTriple& q, const ShapeOptions& opts) {
    check_triple(q);
    check_shape(opts);
    switch (family) {
    case PdfFamily::Dimidiated:
    case PdfFamily::Distorted:
    case PdfFamily::Railway:
    case PdfFamily::DoubleCubic:
    case PdfFamily::SymmetricBeta:
        return anchored(family, q.M, q.sigma_plus, q.sigma_minus, opts);
    case PdfFamily::QVW: {
        const double A = (q.sigma_plus - q.sigma_minus) / (q.sigma_plus + q.sigma_minus);
        const double c = gauss_cdf(1.0) - 0.5;
        const double a = A / c;
        if (std::abs(a) >= qvw_max_a())
            fail(ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles",
                 "qvw asymmetry " + fmt(A) + " beyond bound " + fmt(qvw_max_a() * c));
        return make_qvw(q.M, (q.sigma_plus + q.sigma_minus) / 2, a);
    }
    case PdfFamily::Fechner: return fechner_from_quantiles(q);
    case PdfFamily::Edgeworth: return edgeworth_from_quantiles(q);
    case PdfFamily::SkewNormal: return skew_normal_from_quantiles(q);
    case PdfFamily::JohnsonSU: return johnson_from_quantiles(q);
    case PdfFamily::LogNormal: return log_normal_from_quantiles(q);
    }
    fail(ErrorCode::InvalidArgument, "pdf_from_quantiles", "unknown family");
}

PdfModel pdf_from_moments(PdfFamily family, const MomentTriple& m, const ShapeOptions& opts) {
    check_moments(m);
    check_shape(opts);
    switch (family) {
    case PdfFamily::Dimidiated: return dimidiated_from_moments(m);
    case PdfFamily::Distorted: return distorted_from_moments(m);
    case PdfFamily::Railway:
    case PdfFamily::DoubleCubic:
    case PdfFamily::SymmetricBeta: return transform_from_moments(family, m, opts);
    case PdfFamily::QVW: return qvw_from_moments(m);
    case PdfFamily::Fechner: return fechner_from_moments(m);
    case PdfFamily::Edgeworth: return edgeworth_from_moments(m);
    case PdfFamily::SkewNormal: return skew_normal_from_moments(m);
    case PdfFamily::JohnsonSU: return johnson_from_moments(m);
    case PdfFamily::LogNormal: return log_normal_from_moments(m);
    }
    fail(ErrorCode::InvalidArgument, "pdf_from_moments", "unknown family");
}

PdfModel pdf_from_anchors(PdfFamily family, double M, double sigma_plus, double sigma_minus,
                          const ShapeOptions& opts) {
    if (!std::isfinite(M) || !std::isfinite(sigma_plus) || !std::isfinite(sigma_minus))
        fail(ErrorCode::InvalidArgument, "pdf_from_anchors", "non-finite input");
    check_shape(opts);
    if (family == PdfFamily::Dimidiated && (sigma_plus < 0 || sigma_minus < 0))
        fail(ErrorCode::InvalidArgument, "pdf_from_anchors",
             "dimidiated half-widths must be non-negative");
    if (sigma_plus == 0 && sigma_minus == 0)
        fail(ErrorCode::Degenerate, "pdf_from_anchors", "both half-widths zero");
    return anchored(family, M, sigma_plus, sigma_minus, opts);
}

MomentTriple flipped_moments(const FlippedSpec& fs) {
    if (!(fs.sigma1 >= 0) || !(fs.sigma2 >= 0))
        fail(ErrorCode::InvalidArgument, "flipped_moments", "sigma1 and sigma2 must be non-negative");
    if (fs.sigma1 == 0 && fs.sigma2 == 0)
        fail(ErrorCode::Degenerate, "flipped_moments", "sigma1 and sigma2 both zero");
    if (fs.direction != 1 && fs.direction != -1)
        fail(ErrorCode::InvalidArgument, "flipped_moments", "direction must be +1 or -1");
    const double pi = std::numbers::pi;
    const double s1 = fs.sigma1, s2 = fs.sigma2;
    const double t = (s1 + s2) / std::sqrt(2 * pi);
    const double q = (s1 * s1 + s2 * s2) / 2;
    const double mu = t;
    const double V = q - t * t;
    const double g = std::sqrt(2 / pi) * (s1 * s1 * s1 + s2 * s2 * s2) - 3 * q * t + 2 * t * t * t;
    const double d = fs.direction;
    return {fs.extreme + d * mu, V, d * g};
}

PdfModel flipped_to_dimidiated(const FlippedSpec& fs) {
    return pdf_from_moments(PdfFamily::Dimidiated, flipped_moments(fs));
}

namespace {

double transform_max_skew(PdfFamily f, const ShapeOptions& o) {
    return shape_skew(f, kShapeEdge, o);
}

} // namespace

double max_asymmetry(PdfFamily family, const ShapeOptions&) {
    switch (family) {
    case PdfFamily::Dimidiated:
    case PdfFamily::Distorted:
    case PdfFamily::Railway:
    case PdfFamily::SymmetricBeta:
    case PdfFamily::DoubleCubic:
    case PdfFamily::LogNormal: return 1.0;
    case PdfFamily::QVW: return qvw_max_a() * (gauss_cdf(1.0) - 0.5);
    case PdfFamily::Fechner:
    case PdfFamily::SkewNormal: return 0.21564027;
    case PdfFamily::Edgeworth: return edgeworth_max_asymmetry();
    case PdfFamily::JohnsonSU: return johnson_max_asymmetry();
    }
    return 0.0;
}

double max_skewness(PdfFamily family, const ShapeOptions& opts) {
    switch (family) {
    case PdfFamily::Dimidiated: return dimidiated_max_skewness();
    case PdfFamily::Distorted: return 2 * std::sqrt(2.0);
    case PdfFamily::Railway:
    case PdfFamily::DoubleCubic:
    case PdfFamily::SymmetricBeta: return transform_max_skew(family, opts);
    case PdfFamily::QVW: return qvw_skewness(qvw_max_a());
    case PdfFamily::Fechner:
    case PdfFamily::SkewNormal: {
        const double pi = std::numbers::pi;
        return std::sqrt(2.0) * (4 - pi) / std::pow(pi - 2, 1.5);
    }
    case PdfFamily::Edgeworth: return 3.0;
    case PdfFamily::JohnsonSU: return johnson_max_skewness();
    case PdfFamily::LogNormal: return kInf;
    }
    return 0.0;
}

} // namespace asymerr
