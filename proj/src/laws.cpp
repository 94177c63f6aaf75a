#include "spectralflow/laws.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "spectralflow/rng.hpp"

namespace spectralflow {

namespace {

// Adaptive Simpson with absolute tolerance; integrands here are smooth.
double simpson(const std::function<double(double)>& f, double a, double m, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

double bisect_quantile(const std::function<double(double)>& cdf, double q, double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi) + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SemicircleLaw::SemicircleLaw(double d_) : d(d_) {
    if (!(d > 0.0)) throw std::domain_error("semicircle scale d must be positive");
}

MarchenkoPasturLaw::MarchenkoPasturLaw(double c_, double sigma_) : c(c_), sigma(sigma_) {
    if (!(c > 0.0) || !(sigma > 0.0)) throw std::domain_error("MP needs c > 0 and sigma > 0");
}

double MarchenkoPasturLaw::lower() const {
    const double r = 1.0 - std::sqrt(c);
    return sigma * sigma * r * r;
}

double MarchenkoPasturLaw::upper() const {
    const double r = 1.0 + std::sqrt(c);
    return sigma * sigma * r * r;
}

double MarchenkoPasturLaw::atom_mass() const { return c > 1.0 ? 1.0 - 1.0 / c : 0.0; }

double sc_density(const SemicircleLaw& law, double x) {
    const double d2 = law.d * law.d;
    const double rad = 4.0 * d2 - x * x;
    return rad > 0.0 ? std::sqrt(rad) / (2.0 * M_PI * d2) : 0.0;
}

double sc_cdf(const SemicircleLaw& law, double x) {
    const double y = x / law.d;  // scaling equivariance: F_d(x) = F_1(x/d)
    if (y <= -2.0) return 0.0;
    if (y >= 2.0) return 1.0;
    return 0.5 + (y * std::sqrt(4.0 - y * y) / 2.0 + 2.0 * std::asin(0.5 * y)) / (2.0 * M_PI);
}

double sc_moment(const SemicircleLaw& law, int k) {
    if (k < 0) throw std::domain_error("moment order must be nonnegative");
    if (k % 2 == 1) return 0.0;
    const int half = k / 2;
    double catalan = 1.0;  // C(2n,n)/(n+1) by the ratio recurrence
    for (int i = 0; i < half; ++i) catalan = catalan * 2.0 * (2.0 * i + 1.0) / (i + 2.0);
    return std::pow(law.d, k) * catalan;
}

double sc_quantile(const SemicircleLaw& law, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile level outside [0,1]");
    if (q == 0.0) return -2.0 * law.d;
    if (q == 1.0) return 2.0 * law.d;
    return bisect_quantile([&](double x) { return sc_cdf(law, x); }, q, -2.0 * law.d, 2.0 * law.d);
}

double mp_density(const MarchenkoPasturLaw& law, double x) {
    const double a = law.lower(), b = law.upper();
    if (x <= a || x >= b || x <= 0.0) return 0.0;
    return std::sqrt((b - x) * (x - a)) / (2.0 * M_PI * law.sigma * law.sigma * law.c * x);
}

double mp_cdf(const MarchenkoPasturLaw& law, double x) {
    const double atom = law.atom_mass();
    if (x < 0.0) return 0.0;
    const double a = law.lower(), b = law.upper();
    if (x < a) return atom;
    if (x >= b) return 1.0;
    // substitution x(phi) = a + (b-a) sin^2(phi) removes both sqrt endpoints
    const double s2c = law.sigma * law.sigma * law.c;
    const double phi_x = std::asin(std::sqrt(std::clamp((x - a) / (b - a), 0.0, 1.0)));
    const double mass = integrate(
        [&](double phi) {
            const double sp = std::sin(phi), cp = std::cos(phi);
            const double xx = a + (b - a) * sp * sp;
            return (b - a) * (b - a) * sp * sp * cp * cp / (M_PI * s2c * xx);
        },
        0.0, phi_x);
    return std::min(atom + mass, 1.0);
}

double mp_quantile(const MarchenkoPasturLaw& law, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile level outside [0,1]");
    const double atom = law.atom_mass();
    if (q <= atom) return 0.0;
    if (q == 1.0) return law.upper();
    return bisect_quantile([&](double x) { return mp_cdf(law, x); }, q, law.lower(), law.upper());
}

double mp_mean(const MarchenkoPasturLaw& law) { return law.sigma * law.sigma; }

double law_cdf(const SpectralLaw& law, double x) {
    return std::visit([&](const auto& l) {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, SemicircleLaw>)
            return sc_cdf(l, x);
        else
            return mp_cdf(l, x);
    }, law);
}

double law_quantile(const SpectralLaw& law, double q) {
    return std::visit([&](const auto& l) {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, SemicircleLaw>)
            return sc_quantile(l, q);
        else
            return mp_quantile(l, q);
    }, law);
}

double law_atom_mass(const SpectralLaw& law) {
    if (const auto* mp = std::get_if<MarchenkoPasturLaw>(&law)) return mp->atom_mass();
    return 0.0;
}

std::string law_tag(const SpectralLaw& law) {
    char buf[64];
    if (const auto* sc = std::get_if<SemicircleLaw>(&law)) {
        std::snprintf(buf, sizeof(buf), "sc:%.6g", sc->d);
    } else {
        const auto& mp = std::get<MarchenkoPasturLaw>(law);
        std::snprintf(buf, sizeof(buf), "mp:%.6g:%.6g", mp.c, mp.sigma);
    }
    return buf;
}

double law_normalization_gap(const SpectralLaw& law) {
    if (const auto* sc = std::get_if<SemicircleLaw>(&law)) {
        // x = 2d sin(t) turns the density into a smooth integrand
        const double d = sc->d;
        const double mass = integrate(
            [&](double t) { return sc_density(*sc, 2.0 * d * std::sin(t)) * 2.0 * d * std::cos(t); },
            -M_PI / 2.0, M_PI / 2.0);
        return std::abs(mass - 1.0);
    }
    const auto& mp = std::get<MarchenkoPasturLaw>(law);
    return std::abs(mp_cdf(mp, mp.upper()) - 1.0);
}

std::vector<double> law_sampler(const SpectralLaw& law, std::int64_t n, std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(n));
    rng::GaussianStream gs(seed, rng::stream_id(rng::StreamKind::law, 0, 0));
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = law_quantile(law, gs.next_uniform());
    return out;
}

LawId parse_law_id(const std::string& id) {
    LawId out;
    out.text = id;
    const auto parse_field = [&](const std::string& tok) -> std::optional<double> {
        if (tok == "auto") return std::nullopt;
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("bad number in law id: " + id);
        return v;
    };
    if (id.rfind("sc:", 0) == 0) {
        out.kind = LawId::Kind::semicircle;
        out.d = parse_field(id.substr(3));
        return out;
    }
    if (id.rfind("mp:", 0) == 0) {
        const auto rest = id.substr(3);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("mp law id needs mp:<c>:<sigma>");
        out.kind = LawId::Kind::marchenko_pastur;
        const auto c = parse_field(rest.substr(0, colon));
        if (!c) throw std::invalid_argument("mp aspect ratio cannot be auto");
        out.c = *c;
        out.sigma = parse_field(rest.substr(colon + 1));
        return out;
    }
    throw std::invalid_argument("unknown law id: " + id);
}

SpectralLaw resolve_law(const LawId& id, double auto_scale) {
    if (id.kind == LawId::Kind::semicircle) return SemicircleLaw(id.d.value_or(auto_scale));
    return MarchenkoPasturLaw(id.c, id.sigma.value_or(auto_scale));
}

}  // namespace spectralflow
