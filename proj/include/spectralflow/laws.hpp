#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spectralflow {

// Scaled semicircle: density sqrt(4d^2 - x^2) / (2 pi d^2) on [-2d, 2d],
// i.e. p_sc(x/d)/d for the unit law p_sc(x) = sqrt(4-x^2)/(2 pi).
struct SemicircleLaw {
    double d = 1.0;
    explicit SemicircleLaw(double d_);
};

// Marchenko-Pastur with aspect ratio c and entry scale sigma: continuous
// density sqrt((b-x)(x-a)) / (2 pi sigma^2 c x) on [a,b],
// a = sigma^2 (1-sqrt(c))^2, b = sigma^2 (1+sqrt(c))^2, plus an atom of mass
// 1 - 1/c at zero when c > 1.
struct MarchenkoPasturLaw {
    double c = 1.0;
    double sigma = 1.0;
    MarchenkoPasturLaw(double c_, double sigma_);
    double lower() const;
    double upper() const;
    double atom_mass() const;
};

double sc_density(const SemicircleLaw& law, double x);
double sc_cdf(const SemicircleLaw& law, double x);
double sc_moment(const SemicircleLaw& law, int k);
double sc_quantile(const SemicircleLaw& law, double q);

double mp_density(const MarchenkoPasturLaw& law, double x);
double mp_cdf(const MarchenkoPasturLaw& law, double x);
double mp_quantile(const MarchenkoPasturLaw& law, double q);
double mp_mean(const MarchenkoPasturLaw& law);

using SpectralLaw = std::variant<SemicircleLaw, MarchenkoPasturLaw>;

double law_cdf(const SpectralLaw& law, double x);
double law_quantile(const SpectralLaw& law, double q);
double law_atom_mass(const SpectralLaw& law);
std::string law_tag(const SpectralLaw& law);

// |total mass - 1| by quadrature; self-check used by the invariants.
double law_normalization_gap(const SpectralLaw& law);

std::vector<double> law_sampler(const SpectralLaw& law, std::int64_t n, std::uint64_t seed);

// Law ids: "sc:<d>" and "mp:<c>:<sigma>", where <d>/<sigma> may be the token
// "auto" (resolved from moment estimates at each output time by the harness).
struct LawId {
    enum class Kind { semicircle, marchenko_pastur } kind;
    std::optional<double> d;      // semicircle scale (nullopt => auto)
    double c = 1.0;               // MP aspect
    std::optional<double> sigma;  // MP scale (nullopt => auto)
    std::string text;             // original id
};

LawId parse_law_id(const std::string& id);
SpectralLaw resolve_law(const LawId& id, double auto_scale);

}  // namespace spectralflow
