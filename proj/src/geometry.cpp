#include "soliton/geometry.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "soliton/errors.hpp"

namespace soliton {

std::string_view to_string(CollapsePattern p) {
    return p == CollapsePattern::SameEnd ? "same_end" : "opposite_end";
}

CollapsePattern collapse_pattern_from_string(std::string_view s) {
    if (s == "same_end") return CollapsePattern::SameEnd;
    if (s == "opposite_end") return CollapsePattern::OppositeEnd;
    throw LookupError("unknown collapse pattern '" + std::string(s) + "'");
}

void OrbitPreset::validate() const {
    if (d1 < 1 || d2 < 1) throw PreconditionError("preset '" + name + "': d1 and d2 must be >= 1");
    if (!(c_q > 0.0)) throw PreconditionError("preset '" + name + "': c_q must be positive");
    if (!(a2 >= 0.0)) throw PreconditionError("preset '" + name + "': a2 must be nonnegative");
    if (!(epsilon < 0.0)) throw PreconditionError("preset '" + name + "': epsilon must be negative");
}

RicciComponents ricci_components(const OrbitPreset& preset, double f, double h) {
    if (!(f > 0.0)) throw CollapseError(CollapseError::Factor::Fiber, "fiber scale f is not positive");
    if (!(h > 0.0)) throw CollapseError(CollapseError::Factor::Base, "base scale h is not positive");

    const double f2 = f * f;
    const double h2 = h * h;
    const double oneill = preset.a2 * f2 / (h2 * h2);
    RicciComponents r{
        (preset.d1 - 1) / f2 + (static_cast<double>(preset.d2) / preset.d1) * oneill,
        preset.c_q / h2 - 2.0 * oneill,
    };
    if (!std::isfinite(r.r1) || !std::isfinite(r.r2))
        throw CollapseError(CollapseError::Factor::Unknown, "non-finite Ricci curvature");
    return r;
}

OrbitCurvature scalar_and_volume(const OrbitPreset& preset, const SolitonState& s) {
    const auto [r1, r2] = ricci_components(preset, s.f, s.h);
    OrbitCurvature c{
        preset.d1 * r1 + preset.d2 * r2,
        preset.d1 * s.fdot / s.f + preset.d2 * s.hdot / s.h,
        std::pow(s.f, preset.d1) * std::pow(s.h, preset.d2),
    };
    if (!std::isfinite(c.S) || !std::isfinite(c.trL) || !std::isfinite(c.v) || !(c.v > 0.0))
        throw CollapseError(CollapseError::Factor::Unknown, "non-finite orbit curvature or volume");
    return c;
}

double default_epsilon(int n) { return -n / 50.0; }

namespace {

// Parses "name(k)" into k; returns -1 when the text is not of that form.
int family_index(std::string_view name, std::string_view family) {
    if (name.size() < family.size() + 3 || name.substr(0, family.size()) != family) return -1;
    if (name[family.size()] != '(' || name.back() != ')') return -1;
    const auto digits = name.substr(family.size() + 1, name.size() - family.size() - 2);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || k < 1) return -1;
    return k;
}

OrbitPreset make(std::string name, int d1, int d2, double c_q, double a2, CollapsePattern collapse,
                 double epsilon = 0.0) {
    OrbitPreset p{std::move(name), d1, d2, c_q, a2, epsilon, collapse};
    if (epsilon == 0.0) p.epsilon = default_epsilon(p.n());
    return p;
}

}  // namespace

OrbitPreset preset_catalog(std::string_view name) {
    using enum CollapsePattern;
    // U(2)-invariant metrics on CP^2 # -CP^2. The base constant is taken as 4
    // with |A|^2 = 1, the pairing under which the Page metric closes at hbar ~ 0.96.
    if (name == "cp2") return make("cp2", 1, 2, 4.0, 1.0, SameEnd, -7.46562);
    if (name == "s5") return make("s5", 2, 2, 1.0, 0.0, OppositeEnd, -0.08);
    if (name == "s2xs3") return make("s2xs3", 2, 2, 1.0, 0.0, SameEnd, -0.08);
    // R^3 x S^2 with the Gaussian soliton at hbar = 0.5, ubar = -1.5.
    if (name == "s2xs2") return make("s2xs2", 2, 2, 1.0, 0.0, SameEnd, -8.0);
    if (name == "s11") return make("s11", 5, 5, 4.0, 0.0, OppositeEnd);
    if (name == "cap2") return make("cap2", 7, 8, 28.0, 7.0, SameEnd);
    if (const int k = family_index(name, "hp"); k > 0)
        return make(std::string(name), 3, 4 * k, 4.0 * k + 8.0, 3.0, SameEnd);
    if (const int k = family_index(name, "f"); k > 0)
        return make(std::string(name), 2, 4 * k, 4.0 * k + 8.0, 8.0, SameEnd);
    throw LookupError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
    return {"cp2", "s5", "s2xs3", "s2xs2", "s11", "hp(1)", "f(1)", "cap2"};
}

void to_json(nlohmann::json& j, const OrbitPreset& p) {
    j = nlohmann::json{{"name", p.name},  {"d1", p.d1},          {"d2", p.d2},
                       {"c_q", p.c_q},    {"a2", p.a2},          {"epsilon", p.epsilon},
                       {"collapse", std::string(to_string(p.collapse))}};
}

void from_json(const nlohmann::json& j, OrbitPreset& p) {
    // A bare name or a partial object on top of a catalog entry.
    if (j.is_string()) {
        p = preset_catalog(j.get<std::string>());
        return;
    }
    if (j.contains("name")) {
        const auto name = j.at("name").get<std::string>();
        try {
            p = preset_catalog(name);
        } catch (const LookupError&) {
            p.name = name;
        }
    }
    if (j.contains("d1")) j.at("d1").get_to(p.d1);
    if (j.contains("d2")) j.at("d2").get_to(p.d2);
    if (j.contains("c_q")) j.at("c_q").get_to(p.c_q);
    if (j.contains("a2")) j.at("a2").get_to(p.a2);
    if (j.contains("epsilon")) j.at("epsilon").get_to(p.epsilon);
    if (j.contains("collapse")) p.collapse = collapse_pattern_from_string(j.at("collapse").get<std::string>());
}

}  // namespace soliton
