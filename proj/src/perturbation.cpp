#include "sfse/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sfse/error.hpp"

namespace sfse {

namespace {

constexpr double kExtremumTolerance = 1e-12;
constexpr double kDegeneracyTolerance = 1e-9;
constexpr double kSingularDenominator = 1e-14;
constexpr double kMarginalLow = 0.95;
constexpr double kMarginalHigh = 1.05;

void require_on_ring(const BandState& state, int L) {
    if (state.momentum.L != L)
        throw DomainError("band state momentum belongs to L = " + std::to_string(state.momentum.L) +
                          ", not L = " + std::to_string(L));
}

// exp(2 pi i n / L) with n reduced mod L first, so exp(i k L) == 1 exactly.
cplx ring_phase(long long n, int L) {
    const long long reduced = ((n % L) + L) % L;
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(reduced) / L);
}

}  // namespace

Side PerturbationResult::side() const {
    if (A < 0.0) return Side::left;
    if (A > 0.0) return Side::right;
    return Side::extended;
}

cplx coupling_element(const BandState& bra, const BandState& ket, const ImpuritySpec& spec, int L) {
    require_on_ring(bra, L);
    require_on_ring(ket, L);
    const int w = static_cast<int>(bra.right.size());
    cplx total = 0.0;
    for (const auto& entry : resolve_entries(spec, w, L)) {
        // <PhiL_k| has amplitude e^{-ikr} phiL^dag on cell r, |PhiR_k'> has e^{ik's} phiR.
        const long long winding =
            static_cast<long long>(ket.momentum.m) * entry.col_cell -
            static_cast<long long>(bra.momentum.m) * entry.row_cell;
        total += ring_phase(winding, L) * bra.left.dot(*entry.block * ket.right);
    }
    return total;
}

cplx first_order_C(const BandState& state, const ImpuritySpec& spec, int L) {
    return coupling_element(state, state, spec, L);
}

namespace {

std::optional<PerturbationResult> try_ab(const BandState& state, cplx C, const HoppingSet& h) {
    PerturbationResult result;
    result.band = state.band;
    result.momentum = state.momentum;
    result.energy = state.energy;
    result.C = C;
    result.velocity = state.momentum.beta * band_derivative(state, h);

    const double scale = h.h1().norm() + h.hm1().norm();
    if (!(std::abs(result.velocity) > kExtremumTolerance * scale)) return std::nullopt;

    const cplx ratio = C / result.velocity;
    result.A = ratio.real();
    result.B = ratio.imag();
    const double modulus = std::abs(ratio);
    result.valid = modulus < 1.0;
    result.marginal = modulus >= kMarginalLow && modulus <= kMarginalHigh;
    return result;
}

}  // namespace

PerturbationResult ab_coefficients(const BandState& state, const ImpuritySpec& spec,
                                   const HoppingSet& h, int L) {
    auto result = try_ab(state, first_order_C(state, spec, L), h);
    if (!result)
        throw NumericalError(NumericalFailure::band_extremum,
                             "band extremum at k = " + std::to_string(state.momentum.k) +
                                 " (band " + std::to_string(state.band) +
                                 "): beta dE/dbeta vanishes, validity ratio undefined");
    return *result;
}

cplx predicted_beta(const PerturbationResult& result, int L, Extrapolation mode) {
    if (L < 1) throw DomainError("predicted_beta: L must be positive");
    if (!result.valid && mode == Extrapolation::refuse)
        throw ValidityError("predicted_beta: |A + iB| = " + std::to_string(result.modulus()) +
                            " at k = " + std::to_string(result.momentum.k) +
                            " lies outside the perturbative regime");
    return result.momentum.beta * (1.0 + cplx(result.A, result.B) / static_cast<double>(L));
}

std::vector<FirstOrderPoint> first_order_table(const BandStructure& bands,
                                                const ImpuritySpec& spec, const HoppingSet& h) {
    std::vector<FirstOrderPoint> points;
    for (const auto& at_k : bands.by_momentum) {
        for (const auto& state : at_k) {
            FirstOrderPoint point;
            point.state = state;
            point.C = first_order_C(state, spec, bands.L);
            point.result = try_ab(state, point.C, h);
            points.push_back(std::move(point));
        }
    }
    return points;
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::inside: return "inside";
        case Verdict::marginal: return "marginal";
        case Verdict::outside: return "outside";
    }
    return "unknown";
}

ValiditySummary summarize_validity(const std::vector<FirstOrderPoint>& points) {
    ValiditySummary summary;
    for (const auto& point : points) {
        if (!point.result) {
            ++summary.singular_points;
            summary.all_valid = false;
            continue;
        }
        summary.max_modulus = std::max(summary.max_modulus, point.result->modulus());
        if (!point.result->valid) summary.all_valid = false;
    }
    if (summary.max_modulus < kMarginalLow)
        summary.verdict = Verdict::inside;
    else if (summary.max_modulus <= kMarginalHigh)
        summary.verdict = Verdict::marginal;
    else
        summary.verdict = Verdict::outside;
    return summary;
}

AB hn_coupling_ab(double mu, double m, double k) {
    if (!(m > 0.0)) throw DomainError("hn_coupling_ab: hopping ratio m must be positive");
    const double denominator = 1.0 + m * m - 2.0 * m * std::cos(2.0 * k);
    if (denominator < kSingularDenominator)
        throw NumericalError(NumericalFailure::singular_parameter,
                             "hn_coupling_ab: singular denominator (m = 1, cos 2k = 1)");
    return {mu * (1.0 - m * m) / denominator, mu * (-2.0 * m * std::sin(2.0 * k)) / denominator};
}

double hn_coupling_bound(double m) {
    if (!(m > 0.0)) throw DomainError("hn_coupling_bound: hopping ratio m must be positive");
    if (m == 1.0) return 0.0;
    return (1.0 - m) * (1.0 - m) / std::abs(1.0 - m * m);
}

AB hn_onsite_ab(double V, double t_l, double t_r, double k) {
    const double denominator = t_l * t_l + t_r * t_r - 2.0 * t_l * t_r * std::cos(2.0 * k);
    if (denominator < kSingularDenominator)
        throw NumericalError(NumericalFailure::singular_parameter,
                             "hn_onsite_ab: singular denominator (t_l = t_r, cos 2k = 1)");
    return {V * (t_l - t_r) * std::cos(k) / denominator,
            -V * (t_l + t_r) * std::sin(k) / denominator};
}

double hn_onsite_bound(double t_l, double t_r) { return std::abs(t_l - t_r); }

std::vector<std::vector<cplx>> second_order_shift(const BandStructure& bands,
                                                  const ImpuritySpec& spec, SecondOrderTerms terms) {
    const int L = bands.L;
    const auto nk = bands.by_momentum.size();

    double scale = 0.0;
    for (const auto& at_k : bands.by_momentum)
        for (const auto& s : at_k) scale = std::max(scale, std::abs(s.energy));
    if (scale == 0.0) scale = 1.0;

    std::vector<std::vector<cplx>> shifts(nk);
    if (spec.entries.empty()) {
        for (std::size_t i = 0; i < nk; ++i) shifts[i].assign(bands.by_momentum[i].size(), 0.0);
        return shifts;
    }

    for (std::size_t i = 0; i < nk; ++i) {
        for (const auto& state : bands.by_momentum[i]) {
            cplx sum = 0.0;
            for (std::size_t j = 0; j < nk; ++j) {
                for (const auto& other : bands.by_momentum[j]) {
                    const bool same_band = other.band == state.band;
                    if (same_band && i == j) continue;
                    if (!same_band && terms == SecondOrderTerms::intra_band) continue;
                    const cplx gap = state.energy - other.energy;
                    if (std::abs(gap) <= kDegeneracyTolerance * scale)
                        throw NumericalError(
                            NumericalFailure::degenerate_crossing,
                            "second_order_shift: degenerate unperturbed energies at k = " +
                                std::to_string(state.momentum.k) + " and k' = " +
                                std::to_string(other.momentum.k));
                    sum += coupling_element(state, other, spec, L) *
                           coupling_element(other, state, spec, L) / gap;
                }
            }
            shifts[i].push_back(sum / (static_cast<double>(L) * L));
        }
    }
    return shifts;
}

}  // namespace sfse
