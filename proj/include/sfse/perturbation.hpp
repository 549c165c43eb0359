#pragma once

#include <optional>
#include <vector>

#include "sfse/assembly.hpp"
#include "sfse/lattice.hpp"

namespace sfse {

enum class Side { left, right, extended };

// First-order boundary-impurity correction of one PBC band state:
// E(k) -> E(k) + C / L, with A + iB = C / (beta_k dE/dbeta). The state
// becomes a scale-free mode with |beta~| ~ exp(A / L).
struct PerturbationResult {
    int band = 0;
    Momentum momentum;
    cplx energy;    // unperturbed E_p(beta_k)
    cplx C;         // L * <PhiL| H_imp |PhiR>
    cplx velocity;  // beta_k * dE_p/dbeta
    double A = 0.0;
    double B = 0.0;
    bool valid = false;     // |A + iB| < 1, strict
    bool marginal = false;  // |A + iB| in [0.95, 1.05]

    double modulus() const { return std::abs(cplx(A, B)); }
    double magnitude_exponent() const { return A; }
    Side side() const;
    cplx shifted_energy(int L) const { return energy + C / static_cast<double>(L); }
};

enum class Extrapolation { refuse, allow };

// L * <PhiL_{p,k}| H_imp |PhiR_{p',k'}> for plane-wave PBC states on the
// L-cell ring. Both states must carry momenta of that ring.
cplx coupling_element(const BandState& bra, const BandState& ket, const ImpuritySpec& spec, int L);

// C_{p,k}; throws DomainError when the state is not on the L-cell ring or
// the impurity is not boundary-local.
cplx first_order_C(const BandState& state, const ImpuritySpec& spec, int L);

// Throws NumericalError(band_extremum) where beta dE/dbeta vanishes.
PerturbationResult ab_coefficients(const BandState& state, const ImpuritySpec& spec,
                                   const HoppingSet& h, int L);

// beta_k (1 + (A + iB) / L). Refuses (ValidityError) outside the validity
// disk unless extrapolation is allowed.
cplx predicted_beta(const PerturbationResult& result, int L,
                    Extrapolation mode = Extrapolation::refuse);

// First-order data over the whole band structure. `result` is empty where
// the band velocity vanishes; C and the shifted energy are still defined.
struct FirstOrderPoint {
    BandState state;
    cplx C;
    std::optional<PerturbationResult> result;

    cplx shifted_energy(int L) const { return state.energy + C / static_cast<double>(L); }
};

std::vector<FirstOrderPoint> first_order_table(const BandStructure& bands,
                                                const ImpuritySpec& spec, const HoppingSet& h);

enum class Verdict { inside, marginal, outside };
const char* to_string(Verdict verdict);

struct ValiditySummary {
    double max_modulus = 0.0;  // over points with a defined ratio
    int singular_points = 0;   // band extrema, excluded from max_modulus
    bool all_valid = true;     // every point strictly inside, none singular
    Verdict verdict = Verdict::inside;
};

// inside: max < 0.95, marginal: [0.95, 1.05], outside: > 1.05. Band
// extrema are counted separately and do not enter the verdict.
ValiditySummary summarize_validity(const std::vector<FirstOrderPoint>& points);

struct AB {
    double A = 0.0;
    double B = 0.0;
};

// Hatano-Nelson chain, symmetric boundary coupling mu_r = mu_l = mu,
// t_r = m t_l.
AB hn_coupling_ab(double mu, double m, double k);
// Largest |mu| keeping every k inside the validity disk, (1-m)^2 / |1-m^2|;
// 0 in the Hermitian limit m = 1.
double hn_coupling_bound(double m);

// Hatano-Nelson chain with onsite V on cell 1.
AB hn_onsite_ab(double V, double t_l, double t_r, double k);
double hn_onsite_bound(double t_l, double t_r);

enum class SecondOrderTerms { intra_band, intra_and_inter_band };

// Second-order energy shift for every (k, band), indexed [m - 1][band].
// The intra-band sum runs over all k' != k; band labels follow the per-k
// (Re E, Im E) ordering of band_eigensystem. Throws NumericalError when
// two unperturbed energies in a denominator coincide.
std::vector<std::vector<cplx>> second_order_shift(const BandStructure& bands,
                                                  const ImpuritySpec& spec,
                                                  SecondOrderTerms terms = SecondOrderTerms::intra_band);

}  // namespace sfse
