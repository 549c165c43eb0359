#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sfse/assembly.hpp"
#include "sfse/error.hpp"
#include "sfse/perturbation.hpp"
#include "sfse/spectra.hpp"
#include "test_helpers.hpp"

using namespace sfse;
using std::numbers::pi;

namespace {

const cplx I{0.0, 1.0};

// Real-space plane wave e^{ikn} phi on every cell.
Vector plane_wave(const Vector& phi, const Momentum& p, int L) {
    const int w = static_cast<int>(phi.size());
    Vector v(w * L);
    for (int n = 1; n <= L; ++n) v.segment((n - 1) * w, w) = std::exp(I * (p.k * n)) * phi;
    return v;
}

cplx sandwich(const BandState& bra, const BandState& ket, const ImpuritySpec& spec,
              const HoppingSet& h, int L) {
    const Matrix imp = Matrix(assemble_impurity(spec, h, L));
    return plane_wave(bra.left, bra.momentum, L).dot(imp * plane_wave(ket.right, ket.momentum, L));
}

BandState hn_state(const HoppingSet& h, int m, int L) { return band_eigensystem(h, Momentum::of(m, L)).front(); }

ImpuritySpec coupling(const HoppingSet& h, double mu_r, double mu_l) {
    return expand(NamedImpurity{BoundaryCoupling{mu_r, mu_l}}, h);
}

// |C / (beta dE/dbeta)| per unit impurity strength for the HN chain.
double coupling_ratio(double t_r, double t_l, double k) {
    const cplx e = std::exp(I * k);
    return std::abs((t_r / e + t_l * e) / (-t_r / e + t_l * e));
}

double onsite_ratio(double t_r, double t_l, double k) {
    const cplx e = std::exp(I * k);
    return 1.0 / std::abs(-t_r / e + t_l * e);
}

template <class F>
double grid_min(F f, int points = 200000) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) best = std::min(best, f(2 * pi * (i + 0.5) / points));
    return best;
}

}  // namespace

TEST_CASE("HN boundary coupling C has the two-exponential form") {
    const double t_r = 2.0, t_l = 1.0;
    const auto h = HoppingSet::hatano_nelson(t_r, t_l);
    const double mu_r = 0.3, mu_l = -0.7;
    const int L = 12;
    for (int m = 1; m <= L; ++m) {
        const auto s = hn_state(h, m, L);
        const double k = s.momentum.k;
        const cplx expected = mu_r * t_r * std::exp(-I * k) + mu_l * t_l * std::exp(I * k);
        CHECK(std::abs(first_order_C(s, coupling(h, mu_r, mu_l), L) - expected) < 1e-13);
    }
}

TEST_CASE("HN onsite C equals V and empty impurity gives zero") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    const auto onsite = expand(NamedImpurity{Onsite{-0.5}}, h);
    for (int m = 1; m <= 9; ++m) {
        const auto s = hn_state(h, m, 9);
        CHECK(std::abs(first_order_C(s, onsite, 9) - (-0.5)) < 1e-14);
        CHECK(first_order_C(s, ImpuritySpec{}, 9) == cplx(0.0));
    }
}

TEST_CASE("C does not depend on the ring length") {
    std::mt19937 rng(21);
    const auto h = sfse::testing::random_hopping(rng, 2);
    const auto spec = coupling(h, 0.4, -0.2);
    const auto onsite = expand(NamedImpurity{Onsite{0.8}}, h);
    const int L = 10;
    for (int m = 1; m <= L; ++m) {
        const auto a = band_eigensystem(h, Momentum::of(m, L));
        const auto b = band_eigensystem(h, Momentum::of(2 * m, 2 * L));
        for (std::size_t p = 0; p < a.size(); ++p) {
            CHECK(std::abs(first_order_C(a[p], spec, L) - first_order_C(b[p], spec, 2 * L)) < 1e-12);
            CHECK(std::abs(first_order_C(a[p], onsite, L) - first_order_C(b[p], onsite, 2 * L)) < 1e-12);
        }
    }
}

TEST_CASE("coupling elements match real-space plane-wave sandwiches") {
    std::mt19937 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 1 + trial % 3;
        const int L = 6 + trial;
        const auto h = sfse::testing::random_hopping(rng, w);
        ImpuritySpec spec;
        spec.boundary_depth = 2;
        spec.entries.push_back({1, 0, sfse::testing::random_matrix(rng, w, w)});
        spec.entries.push_back({-1, 2, sfse::testing::random_matrix(rng, w, w)});
        spec.entries.push_back({2, 1, sfse::testing::random_matrix(rng, w, w)});
        const auto bands = band_structure(h, L);
        for (int i : {0, 2, L - 1})
            for (int j : {1, 3, L - 2})
                for (const auto& bra : bands.by_momentum[i])
                    for (const auto& ket : bands.by_momentum[j])
                        CHECK(std::abs(coupling_element(bra, ket, spec, L) - sandwich(bra, ket, spec, h, L)) <
                              1e-11);
    }
}

TEST_CASE("plane waves are eigenvectors of the ring") {
    std::mt19937 rng(34);
    const auto h = sfse::testing::random_hopping(rng, 2);
    const int L = 8;
    const Matrix H = assemble_pbc(h, L);
    for (const auto& at_k : band_structure(h, L).by_momentum)
        for (const auto& s : at_k) {
            const Vector v = plane_wave(s.right, s.momentum, L);
            CHECK((H * v - s.energy * v).norm() < 1e-11);
        }
}

TEST_CASE("C is rejected for states from another ring") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    CHECK_THROWS_AS(first_order_C(hn_state(h, 1, 10), coupling(h, 0.1, 0.1), 12), DomainError);
    ImpuritySpec deep;
    deep.entries.push_back({4, 4, Matrix::Constant(1, 1, 1.0)});
    CHECK_THROWS_AS(first_order_C(hn_state(h, 1, 10), deep, 10), DomainError);
}

TEST_CASE("A + iB at k = pi/2 for mu = 1/4, m = 2") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    const int L = 100;
    const auto r = ab_coefficients(hn_state(h, 25, L), coupling(h, 0.25, 0.25), h, L);
    CHECK(r.A == doctest::Approx(-1.0 / 12).epsilon(1e-12));
    CHECK(std::abs(r.B) < 1e-13);
    CHECK(r.valid);
    CHECK_FALSE(r.marginal);
    CHECK(r.side() == Side::left);
    // A + iB = C / (beta dE/dbeta) with the derivative worked out by hand.
    const cplx beta = I;
    CHECK(std::abs(cplx(r.A, r.B) - r.C / (beta * (-2.0 / (beta * beta) + 1.0))) < 1e-13);

    const auto closed = hn_coupling_ab(0.25, 2.0, pi / 2);
    CHECK(closed.A == doctest::Approx(-1.0 / 12).epsilon(1e-12));
    CHECK(std::abs(closed.B) < 1e-15);
}

TEST_CASE("zero impurity gives A = B = 0") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    const auto r = ab_coefficients(hn_state(h, 3, 10), coupling(h, 0.0, 0.0), h, 10);
    CHECK(r.A == 0.0);
    CHECK(r.B == 0.0);
    CHECK(r.valid);
    CHECK(r.side() == Side::extended);
    CHECK(hn_coupling_ab(0.0, 3.0, 0.4).A == 0.0);
    CHECK(hn_onsite_ab(0.0, 1.0, 2.0, 0.4).B == 0.0);
}

TEST_CASE("Hermitian band extrema raise band_extremum") {
    const auto h = HoppingSet::hatano_nelson(1.0, 1.0);
    const auto spec = expand(NamedImpurity{Onsite{0.2}}, h);
    const int L = 8;
    for (int m : {4, 8}) {  // k = pi, 2 pi
        try {
            (void)ab_coefficients(hn_state(h, m, L), spec, h, L);
            FAIL("expected band extremum");
        } catch (const NumericalError& e) {
            CHECK(e.failure() == NumericalFailure::band_extremum);
        }
    }
    CHECK_NOTHROW(ab_coefficients(hn_state(h, 1, L), spec, h, L));
}

TEST_CASE("predicted_beta") {
    PerturbationResult r;
    r.momentum = Momentum::of(3, 12);
    r.valid = true;
    CHECK(predicted_beta(r, 50) == r.momentum.beta);

    r.A = -1.0 / 12;
    CHECK(std::abs(std::abs(predicted_beta(r, 100)) - (1.0 - 1.0 / 1200)) < 1e-7);

    r.A = 0.3;
    r.B = 0.4;
    const double d100 = std::abs(std::abs(predicted_beta(r, 100)) - std::exp(0.3 / 100));
    const double d200 = std::abs(std::abs(predicted_beta(r, 200)) - std::exp(0.3 / 200));
    CHECK(d100 < 1e-4);
    CHECK(d100 / d200 == doctest::Approx(4.0).epsilon(0.05));

    r.A = 1.2;
    r.valid = false;
    CHECK_THROWS_AS(predicted_beta(r, 100), ValidityError);
    CHECK(std::abs(predicted_beta(r, 100, Extrapolation::allow) - r.momentum.beta * cplx(1.012, 0.004)) < 1e-15);
}

TEST_CASE("predicted_beta is consistent with the shifted energy") {
    const double t_r = 2.0, t_l = 1.0;
    const auto h = HoppingSet::hatano_nelson(t_r, t_l);
    auto worst = [&](int L) {
        const auto spec = coupling(h, 0.25, 0.25);
        double out = 0.0;
        for (const auto& p : first_order_table(band_structure(h, L), spec, h)) {
            const cplx beta = predicted_beta(*p.result, L);
            out = std::max(out, std::abs(t_r / beta + t_l * beta - p.shifted_energy(L)));
        }
        return out;
    };
    const double e100 = worst(100), e200 = worst(200);
    CHECK(e100 < 1e-3);
    CHECK(e100 / e200 >= 3.5);
    CHECK(e100 / e200 <= 4.5);
}

TEST_CASE("coupling closed form symmetries") {
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> mu_dist(-2.0, 2.0), m_dist(0.1, 5.0), k_dist(0.0, 2 * pi);
    for (int i = 0; i < 500; ++i) {
        const double mu = mu_dist(rng), m = m_dist(rng), k = k_dist(rng);
        if (std::abs(m - 1.0) < 1e-3) continue;
        const auto a = hn_coupling_ab(mu, m, k);
        CHECK(hn_coupling_ab(-mu, m, k).A == -a.A);
        CHECK(hn_coupling_ab(-mu, m, k).B == -a.B);
        CHECK(hn_coupling_ab(mu, 1.0 / m, k).A == doctest::Approx(-a.A).epsilon(1e-12).scale(1.0));
    }
    CHECK_THROWS_AS(hn_coupling_ab(0.1, 1.0, 0.0), NumericalError);
    CHECK_THROWS_AS(hn_coupling_ab(0.1, -1.0, 0.3), DomainError);
}

TEST_CASE("validity bounds") {
    CHECK(hn_coupling_bound(2.0) == 1.0 / 3);
    CHECK(hn_coupling_bound(0.5) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(hn_coupling_bound(1.0) == 0.0);
    CHECK(hn_coupling_bound(1.0 + 1e-6) < 1e-6);
    CHECK(hn_onsite_bound(1.0, 2.0) == 1.0);
    CHECK(hn_onsite_bound(1.5, 1.5) == 0.0);
    CHECK(hn_onsite_bound(0.0, 3.0) == 3.0);

    for (double m : {2.0, 0.5, 3.0, 0.2}) {
        const double oracle = grid_min([&](double k) { return 1.0 / coupling_ratio(m, 1.0, k); });
        CHECK(std::abs(hn_coupling_bound(m) - oracle) < 1e-6);
    }
    for (auto [t_l, t_r] : {std::pair{1.0, 2.0}, std::pair{0.0, 3.0}, std::pair{2.5, 0.5}}) {
        const double oracle = grid_min([&](double k) { return 1.0 / onsite_ratio(t_r, t_l, k); });
        CHECK(std::abs(hn_onsite_bound(t_l, t_r) - oracle) < 1e-6);
    }
}

TEST_CASE("onsite closed form") {
    const double V = 0.7;
    const auto a = hn_onsite_ab(V, 1.0, 2.0, pi / 2);
    CHECK(std::abs(a.A) < 1e-15);
    CHECK(a.B == doctest::Approx(-V / 3).epsilon(1e-14));
    for (double k : {0.3, 1.0, 2.0, 4.0}) CHECK(hn_onsite_ab(0.4, 1.3, 1.3, k).A == 0.0);
    CHECK_THROWS_AS(hn_onsite_ab(0.4, 1.0, 1.0, 0.0), NumericalError);
}

TEST_CASE("closed forms agree with the generic machinery") {
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> mu_dist(-1.0, 1.0), t_dist(0.2, 3.0), u(0.0, 1.0);
    std::uniform_int_distribution<int> L_dist(3, 200);
    for (int i = 0; i < 1000; ++i) {
        const double t_l = t_dist(rng);
        const double m = u(rng) < 0.5 ? 0.2 + 0.6 * u(rng) : 1.25 + 3.75 * u(rng);
        const double t_r = m * t_l;
        const int L = L_dist(rng);
        const int mi = std::uniform_int_distribution<int>(1, L)(rng);
        const auto h = HoppingSet::hatano_nelson(t_r, t_l);
        const auto s = hn_state(h, mi, L);
        const double mu = mu_dist(rng);
        const auto generic = ab_coefficients(s, coupling(h, mu, mu), h, L);
        const auto closed = hn_coupling_ab(mu, m, s.momentum.k);
        CHECK(std::abs(generic.A - closed.A) < 1e-12);
        CHECK(std::abs(generic.B - closed.B) < 1e-12);

        const double V = mu_dist(rng);
        const auto g2 = ab_coefficients(s, expand(NamedImpurity{Onsite{V}}, h), h, L);
        const auto c2 = hn_onsite_ab(V, t_l, t_r, s.momentum.k);
        CHECK(std::abs(g2.A - c2.A) < 1e-12);
        CHECK(std::abs(g2.B - c2.B) < 1e-12);
    }
}

TEST_CASE("validity disk holds below the bound") {
    std::mt19937 rng(66);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double m = u(rng) < 0.5 ? 0.1 + 0.8 * u(rng) : 1.1 + 5 * u(rng);
        const double mu = (2 * u(rng) - 1) * 0.999 * hn_coupling_bound(m);
        for (int i = 0; i < 10000; ++i) {
            const auto ab = hn_coupling_ab(mu, m, 2 * pi * (i + 0.5) / 10000);
            CHECK(ab.A * ab.A + ab.B * ab.B < 1.0);
        }
    }
}

TEST_CASE("summarize_validity") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    const auto bands = band_structure(h, 40);
    auto summary = [&](double mu) { return summarize_validity(first_order_table(bands, coupling(h, mu, mu), h)); };
    const auto in = summary(0.25);
    CHECK(in.verdict == Verdict::inside);
    CHECK(in.all_valid);
    CHECK(in.max_modulus == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(summary(1.0 / 3).verdict == Verdict::marginal);
    const auto out = summary(0.5);
    CHECK(out.verdict == Verdict::outside);
    CHECK_FALSE(out.all_valid);
    CHECK(std::string(to_string(out.verdict)) == "outside");

    const auto herm = HoppingSet::hatano_nelson(1.0, 1.0);
    const auto s = summarize_validity(
        first_order_table(band_structure(herm, 40), expand(NamedImpurity{Onsite{0.1}}, herm), herm));
    CHECK(s.singular_points == 2);
    CHECK_FALSE(s.all_valid);
}

TEST_CASE("second-order shift vanishes without an impurity") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    for (const auto& row : second_order_shift(band_structure(h, 20), ImpuritySpec{}))
        for (const auto& v : row) CHECK(v == cplx(0.0));
}

TEST_CASE("second-order shift matches a direct sum") {
    const double t_r = 2.0, t_l = 1.0, mu = 0.25;
    const auto h = HoppingSet::hatano_nelson(t_r, t_l);
    const int L = 100;
    const auto shifts = second_order_shift(band_structure(h, L), coupling(h, mu, mu));
    auto E = [&](double k) { return t_r * std::exp(-I * k) + t_l * std::exp(I * k); };
    auto C = [&](double k, double kp) { return mu * t_r * std::exp(-I * k) + mu * t_l * std::exp(I * kp); };
    for (int m : {1, 7, 25, 60}) {
        const double k = 2 * pi * m / L;
        cplx oracle = 0.0;
        for (int j = 1; j <= L; ++j) {
            if (j == m) continue;
            const double kp = 2 * pi * j / L;
            oracle += C(k, kp) * C(kp, k) / (E(k) - E(kp));
        }
        oracle /= static_cast<double>(L) * L;
        CHECK(std::abs(shifts[m - 1][0] - oracle) < 1e-13);
    }
    const double first = std::abs(C(pi / 2, pi / 2)) / L;
    CHECK(std::abs(shifts[24][0]) < first);
}

TEST_CASE("second-order shift scales as 1/L") {
    const auto h = HoppingSet::hatano_nelson(2.0, 1.0);
    const auto spec = coupling(h, 0.25, 0.25);
    const auto s200 = second_order_shift(band_structure(h, 200), spec)[49][0];
    const auto s400 = second_order_shift(band_structure(h, 400), spec)[99][0];
    const double ratio = std::abs(s200) / std::abs(s400);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
}

TEST_CASE("second-order shift refuses degenerate denominators") {
    const auto h = HoppingSet::hatano_nelson(1.0, 1.0);
    try {
        (void)second_order_shift(band_structure(h, 10), coupling(h, 0.1, 0.1));
        FAIL("expected degenerate crossing");
    } catch (const NumericalError& e) {
        CHECK(e.failure() == NumericalFailure::degenerate_crossing);
    }
}

TEST_CASE("interband second-order terms match plane-wave sandwiches") {
    std::mt19937 rng(77);
    const auto h = sfse::testing::random_hopping(rng, 2);
    const int L = 7;
    const auto spec = coupling(h, 0.3, 0.1);
    const auto bands = band_structure(h, L);
    const auto intra = second_order_shift(bands, spec, SecondOrderTerms::intra_band);
    const auto full = second_order_shift(bands, spec, SecondOrderTerms::intra_and_inter_band);
    for (int i = 0; i < L; ++i)
        for (std::size_t p = 0; p < 2; ++p) {
            const auto& s = bands.by_momentum[i][p];
            cplx same = 0.0, all = 0.0;
            for (int j = 0; j < L; ++j)
                for (const auto& o : bands.by_momentum[j]) {
                    if (j == i && o.band == s.band) continue;
                    const cplx term =
                        sandwich(s, o, spec, h, L) * sandwich(o, s, spec, h, L) / (s.energy - o.energy);
                    all += term;
                    if (o.band == s.band) same += term;
                }
            const double norm = static_cast<double>(L) * L;
            CHECK(std::abs(intra[i][p] - same / norm) < 1e-11);
            CHECK(std::abs(full[i][p] - all / norm) < 1e-11);
        }
}
