#include "sfse/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sfse/error.hpp"

namespace sfse {

namespace {

constexpr int kMinWindowCells = 10;
// Squared relative amplitude 1e-12.
constexpr double kRelativeNoiseFloor = 1e-24;
constexpr int kEnvelopeBlock = 4;

double relative_spread(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (mean == 0.0) return sd == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return sd / std::abs(mean);
}

// sum n r^n / (L sum r^n), summed from the dominant end to stay finite.
double mean_position_direct(double r, int L) {
    double num = 0.0, den = 0.0, weight = 1.0;
    if (r <= 1.0) {
        for (int n = 1; n <= L; ++n) {
            weight *= r;
            num += n * weight;
            den += weight;
        }
    } else {
        const double inv = 1.0 / r;
        for (int n = L; n >= 1; --n) {
            num += n * weight;
            den += weight;
            weight *= inv;
        }
    }
    return num / (L * den);
}

// (1 - (1+L) r^L + L r^{L+1}) / (L (r - 1) (r^L - 1)) with r < 1.
double mean_position_geometric(double r, int L) {
    const double rL = std::pow(r, L);
    return (1.0 - (1.0 + L) * rL + L * rL * r) / (L * (r - 1.0) * (rL - 1.0));
}

// coth(A) - 1/A, odd in A.
double langevin(double A) {
    const double a = std::abs(A);
    double value;
    if (a < 0.1) {
        const double a2 = a * a;
        value = a * (1.0 / 3.0 + a2 * (-1.0 / 45.0 + a2 * (2.0 / 945.0 + a2 * (-1.0 / 4725.0))));
    } else {
        value = 1.0 / std::tanh(a) - 1.0 / a;
    }
    return std::copysign(value, A);
}

}  // namespace

std::vector<double> cell_weights(const Vector& state, int orbitals, int L) {
    if (orbitals < 1 || L < 1 || state.size() != static_cast<Index>(orbitals) * L)
        throw DomainError("state length does not match orbitals * L");
    std::vector<double> weights(static_cast<std::size_t>(L), 0.0);
    for (int n = 0; n < L; ++n)
        for (int q = 0; q < orbitals; ++q)
            weights[static_cast<std::size_t>(n)] += std::norm(state(static_cast<Index>(n) * orbitals + q));
    return weights;
}

double mean_position(const Vector& state, int orbitals, int L) {
    const auto weights = cell_weights(state, orbitals, L);
    double num = 0.0, den = 0.0;
    for (int n = 1; n <= L; ++n) {
        num += n * weights[static_cast<std::size_t>(n - 1)];
        den += weights[static_cast<std::size_t>(n - 1)];
    }
    if (!(den > 0.0)) throw DomainError("mean_position: zero state vector");
    return num / (L * den);
}

double mean_position_closed_form(double abs_beta, int L) {
    if (!(abs_beta > 0.0)) throw DomainError("mean_position_closed_form: |beta| must be positive");
    if (L < 1) throw DomainError("mean_position_closed_form: L must be positive");
    const double r = abs_beta * abs_beta;
    // The geometric closed form loses ~eps / (L (r-1))^2 to cancellation.
    if (L * std::abs(r - 1.0) < 0.1) return mean_position_direct(r, L);
    // Reflection n -> L + 1 - n maps r > 1 onto 1/r < 1 without overflow.
    if (r > 1.0) return (L + 1.0) / L - mean_position_geometric(1.0 / r, L);
    return mean_position_geometric(r, L);
}

double skin_limit(double abs_beta) {
    constexpr double tol = 1e-12;
    if (std::abs(abs_beta - 1.0) <= tol) return 0.5;
    return abs_beta < 1.0 ? 0.0 : 1.0;
}

double scale_free_limit(double A) {
    if (std::isinf(A)) return A > 0 ? 1.0 : 0.0;
    if (std::abs(A) < 1e-4) return 0.5 + A / 6.0;
    // Algebraically identical to the exponential form; see langevin().
    return 0.5 + 0.5 * langevin(A);
}

double fit_exponent(const Vector& state, int orbitals, int L, FitWindow window) {
    const auto weights = cell_weights(state, orbitals, L);
    const int lo = std::max(1, static_cast<int>(std::ceil(window.lo * L)));
    const int hi = std::min(L, static_cast<int>(std::floor(window.hi * L)));
    if (hi - lo + 1 < kMinWindowCells)
        throw DomainError("fit_exponent: window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] is shorter than 10 cells");
    // Upper envelope: the largest weight of each block of cells, so that
    // standing-wave nodes do not pull the slope. Blocks below the round-off
    // floor of the largest amplitude carry no profile information.
    const double noise = kRelativeNoiseFloor * *std::max_element(weights.begin(), weights.end());
    auto envelope = [&](int first, int last) {
        std::vector<std::pair<int, double>> points;
        for (int b = first; b + kEnvelopeBlock - 1 <= last; b += kEnvelopeBlock) {
            int peak = b;
            for (int n = b; n < b + kEnvelopeBlock; ++n)
                if (weights[static_cast<std::size_t>(n - 1)] > weights[static_cast<std::size_t>(peak - 1)]) peak = n;
            const double value = weights[static_cast<std::size_t>(peak - 1)];
            if (value > noise) points.emplace_back(peak, std::log(value));
        }
        return points;
    };
    auto points = envelope(lo, hi);
    if (static_cast<int>(points.size()) * kEnvelopeBlock < kMinWindowCells - kEnvelopeBlock + 1)
        points = envelope(1, L);
    if (points.size() < 2)
        throw NumericalError(NumericalFailure::no_convergence,
                             "fit_exponent: state has fewer than two envelope points above the round-off floor");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double count = static_cast<double>(points.size());
    for (const auto& [n, y] : points) {
        sx += n;
        sy += y;
        sxx += static_cast<double>(n) * n;
        sxy += n * y;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return 0.5 * slope * L;
}

ExponentFit fit_exponent(const std::map<int, Vector>& states, int orbitals, FitWindow window) {
    if (states.size() < 2) throw DomainError("fit_exponent: need at least two system sizes");
    ExponentFit fit;
    std::vector<double> per_cell;
    for (const auto& [L, state] : states) {
        const double a = fit_exponent(state, orbitals, L, window);
        fit.sizes.push_back(L);
        fit.exponents.push_back(a);
        per_cell.push_back(a / L);
    }
    fit.mean_exponent = std::accumulate(fit.exponents.begin(), fit.exponents.end(), 0.0) /
                        static_cast<double>(fit.exponents.size());
    fit.spread = relative_spread(fit.exponents);
    fit.per_cell_spread = relative_spread(per_cell);
    return fit;
}

const char* to_string(LocalizationClass cls) {
    switch (cls) {
        case LocalizationClass::extended: return "extended";
        case LocalizationClass::scale_free_left: return "scale-free-left";
        case LocalizationClass::scale_free_right: return "scale-free-right";
        case LocalizationClass::skin_left: return "skin-left";
        case LocalizationClass::skin_right: return "skin-right";
        case LocalizationClass::unclassified: return "unclassified";
    }
    return "unclassified";
}

LocalizationReport classify(int state_index, double mean_position_fraction, const ExponentFit& fit,
                            ClassifyThresholds thresholds) {
    LocalizationReport report;
    report.state_index = state_index;
    report.mean_position_fraction = mean_position_fraction;
    report.fitted_exponent = fit.mean_exponent;

    const bool small = std::all_of(fit.exponents.begin(), fit.exponents.end(),
                                   [&](double a) { return std::abs(a) < thresholds.extended; });
    const bool right = fit.mean_exponent > 0.0;
    if (small)
        report.cls = LocalizationClass::extended;
    else if (fit.spread < thresholds.spread && fit.spread <= fit.per_cell_spread)
        report.cls = right ? LocalizationClass::scale_free_right : LocalizationClass::scale_free_left;
    else if (fit.per_cell_spread < thresholds.spread)
        report.cls = right ? LocalizationClass::skin_right : LocalizationClass::skin_left;
    else
        report.cls = LocalizationClass::unclassified;
    return report;
}

double curve_collapse_deviation(const std::map<int, std::vector<double>>& curves) {
    auto sample = [](const std::vector<double>& curve, double x) {
        const double N = static_cast<double>(curve.size());
        const double pos = x * N - 0.5;  // fractional index
        if (pos <= 0.0) return curve.front();
        if (pos >= N - 1.0) return curve.back();
        const auto i = static_cast<std::size_t>(pos);
        const double t = pos - static_cast<double>(i);
        return (1.0 - t) * curve[i] + t * curve[i + 1];
    };
    double worst = 0.0;
    for (auto a = curves.begin(); a != curves.end(); ++a) {
        for (auto b = curves.begin(); b != curves.end(); ++b) {
            if (a == b) continue;
            const auto& ca = a->second;
            for (std::size_t n = 0; n < ca.size(); ++n) {
                const double x = (static_cast<double>(n) + 0.5) / static_cast<double>(ca.size());
                worst = std::max(worst, std::abs(ca[n] - sample(b->second, x)));
            }
        }
    }
    return worst;
}

}  // namespace sfse
