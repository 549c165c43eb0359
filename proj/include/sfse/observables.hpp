#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfse/types.hpp"

namespace sfse {

// Weight of cell n is sum_q |psi_{n,q}|^2; orbitals carry no position.
std::vector<double> cell_weights(const Vector& state, int orbitals, int L);

// <x> / L with x = 1..L. Throws DomainError for a zero vector or a size
// that is not orbitals * L.
double mean_position(const Vector& state, int orbitals, int L);

// <x> / L of a pure exponential psi_n = beta^n with |beta| = abs_beta.
double mean_position_closed_form(double abs_beta, int L);

// L -> infinity limit for a size-independent |beta|: 0, 1/2 or 1.
double skin_limit(double abs_beta);

// L -> infinity limit for |beta| = exp(A / L):
// (1 + (2A - 1) e^{2A}) / (2A (e^{2A} - 1)), equal to 1/2 at A = 0.
double scale_free_limit(double A);

struct FitWindow {
    double lo = 0.2;
    double hi = 0.8;
};

// A_hat such that |beta_eff| = exp(A_hat / L): least-squares slope of the
// log upper envelope of the cell weights over the window, times L / 2. The
// envelope takes the largest weight in each block of 4 cells; blocks below
// 1e-24 of the maximum weight are dropped, and the whole chain is used when
// too few window blocks survive.
double fit_exponent(const Vector& state, int orbitals, int L, FitWindow window = {});

struct ExponentFit {
    std::vector<int> sizes;
    std::vector<double> exponents;  // A_hat per size
    double mean_exponent = 0.0;
    double spread = 0.0;           // std / |mean| of A_hat across sizes
    double per_cell_spread = 0.0;  // std / |mean| of A_hat / L across sizes
};

// One matched state per size. Throws DomainError with fewer than two sizes
// or a window shorter than 10 cells.
ExponentFit fit_exponent(const std::map<int, Vector>& states, int orbitals, FitWindow window = {});

enum class LocalizationClass {
    extended,
    scale_free_left,
    scale_free_right,
    skin_left,
    skin_right,
    unclassified,
};

const char* to_string(LocalizationClass cls);

struct ClassifyThresholds {
    double extended = 0.05;  // |A_hat| below this at every size
    double spread = 0.2;     // relative cross-size spread for consistency
};

struct LocalizationReport {
    int state_index = 0;
    double mean_position_fraction = 0.5;
    double fitted_exponent = 0.0;
    LocalizationClass cls = LocalizationClass::unclassified;
};

// extended: |A_hat| < threshold at every size. scale-free: A_hat
// consistent across sizes (and more so than A_hat / L). skin: A_hat / L
// consistent while A_hat grows with L. Anything else is unclassified.
LocalizationReport classify(int state_index, double mean_position_fraction, const ExponentFit& fit,
                            ClassifyThresholds thresholds = {});

// Largest deviation between mean-position curves of different sizes, each
// curve sampled on normalized index (n + 1/2) / N and compared by linear
// interpolation.
double curve_collapse_deviation(const std::map<int, std::vector<double>>& curves);

}  // namespace sfse
