#pragma once

// Spectral measures as data: weighted atom lists for empirical spectra, the
// sup (Kolmogorov) distance, truncation of a measure to [-M, M] with the
// excess mass moved to an atom at 0, and reference laws with CDFs. The
// square-root-edge density integrates smoothly after x = c + r sin(theta).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "freeprob/moments.hpp"

namespace freeprob {

struct SpectralAtom {
    double location = 0.0;
    double weight = 0.0;
};

/// Probability measure with finitely many atoms; locations strictly
/// increasing after exact-duplicate merging, weights summing to 1.
class DiscreteSpectralMeasure {
  public:
    explicit DiscreteSpectralMeasure(std::vector<SpectralAtom> atoms) {
        if (atoms.empty()) throw std::invalid_argument("DiscreteSpectralMeasure: no atoms");
        std::sort(atoms.begin(), atoms.end(),
                  [](const SpectralAtom& a, const SpectralAtom& b) { return a.location < b.location; });
        for (const auto& a : atoms) {
            if (!std::isfinite(a.location) || !(a.weight > 0.0))
                throw std::invalid_argument("DiscreteSpectralMeasure: bad atom");
            if (!atoms_.empty() && atoms_.back().location == a.location)
                atoms_.back().weight += a.weight;  // merge exact duplicates only
            else
                atoms_.push_back(a);
        }
        long double mass = 0.0L;
        cum_.reserve(atoms_.size());
        for (const auto& a : atoms_) {
            mass += a.weight;
            cum_.push_back(static_cast<double>(mass));
        }
        if (std::abs(static_cast<double>(mass) - 1.0) > 1e-9)
            throw std::invalid_argument("DiscreteSpectralMeasure: weights must sum to 1");
    }

    static DiscreteSpectralMeasure from_eigenvalues(const std::vector<double>& eigs) {
        if (eigs.empty()) throw std::invalid_argument("from_eigenvalues: empty spectrum");
        const double w = 1.0 / static_cast<double>(eigs.size());
        std::vector<SpectralAtom> atoms;
        atoms.reserve(eigs.size());
        for (double x : eigs) atoms.push_back({x, w});
        return DiscreteSpectralMeasure(std::move(atoms));
    }

    static DiscreteSpectralMeasure point_mass(double c) {
        return DiscreteSpectralMeasure({SpectralAtom{c, 1.0}});
    }

    const std::vector<SpectralAtom>& atoms() const { return atoms_; }

    double total_mass() const { return cum_.back(); }

    /// P(X <= x), right-continuous.
    double cdf(double x) const {
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                   [](double v, const SpectralAtom& a) { return v < a.location; });
        if (it == atoms_.begin()) return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

    /// P(X < x).
    double cdf_left(double x) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                   [](const SpectralAtom& a, double v) { return a.location < v; });
        if (it == atoms_.begin()) return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

  private:
    std::vector<SpectralAtom> atoms_;
    std::vector<double> cum_;
};

/// Equal-weight average; the Monte Carlo estimator of an expected spectral
/// distribution from replicate spectra.
inline DiscreteSpectralMeasure average_measures(const std::vector<DiscreteSpectralMeasure>& ms) {
    if (ms.empty()) throw std::invalid_argument("average_measures: empty list");
    const double r = 1.0 / static_cast<double>(ms.size());
    std::vector<SpectralAtom> atoms;
    for (const auto& m : ms)
        for (const auto& a : m.atoms()) atoms.push_back({a.location, a.weight * r});
    return DiscreteSpectralMeasure(std::move(atoms));
}

/// Atoms outside [-M, M] are removed and their mass is placed at 0.
inline DiscreteSpectralMeasure truncate_measure(const DiscreteSpectralMeasure& mu, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("truncate_measure: M must be > 0");
    std::vector<SpectralAtom> atoms;
    double excess = 0.0;
    for (const auto& a : mu.atoms()) {
        if (std::abs(a.location) <= M)
            atoms.push_back(a);
        else
            excess += a.weight;
    }
    if (excess > 0.0) atoms.push_back({0.0, excess});
    return DiscreteSpectralMeasure(std::move(atoms));
}

inline MomentSequence measure_moments(const DiscreteSpectralMeasure& mu, int order) {
    std::vector<double> m(order, 0.0);
    for (const auto& a : mu.atoms()) {
        double p = 1.0;
        for (int j = 1; j <= order; ++j) {
            p *= a.location;
            m[j - 1] += a.weight * p;
        }
    }
    return MomentSequence(std::move(m));
}

/// Exact sup distance of two step CDFs, taken over the merged breakpoints.
inline double kolmogorov_distance(const DiscreteSpectralMeasure& a,
                                  const DiscreteSpectralMeasure& b) {
    double best = 0.0;
    auto consider = [&](double x) {
        best = std::max(best, std::abs(a.cdf(x) - b.cdf(x)));
    };
    for (const auto& atom : a.atoms()) consider(atom.location);
    for (const auto& atom : b.atoms()) consider(atom.location);
    return best;
}

/// Limiting spectral law of the sample-covariance ensemble with aspect ratio
/// lambda: support [(1-sqrt(lambda))^2, (1+sqrt(lambda))^2], density
/// sqrt((u+ - x)(x - u-)) / (2 pi lambda x), plus an atom of mass 1 - 1/lambda
/// at 0 when lambda > 1.
class MpLaw {
  public:
    explicit MpLaw(double lambda) : lambda_(lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("MpLaw: lambda must be > 0");
        const double s = std::sqrt(lambda);
        lo_ = (1.0 - s) * (1.0 - s);
        hi_ = (1.0 + s) * (1.0 + s);
    }

    double lambda() const { return lambda_; }
    double edge_low() const { return lo_; }
    double edge_high() const { return hi_; }
    double atom_mass() const { return lambda_ > 1.0 ? 1.0 - 1.0 / lambda_ : 0.0; }

    double density(double x) const {
        if (x <= lo_ || x >= hi_) return 0.0;
        return std::sqrt((hi_ - x) * (x - lo_)) / (2.0 * M_PI * lambda_ * x);
    }

    double cdf(double x) const {
        const double atom = (x >= 0.0) ? atom_mass() : 0.0;
        if (x < lo_) return (x < 0.0) ? 0.0 : atom;
        if (x >= hi_) return 1.0;
        return atom + bulk_integral(x);
    }

    double cdf_left(double x) const { return cdf(x) - (x == 0.0 ? atom_mass() : 0.0); }

    std::vector<double> probe_points() const { return {0.0, lo_, hi_}; }

    /// Integral of x^n against the law (atom contributes nothing for n >= 1).
    double moment_by_quadrature(int n) const {
        const double c = 0.5 * (lo_ + hi_);
        const double r = 0.5 * (hi_ - lo_);
        auto g = [&](double t) {
            const double x = c + r * std::sin(t);
            const double jac = r * std::cos(t);
            return std::pow(x, n) * std::sqrt((hi_ - x) * (x - lo_)) /
                   (2.0 * M_PI * lambda_ * x) * jac;
        };
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            g, -M_PI / 2.0, M_PI / 2.0, 15, 1e-10);
    }

  private:
    // After x = c + r sin(t) the integrand is r^2 cos^2(t) / (2 pi lambda x),
    // smooth including the lambda = 1 hard edge at x = 0.
    double bulk_integral(double x) const {
        const double c = 0.5 * (lo_ + hi_);
        const double r = 0.5 * (hi_ - lo_);
        double arg = (x - c) / r;
        arg = std::clamp(arg, -1.0, 1.0);
        const double t1 = std::asin(arg);
        auto g = [&](double t) {
            const double ct = std::cos(t);
            return r * r * ct * ct / (2.0 * M_PI * lambda_ * (c + r * std::sin(t)));
        };
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            g, -M_PI / 2.0, t1, 15, 1e-10);
    }

    double lambda_;
    double lo_;
    double hi_;
};

/// Unit-variance semicircle on [-2, 2], closed-form CDF.
class SemicircleLaw {
  public:
    double density(double x) const {
        if (std::abs(x) >= 2.0) return 0.0;
        return std::sqrt(4.0 - x * x) / (2.0 * M_PI);
    }

    double cdf(double x) const {
        if (x <= -2.0) return 0.0;
        if (x >= 2.0) return 1.0;
        return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * M_PI) + std::asin(x / 2.0) / M_PI;
    }

    double cdf_left(double x) const { return cdf(x); }

    std::vector<double> probe_points() const { return {-2.0, 2.0}; }
};

/// Sup distance between a discrete measure and a reference law; both one-sided
/// limits are checked at every atom and law probe point, which is where the
/// sup of |step CDF - law CDF| can live.
template <class Law>
double kolmogorov_distance(const DiscreteSpectralMeasure& m, const Law& law) {
    double best = 0.0;
    auto consider = [&](double x) {
        best = std::max(best, std::abs(m.cdf(x) - law.cdf(x)));
        best = std::max(best, std::abs(m.cdf_left(x) - law.cdf_left(x)));
    };
    for (const auto& atom : m.atoms()) consider(atom.location);
    for (double x : law.probe_points()) consider(x);
    return best;
}

template <class Law>
double kolmogorov_distance(const Law& law, const DiscreteSpectralMeasure& m) {
    return kolmogorov_distance(m, law);
}

/// CSV export: "location,weight" per atom.
inline void write_atoms_csv(const DiscreteSpectralMeasure& mu, std::ostream& os) {
    os << "location,weight\n";
    for (const auto& a : mu.atoms()) os << a.location << ',' << a.weight << '\n';
}

/// CSV export: equal-width bins, "bin_left,bin_right,mass" rows.
inline void write_histogram_csv(const DiscreteSpectralMeasure& mu, int bins, std::ostream& os) {
    if (bins < 1) throw std::invalid_argument("write_histogram_csv: bins must be >= 1");
    const double lo = mu.atoms().front().location;
    const double hi = mu.atoms().back().location;
    const double width = (hi > lo) ? (hi - lo) / bins : 1.0;
    std::vector<double> mass(bins, 0.0);
    for (const auto& a : mu.atoms()) {
        int idx = static_cast<int>((a.location - lo) / width);
        idx = std::clamp(idx, 0, bins - 1);
        mass[idx] += a.weight;
    }
    os << "bin_left,bin_right,mass\n";
    for (int i = 0; i < bins; ++i)
        os << lo + i * width << ',' << lo + (i + 1) * width << ',' << mass[i] << '\n';
}

}  // namespace freeprob
