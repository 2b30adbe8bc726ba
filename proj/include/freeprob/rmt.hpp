#pragma once

// Random-matrix laboratory: seeded samplers (complex Gaussian, sample
// covariance, Hermitian Gaussian, Haar unitary), a Hermitian eigensolver
// facade with a reconstruction contract, spectral truncation, word and
// polynomial evaluation on matrices, and numerical rank. Linear algebra is
// Eigen's; everything takes an explicit RngStream, no global state.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/moments.hpp"

namespace freeprob {

using ComplexMatrix = Eigen::MatrixXcd;

/// Deterministic substream: (master_seed, stream_id) pins the entire draw
/// sequence, so replicate r can own stream r regardless of scheduling.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed), stream_id_(stream_id) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
            static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
        gen_.seed(seq);
    }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    double gaussian() { return normal_(gen_); }

    /// Standard complex normal: Re and Im independent N(0, 1/2), E|Z|^2 = 1.
    std::complex<double> standard_complex_gaussian() {
        constexpr double half = 0.70710678118654752440;  // 1/sqrt(2)
        return {half * normal_(gen_), half * normal_(gen_)};
    }

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(gen_);
    }

    double cauchy() { return std::cauchy_distribution<double>(0.0, 1.0)(gen_); }

    int bernoulli_pm1() {
        return std::uniform_int_distribution<int>(0, 1)(gen_) == 0 ? -1 : 1;
    }

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// rows x cols matrix of i.i.d. standard complex normals.
inline ComplexMatrix sample_complex_gaussian(int rows, int cols, RngStream& rng) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("sample_complex_gaussian: bad shape");
    ComplexMatrix z(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) z(i, j) = rng.standard_complex_gaussian();
    return z;
}

/// W = X* X / M for an M x N complex Gaussian X; Hermitian PSD with mean
/// diagonal 1.
inline ComplexMatrix sample_wishart(int N, int M, RngStream& rng) {
    if (N < 1 || M < 1) throw std::invalid_argument("sample_wishart: bad shape");
    const ComplexMatrix x = sample_complex_gaussian(M, N, rng);
    ComplexMatrix w = (x.adjoint() * x) / static_cast<double>(M);
    w = (w + w.adjoint()) * 0.5;
    return w;
}

/// Hermitian Gaussian matrix scaled by 1/sqrt(N): above-diagonal entries
/// i.i.d. standard complex normal, diagonal i.i.d. real N(0,1). The spectral
/// law tends to the unit-variance semicircle.
inline ComplexMatrix sample_wigner(int N, RngStream& rng) {
    if (N < 1) throw std::invalid_argument("sample_wigner: bad shape");
    ComplexMatrix h = ComplexMatrix::Zero(N, N);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (int i = 0; i < N; ++i) {
        h(i, i) = scale * rng.gaussian();
        for (int j = i + 1; j < N; ++j) {
            const std::complex<double> z = rng.standard_complex_gaussian();
            h(i, j) = scale * z;
            h(j, i) = scale * std::conj(z);
        }
    }
    return h;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal phase
/// correction (column j of Q multiplied by R_jj / |R_jj|). Plain QR of a
/// Ginibre matrix is not Haar; the phase fix makes it so.
inline ComplexMatrix sample_haar_unitary(int N, RngStream& rng) {
    if (N < 1) throw std::invalid_argument("sample_haar_unitary: bad shape");
    const ComplexMatrix g = sample_complex_gaussian(N, N, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR();
    for (int j = 0; j < N; ++j) {
        const std::complex<double> d = r(j, j);
        const double mag = std::abs(d);
        q.col(j) *= (mag > 0.0) ? d / mag : 1.0;
    }
    return q;
}

inline bool is_hermitian(const ComplexMatrix& h, double tol = 1e-12) {
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol * (1.0 + h.cwiseAbs().maxCoeff());
}

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;  // ascending
    ComplexMatrix basis;          // unitary, H = basis * diag * basis^*
};

/// Spectral decomposition of a Hermitian matrix. Contract: unitary basis and
/// reconstruction residual below 1e-10 * (1 + ||H||_F).
inline EigenDecomposition hermitian_eigen(const ComplexMatrix& h, double herm_tol = 1e-10) {
    if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eigen: not square");
    if (!is_hermitian(h, herm_tol))
        throw std::invalid_argument("hermitian_eigen: input is not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eigen: solver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
    const auto ed = hermitian_eigen(h);
    return {ed.eigenvalues.data(), ed.eigenvalues.data() + ed.eigenvalues.size()};
}

/// PSD square root via the spectral form; tiny negative eigenvalues clamp to 0.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& h) {
    const auto ed = hermitian_eigen(h);
    Eigen::VectorXd s = ed.eigenvalues;
    for (int i = 0; i < s.size(); ++i) s(i) = std::sqrt(std::max(0.0, s(i)));
    return ed.basis * s.asDiagonal() * ed.basis.adjoint();
}

struct TruncationResult {
    ComplexMatrix truncated;
    int rank_removed = 0;  // = rank(Y - truncated)
};

/// Zero out eigenvalues with |eig| > M in the spectral form. The difference
/// from the input has rank equal to the exceedance count.
inline TruncationResult spectral_truncate_matrix(const ComplexMatrix& y, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("spectral_truncate_matrix: M must be > 0");
    const auto ed = hermitian_eigen(y);
    Eigen::VectorXd s = ed.eigenvalues;
    int removed = 0;
    for (int i = 0; i < s.size(); ++i) {
        if (std::abs(s(i)) > M) {
            s(i) = 0.0;
            ++removed;
        }
    }
    ComplexMatrix yp = ed.basis * s.asDiagonal() * ed.basis.adjoint();
    yp = (yp + yp.adjoint()) * 0.5;
    return {std::move(yp), removed};
}

/// Ordered product of the word's letters.
inline ComplexMatrix evaluate_word(const ComplexMatrix& w, const ComplexMatrix& y,
                                   const NoncommWord& word) {
    if (w.rows() != w.cols() || y.rows() != y.cols() || w.rows() != y.rows())
        throw std::invalid_argument("evaluate_word: matrices must be square of equal dimension");
    if (word.size() == 0) return ComplexMatrix::Identity(w.rows(), w.cols());
    ComplexMatrix acc = (word.letters[0] == 'W') ? w : y;
    for (int i = 1; i < word.size(); ++i) acc = acc * ((word.letters[i] == 'W') ? w : y);
    return acc;
}

/// Tr p(W, Y); the constant term contributes constant * dim.
inline std::complex<double> trace_of_poly(const ComplexMatrix& w, const ComplexMatrix& y,
                                          const NoncommPolynomial& p) {
    std::complex<double> acc = p.constant_term() * static_cast<double>(w.rows());
    for (const auto& t : p.terms()) acc += t.coeff * evaluate_word(w, y, t.word).trace();
    return acc;
}

inline std::complex<double> normalized_trace_of_poly(const ComplexMatrix& w,
                                                     const ComplexMatrix& y,
                                                     const NoncommPolynomial& p) {
    return trace_of_poly(w, y, p) / static_cast<double>(w.rows());
}

/// Number of singular values above tol * (largest singular value).
inline int numerical_rank(const ComplexMatrix& a, double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("numerical_rank: tol must be > 0");
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++rank;
    return rank;
}

/// Scalar distribution for diagonal models.
struct ScalarDist {
    enum class Kind { bernoulli_pm1, uniform, cauchy, point };

    Kind kind = Kind::point;
    double a = 0.0;  // uniform lower
    double b = 1.0;  // uniform upper
    double c = 0.0;  // point location

    double sample(RngStream& rng) const {
        switch (kind) {
            case Kind::bernoulli_pm1: return static_cast<double>(rng.bernoulli_pm1());
            case Kind::uniform: return rng.uniform(a, b);
            case Kind::cauchy: return rng.cauchy();
            case Kind::point: return c;
        }
        throw std::logic_error("ScalarDist: bad kind");
    }

    double quantile(double p) const {
        switch (kind) {
            case Kind::bernoulli_pm1: return p < 0.5 ? -1.0 : 1.0;
            case Kind::uniform: return a + p * (b - a);
            case Kind::cauchy: return std::tan(M_PI * (p - 0.5));
            case Kind::point: return c;
        }
        throw std::logic_error("ScalarDist: bad kind");
    }

    bool has_moments() const { return kind != Kind::cauchy; }

    MomentSequence moments(int order) const {
        switch (kind) {
            case Kind::bernoulli_pm1: return bernoulli_pm1_moments(order);
            case Kind::uniform: return uniform_moments(a, b, order);
            case Kind::point: return point_mass_moments(c, order);
            case Kind::cauchy:
                throw std::domain_error("ScalarDist: the Cauchy law has no moments");
        }
        throw std::logic_error("ScalarDist: bad kind");
    }
};

/// Recipe for the independent Hermitian factor: an i.i.d. or quantile
/// diagonal, optionally conjugated by an independent Haar unitary.
struct YSpec {
    enum class Form { diag_iid, diag_quantile };

    Form form = Form::diag_iid;
    ScalarDist dist;
    bool haar_conjugated = false;
};

inline ComplexMatrix make_y_matrix(const YSpec& spec, int N, RngStream& rng) {
    if (N < 1) throw std::invalid_argument("make_y_matrix: bad dimension");
    Eigen::VectorXd d(N);
    if (spec.form == YSpec::Form::diag_iid) {
        for (int i = 0; i < N; ++i) d(i) = spec.dist.sample(rng);
    } else {
        for (int i = 0; i < N; ++i)
            d(i) = spec.dist.quantile((i + 0.5) / static_cast<double>(N));
    }
    if (!spec.haar_conjugated) {
        ComplexMatrix y = ComplexMatrix::Zero(N, N);
        y.diagonal() = d.cast<std::complex<double>>();
        return y;
    }
    const ComplexMatrix u = sample_haar_unitary(N, rng);
    ComplexMatrix y = u * d.cast<std::complex<double>>().asDiagonal() * u.adjoint();
    y = (y + y.adjoint()) * 0.5;
    return y;
}

}  // namespace freeprob
