#pragma once

// Explicit eigensystems of self-adjoint operators bounded above with compact
// resolvent, and the coefficient representation of states in their eigenbasis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracback/error.hpp"

namespace fracback::specop {

enum class BasisKind { analytic_sine, analytic_cosine, matrix_columns, abstract };

inline const char* to_string(BasisKind b) {
    switch (b) {
        case BasisKind::analytic_sine: return "analytic-sine";
        case BasisKind::analytic_cosine: return "analytic-cosine";
        case BasisKind::matrix_columns: return "matrix-columns";
        case BasisKind::abstract: return "abstract";
    }
    return "unknown";
}

/// Change of variables of the advection-diffusion reduction:
/// u(t, x) = v(t, xi) exp(b xi / (2 sqrt d)), xi = x / sqrt d.
struct Gauge {
    double drift = 0.0;
    double diffusivity = 1.0;

    double xi(double x) const { return x / std::sqrt(diffusivity); }
    double weight(double xi) const { return std::exp(drift * xi / (2.0 * std::sqrt(diffusivity))); }
};

/// Dense row-major square matrix.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw DomainError("matrix must be square");
            for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Sorted eigenvalues of -A with the non-positive count m and the bound kappa.
class EigenSystem {
public:
    struct Parts {
        std::vector<double> eigenvalues;
        BasisKind basis = BasisKind::abstract;
        std::optional<double> domain_length;
        std::optional<Gauge> gauge;
        std::optional<Matrix> vectors;  // columns are orthonormal eigenvectors
        std::optional<double> kappa;    // defaults to max(0, -lambda_1)
    };

    explicit EigenSystem(Parts parts)
        : eigenvalues_(std::move(parts.eigenvalues)),
          basis_(parts.basis),
          domain_length_(parts.domain_length),
          gauge_(parts.gauge),
          vectors_(std::move(parts.vectors)) {
        if (eigenvalues_.empty()) throw DomainError("eigensystem needs at least one mode");
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
            if (!std::isfinite(eigenvalues_[i])) throw DomainError("eigenvalues must be finite");
            if (i > 0 && eigenvalues_[i] < eigenvalues_[i - 1]) {
                throw DomainError("eigenvalues must be sorted ascending");
            }
        }
        m_ = static_cast<std::size_t>(
            std::count_if(eigenvalues_.begin(), eigenvalues_.end(), [](double l) { return l <= 0.0; }));
        kappa_ = parts.kappa.value_or(std::max(0.0, -eigenvalues_.front()));
        if (!(kappa_ >= 0.0)) throw DomainError("kappa must be non-negative");
        if (eigenvalues_.front() < -kappa_) throw DomainError("lambda_1 must be >= -kappa");
        if ((basis_ == BasisKind::analytic_sine || basis_ == BasisKind::analytic_cosine) &&
            !(domain_length_ && *domain_length_ > 0.0)) {
            throw DomainError("analytic basis needs a positive domain length");
        }
        if (vectors_ && vectors_->size() != eigenvalues_.size()) {
            throw DomainError("eigenvector matrix does not match the mode count");
        }
    }

    std::size_t size() const noexcept { return eigenvalues_.size(); }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    double eigenvalue(std::size_t n) const { return eigenvalues_.at(n); }
    std::size_t m() const noexcept { return m_; }
    double kappa() const noexcept { return kappa_; }
    BasisKind basis() const noexcept { return basis_; }
    const std::optional<double>& domain_length() const noexcept { return domain_length_; }
    const std::optional<Gauge>& gauge() const noexcept { return gauge_; }
    const std::optional<Matrix>& vectors() const noexcept { return vectors_; }

    /// phi_n(x) for the analytic bases; n is zero-based.
    double eigenfunction(std::size_t n, double x) const {
        const double l = domain_length_.value();
        switch (basis_) {
            case BasisKind::analytic_sine:
                return std::sqrt(2.0 / l) * std::sin((n + 1) * std::numbers::pi * x / l);
            case BasisKind::analytic_cosine:
                if (n == 0) return 1.0 / std::sqrt(l);
                return std::sqrt(2.0 / l) * std::cos(n * std::numbers::pi * x / l);
            default:
                throw DomainError("eigenfunction samples require an analytic basis");
        }
    }

private:
    std::vector<double> eigenvalues_;
    std::size_t m_ = 0;
    double kappa_ = 0.0;
    BasisKind basis_;
    std::optional<double> domain_length_;
    std::optional<Gauge> gauge_;
    std::optional<Matrix> vectors_;
};

using EigenSystemPtr = std::shared_ptr<const EigenSystem>;

/// A state through its coefficients <u, phi_n>.
class SpectralField {
public:
    SpectralField(EigenSystemPtr eigsys, std::vector<double> coefficients)
        : eigsys_(std::move(eigsys)), coefficients_(std::move(coefficients)) {
        if (!eigsys_) throw DomainError("spectral field needs an eigensystem");
        if (coefficients_.size() != eigsys_->size()) {
            throw DomainError("coefficient count " + std::to_string(coefficients_.size()) +
                              " does not match eigensystem size " + std::to_string(eigsys_->size()));
        }
        for (double c : coefficients_) {
            if (!std::isfinite(c)) throw DomainError("spectral coefficients must be finite");
        }
    }

    static SpectralField zero(EigenSystemPtr eigsys) {
        const std::size_t n = eigsys->size();
        return SpectralField(std::move(eigsys), std::vector<double>(n, 0.0));
    }

    const EigenSystemPtr& eigsys() const noexcept { return eigsys_; }
    std::span<const double> coefficients() const noexcept { return coefficients_; }
    double operator[](std::size_t n) const { return coefficients_[n]; }
    std::size_t size() const noexcept { return coefficients_.size(); }

    /// Parseval norm, summed in ascending mode order.
    double norm() const {
        double s = 0.0;
        for (double c : coefficients_) s += c * c;
        return std::sqrt(s);
    }

    /// ||A u|| = sqrt(sum lambda_n^2 c_n^2).
    double operator_norm() const {
        double s = 0.0;
        for (std::size_t n = 0; n < coefficients_.size(); ++n) {
            const double v = eigsys_->eigenvalue(n) * coefficients_[n];
            s += v * v;
        }
        return std::sqrt(s);
    }

    SpectralField scaled(double factor) const {
        std::vector<double> c(coefficients_);
        for (double& v : c) v *= factor;
        return SpectralField(eigsys_, std::move(c));
    }

    SpectralField minus(const SpectralField& other) const {
        require_same_system(other);
        std::vector<double> c(coefficients_);
        for (std::size_t n = 0; n < c.size(); ++n) c[n] -= other.coefficients_[n];
        return SpectralField(eigsys_, std::move(c));
    }

    SpectralField plus(const SpectralField& other) const {
        require_same_system(other);
        std::vector<double> c(coefficients_);
        for (std::size_t n = 0; n < c.size(); ++n) c[n] += other.coefficients_[n];
        return SpectralField(eigsys_, std::move(c));
    }

private:
    void require_same_system(const SpectralField& other) const {
        if (other.size() != size()) throw DomainError("spectral fields belong to different eigensystems");
    }

    EigenSystemPtr eigsys_;
    std::vector<double> coefficients_;
};

// ---------------------------------------------------------------------------
// Operator catalog

inline EigenSystemPtr dirichlet_laplacian_1d(double l, int n_modes) {
    if (!(l > 0.0)) throw DomainError("domain length must be positive");
    if (n_modes < 1) throw DomainError("n_modes must be >= 1");
    std::vector<double> ev(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        const double k = n * std::numbers::pi / l;
        ev[n - 1] = k * k;
    }
    return std::make_shared<const EigenSystem>(EigenSystem::Parts{
        .eigenvalues = std::move(ev), .basis = BasisKind::analytic_sine, .domain_length = l, .kappa = 0.0});
}

inline EigenSystemPtr neumann_laplacian_1d(double l, int n_modes) {
    if (!(l > 0.0)) throw DomainError("domain length must be positive");
    if (n_modes < 1) throw DomainError("n_modes must be >= 1");
    std::vector<double> ev(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        const double k = (n - 1) * std::numbers::pi / l;
        ev[n - 1] = k * k;
    }
    return std::make_shared<const EigenSystem>(EigenSystem::Parts{
        .eigenvalues = std::move(ev), .basis = BasisKind::analytic_cosine, .domain_length = l, .kappa = 0.0});
}

/// d u_xx - b u_x on (0, l) with Dirichlet ends, reduced by the gauge to
/// v_xixi + p v on (0, l / sqrt d) with p = -b^2 / (4 d).
inline EigenSystemPtr advection_diffusion_reduce(double l, double b, double d, int n_modes) {
    if (!(l > 0.0)) throw DomainError("domain length must be positive");
    if (!(d > 0.0)) throw DomainError("diffusivity must be positive");
    if (!std::isfinite(b)) throw DomainError("drift must be finite");
    if (n_modes < 1) throw DomainError("n_modes must be >= 1");
    const double ell = l / std::sqrt(d);
    const double shift = b * b / (4.0 * d);
    std::vector<double> ev(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        const double k = n * std::numbers::pi / ell;
        ev[n - 1] = k * k + shift;
    }
    return std::make_shared<const EigenSystem>(EigenSystem::Parts{.eigenvalues = std::move(ev),
                                                                  .basis = BasisKind::analytic_sine,
                                                                  .domain_length = ell,
                                                                  .gauge = Gauge{b, d},
                                                                  .kappa = 0.0});
}

/// Spectral fractional power: lambda_n -> lambda_n^s, same eigenvectors.
inline EigenSystemPtr fractional_power(const EigenSystem& eigsys, double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("fractional power exponent must lie in (0, 1)");
    std::vector<double> ev(eigsys.eigenvalues().begin(), eigsys.eigenvalues().end());
    for (double& l : ev) {
        if (!(l > 0.0)) throw DomainError("fractional power needs strictly positive eigenvalues");
        l = std::pow(l, s);
    }
    return std::make_shared<const EigenSystem>(EigenSystem::Parts{.eigenvalues = std::move(ev),
                                                                  .basis = eigsys.basis(),
                                                                  .domain_length = eigsys.domain_length(),
                                                                  .gauge = eigsys.gauge(),
                                                                  .vectors = eigsys.vectors(),
                                                                  .kappa = 0.0});
}

struct JacobiResult {
    std::vector<double> eigenvalues;  // ascending
    Matrix vectors;                   // column j belongs to eigenvalues[j]
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline JacobiResult jacobi_eigen(Matrix a, int max_sweeps = 30) {
    const std::size_t n = a.size();
    Matrix v(n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double total = 0.0;
    for (double x : a.data()) total += x * x;
    const double scale = std::sqrt(total);

    int sweep = 0;
    for (; sweep <= max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= 1e-15 * scale || scale == 0.0) break;
        if (sweep == max_sweeps) {
            throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                                   " sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                // skip rotations that cannot change the diagonal in floating point
                if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p);
                        const double arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    JacobiResult out;
    out.eigenvalues.resize(n);
    out.vectors = Matrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        // fix the sign so the largest component of each column is positive
        std::size_t arg = 0;
        for (std::size_t r = 0; r < n; ++r)
            if (std::abs(v(r, order[j])) > std::abs(v(arg, order[j]))) arg = r;
        const double sgn = v(arg, order[j]) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = sgn * v(r, order[j]);
    }
    out.sweeps = sweep;
    return out;
}

inline constexpr std::size_t kMaxMatrixSize = 2000;

/// Finite-dimensional operator A = a (symmetric); eigenpairs of -a.
inline EigenSystemPtr matrix_operator(const Matrix& a) {
    const std::size_t n = a.size();
    if (n == 0) throw DomainError("matrix operator needs at least one row");
    if (n > kMaxMatrixSize) throw DomainError("matrix operator limited to N <= 2000");
    const double norm = a.max_abs();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(a(i, j))) throw DomainError("matrix entries must be finite");
            if (std::abs(a(i, j) - a(j, i)) > 1e-12 * norm) {
                throw DomainError("matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
    Matrix neg(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) neg(i, j) = -0.5 * (a(i, j) + a(j, i));
    JacobiResult jr = jacobi_eigen(std::move(neg));
    return std::make_shared<const EigenSystem>(EigenSystem::Parts{.eigenvalues = std::move(jr.eigenvalues),
                                                                  .basis = BasisKind::matrix_columns,
                                                                  .vectors = std::move(jr.vectors)});
}

// ---------------------------------------------------------------------------
// Projection and synthesis

inline void require_simpson_grid(std::size_t count) {
    if (count < 101 || count % 2 == 0) {
        throw DomainError("analytic projection needs an odd number (>= 101) of uniform samples, got " +
                          std::to_string(count));
    }
}

/// c_n = <u, phi_n>. Analytic bases take samples at x_i = i l / (count - 1)
/// (composite Simpson); the matrix basis takes the N vector components.
inline SpectralField project(std::span<const double> values, const EigenSystemPtr& eigsys) {
    const std::size_t modes = eigsys->size();
    std::vector<double> c(modes, 0.0);
    if (eigsys->basis() == BasisKind::matrix_columns) {
        if (values.size() != modes || !eigsys->vectors()) {
            throw DomainError("matrix-basis projection needs exactly N vector components");
        }
        const Matrix& q = *eigsys->vectors();
        for (std::size_t j = 0; j < modes; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < modes; ++i) s += q(i, j) * values[i];
            c[j] = s;
        }
        return SpectralField(eigsys, std::move(c));
    }
    if (eigsys->basis() == BasisKind::abstract) throw DomainError("abstract basis has no sampled representation");
    require_simpson_grid(values.size());
    const double l = *eigsys->domain_length();
    const std::size_t last = values.size() - 1;
    const double h = l / static_cast<double>(last);
    for (std::size_t n = 0; n < modes; ++n) {
        double s = 0.0;
        for (std::size_t i = 0; i <= last; ++i) {
            const double w = (i == 0 || i == last) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            s += w * values[i] * eigsys->eigenfunction(n, h * static_cast<double>(i));
        }
        c[n] = s * h / 3.0;
    }
    return SpectralField(eigsys, std::move(c));
}

/// u(x) = sum c_n phi_n(x) on the given points (analytic bases), or Q c for
/// the matrix basis (points ignored).
inline std::vector<double> synthesize(const SpectralField& field, std::span<const double> x_grid) {
    const EigenSystem& es = *field.eigsys();
    if (es.basis() == BasisKind::matrix_columns) {
        if (!es.vectors()) throw DomainError("matrix basis without stored eigenvectors");
        const Matrix& q = *es.vectors();
        std::vector<double> out(es.size(), 0.0);
        for (std::size_t i = 0; i < es.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < es.size(); ++j) s += q(i, j) * field[j];
            out[i] = s;
        }
        return out;
    }
    if (es.basis() == BasisKind::abstract) throw DomainError("abstract basis cannot be synthesized");
    std::vector<double> out(x_grid.size(), 0.0);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        double s = 0.0;
        for (std::size_t n = 0; n < es.size(); ++n) s += field[n] * es.eigenfunction(n, x_grid[i]);
        out[i] = s;
    }
    return out;
}

/// Uniform sample points over [0, l] matching project()'s grid convention.
inline std::vector<double> sample_points(double l, std::size_t count) {
    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i) x[i] = l * static_cast<double>(i) / static_cast<double>(count - 1);
    return x;
}

}  // namespace fracback::specop
