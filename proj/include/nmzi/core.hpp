// Small dense complex linear algebra for few-mode quantum states: labeled
// state vectors, dense operators, tensor products, projections and unitarity
// checks. Dimensions here never exceed 6, so everything is plain loops over
// std::vector storage.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nmzi {

using Amplitude = std::complex<double>;

inline bool is_finite(const Amplitude& a) {
    return std::isfinite(a.real()) && std::isfinite(a.imag());
}

// Default tolerance for unitarity and norm-conservation checks.
inline constexpr double kUnitaryTol = 1e-12;

// State over a small labeled basis. Projection yields sub-normalized states,
// so norm_squared() may be below 1; first-order (non-unitary) evolution may
// push it slightly above. Immutable after construction.
class StateVector {
public:
    StateVector(std::vector<Amplitude> amps, std::vector<std::string> labels)
        : amps_(std::move(amps)), labels_(std::move(labels)) {
        if (amps_.empty()) {
            throw std::invalid_argument("StateVector: dimension must be positive");
        }
        if (labels_.size() != amps_.size()) {
            throw std::invalid_argument("StateVector: basis label count must equal dimension");
        }
        for (const auto& a : amps_) {
            if (!is_finite(a)) {
                throw std::invalid_argument("StateVector: amplitudes must be finite");
            }
        }
    }

    // |k> in a basis described by `labels`.
    static StateVector basis_state(std::size_t index, std::vector<std::string> labels) {
        if (index >= labels.size()) {
            throw std::out_of_range("StateVector::basis_state: index out of range");
        }
        std::vector<Amplitude> amps(labels.size(), Amplitude{0.0, 0.0});
        amps[index] = Amplitude{1.0, 0.0};
        return StateVector(std::move(amps), std::move(labels));
    }

    std::size_t dim() const { return amps_.size(); }
    const Amplitude& operator[](std::size_t i) const { return amps_.at(i); }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }
    const std::vector<std::string>& basis_labels() const { return labels_; }

    double norm_squared() const {
        double n2 = 0.0;
        for (const auto& a : amps_) n2 += std::norm(a);
        return n2;
    }

private:
    std::vector<Amplitude> amps_;
    std::vector<std::string> labels_;
};

// Dense square operator, row-major.
class DenseOperator {
public:
    explicit DenseOperator(std::size_t dim)
        : dim_(dim), entries_(dim * dim, Amplitude{0.0, 0.0}) {
        if (dim == 0) {
            throw std::invalid_argument("DenseOperator: dimension must be positive");
        }
    }

    DenseOperator(std::size_t dim, std::vector<Amplitude> entries)
        : dim_(dim), entries_(std::move(entries)) {
        if (dim == 0 || entries_.size() != dim * dim) {
            throw std::invalid_argument("DenseOperator: entries must form a square matrix");
        }
        for (const auto& e : entries_) {
            if (!is_finite(e)) {
                throw std::invalid_argument("DenseOperator: entries must be finite");
            }
        }
    }

    static DenseOperator identity(std::size_t dim) {
        DenseOperator op(dim);
        for (std::size_t i = 0; i < dim; ++i) op.at(i, i) = Amplitude{1.0, 0.0};
        return op;
    }

    std::size_t dim() const { return dim_; }

    Amplitude& at(std::size_t row, std::size_t col) { return entries_[row * dim_ + col]; }
    const Amplitude& at(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }

    DenseOperator adjoint() const {
        DenseOperator out(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j)
                out.at(i, j) = std::conj(at(j, i));
        return out;
    }

    friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
        if (a.dim_ != b.dim_) {
            throw std::invalid_argument("DenseOperator: dimension mismatch in product");
        }
        DenseOperator out(a.dim_);
        for (std::size_t i = 0; i < a.dim_; ++i)
            for (std::size_t k = 0; k < a.dim_; ++k) {
                const Amplitude aik = a.at(i, k);
                if (aik == Amplitude{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < a.dim_; ++j)
                    out.at(i, j) += aik * b.at(k, j);
            }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<Amplitude> entries_;
};

// |k><k| on a dim-dimensional space.
inline DenseOperator basis_projector(std::size_t dim, std::size_t index) {
    if (index >= dim) {
        throw std::out_of_range("basis_projector: index out of range");
    }
    DenseOperator p(dim);
    p.at(index, index) = Amplitude{1.0, 0.0};
    return p;
}

// Kronecker product; the left factor's index varies slower. For photon (x)
// meter operators this gives the photon-major joint ordering.
inline DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b) {
    const std::size_t da = a.dim(), db = b.dim();
    DenseOperator out(da * db);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j) {
            const Amplitude aij = a.at(i, j);
            if (aij == Amplitude{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < db; ++k)
                for (std::size_t l = 0; l < db; ++l)
                    out.at(i * db + k, j * db + l) = aij * b.at(k, l);
        }
    return out;
}

// u (x) v with combined labels "<left>:<right>".
inline StateVector tensor_product(const StateVector& u, const StateVector& v) {
    std::vector<Amplitude> amps;
    std::vector<std::string> labels;
    amps.reserve(u.dim() * v.dim());
    labels.reserve(u.dim() * v.dim());
    for (std::size_t i = 0; i < u.dim(); ++i)
        for (std::size_t k = 0; k < v.dim(); ++k) {
            amps.push_back(u[i] * v[k]);
            labels.push_back(u.basis_labels()[i] + ":" + v.basis_labels()[k]);
        }
    return StateVector(std::move(amps), std::move(labels));
}

inline StateVector apply_operator(const DenseOperator& op, const StateVector& s) {
    if (op.dim() != s.dim()) {
        throw std::invalid_argument("apply_operator: operator/state dimension mismatch");
    }
    std::vector<Amplitude> out(s.dim(), Amplitude{0.0, 0.0});
    for (std::size_t i = 0; i < s.dim(); ++i)
        for (std::size_t j = 0; j < s.dim(); ++j)
            out[i] += op.at(i, j) * s[j];
    return StateVector(std::move(out), s.basis_labels());
}

// <bra|ket>, conjugate-linear in the bra argument.
inline Amplitude inner_product(const StateVector& bra, const StateVector& ket) {
    if (bra.dim() != ket.dim()) {
        throw std::invalid_argument("inner_product: dimension mismatch");
    }
    Amplitude acc{0.0, 0.0};
    for (std::size_t k = 0; k < bra.dim(); ++k) acc += std::conj(bra[k]) * ket[k];
    return acc;
}

// Keeps only the selected basis component; no renormalization, the result is
// sub-normalized.
inline StateVector project_component(const StateVector& s, std::size_t basis_index) {
    if (basis_index >= s.dim()) {
        throw std::out_of_range("project_component: basis index out of range");
    }
    std::vector<Amplitude> out(s.dim(), Amplitude{0.0, 0.0});
    out[basis_index] = s[basis_index];
    return StateVector(std::move(out), s.basis_labels());
}

// True iff max-abs-entry of (op^dagger op - I) <= tol.
inline bool check_unitary(const DenseOperator& op, double tol = kUnitaryTol) {
    const DenseOperator gram = op.adjoint() * op;
    double worst = 0.0;
    for (std::size_t i = 0; i < op.dim(); ++i)
        for (std::size_t j = 0; j < op.dim(); ++j) {
            const Amplitude want = (i == j) ? Amplitude{1.0, 0.0} : Amplitude{0.0, 0.0};
            worst = std::max(worst, std::abs(gram.at(i, j) - want));
        }
    return worst <= tol;
}

}  // namespace nmzi
