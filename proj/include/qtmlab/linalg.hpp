// Copyright 2026 The qtmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qtmlab/operator.hpp"

namespace qtmlab {

// Operator algebra over finite complex spaces: distances, fidelity, Loewner
// order, spectral thresholding, null spaces and the projection capacity bound.

struct Spectrum {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // columns
};

inline double max_abs(const Matrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermitian_defect(const Matrix &m) {
    return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const Operator &op, double eps = kEpsNum) {
    if (auto *e = op.exact()) {
        return *e == e->adjoint();
    }
    return hermitian_defect(op.dense()) <= eps;
}

/// Eigendecomposition of the Hermitian part of `m`.
inline Spectrum hermitian_spectrum(const Matrix &m) {
    Matrix h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) {
        fail(ErrorKind::Validation, "eigendecomposition did not converge");
    }
    return {es.eigenvalues(), es.eigenvectors()};
}

inline Eigen::VectorXd hermitian_eigenvalues(const Matrix &m) {
    if (m.rows() == 0) {
        return Eigen::VectorXd(0);
    }
    Matrix h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        fail(ErrorKind::Validation, "eigendecomposition did not converge");
    }
    return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix &m) {
    auto ev = hermitian_eigenvalues(m);
    return ev.size() == 0 ? 0.0 : ev.minCoeff();
}

inline bool is_psd(const Operator &op, double eps = kEpsNum) {
    return is_hermitian(op, eps) && min_eigenvalue(op.dense()) >= -eps;
}

inline bool is_projection(const Operator &op, double eps = kEpsNum) {
    Matrix m = op.dense();
    if (hermitian_defect(m) > eps || max_abs(m * m - m) > eps) {
        return false;
    }
    auto ev = hermitian_eigenvalues(m);
    for (Eigen::Index i = 0; i < ev.size(); i++) {
        if (std::min(std::abs(ev(i)), std::abs(ev(i) - 1.0)) > eps) {
            return false;
        }
    }
    return true;
}

/// Recomputes every flag of `op` from its entries.
inline OperatorFlags compute_flags(const Operator &op, double eps = kEpsNum) {
    OperatorFlags f;
    bool herm = is_hermitian(op, eps);
    f.hermitian = herm ? Tri::Yes : Tri::No;
    f.psd = herm && min_eigenvalue(op.dense()) >= -eps ? Tri::Yes : Tri::No;
    f.projection = is_projection(op, eps) ? Tri::Yes : Tri::No;
    f.trace_bounded_by_one = op.trace().real() <= 1.0 + eps ? Tri::Yes : Tri::No;
    return f;
}

/// Throws if any flag marked Yes is contradicted by the entries.
inline void verify_flags(const Operator &op, double eps = kEpsNum) {
    auto f = compute_flags(op, eps);
    auto bad = [](Tri claimed, Tri actual) { return claimed == Tri::Yes && actual != Tri::Yes; };
    if (bad(op.flags.hermitian, f.hermitian) || bad(op.flags.psd, f.psd) || bad(op.flags.projection, f.projection) ||
        bad(op.flags.trace_bounded_by_one, f.trace_bounded_by_one)) {
        fail(ErrorKind::Validation, "operator flags contradict its entries");
    }
}

namespace detail {

inline void require_same_dim(const Operator &a, const Operator &b, const char *what) {
    if (a.dim() != b.dim()) {
        fail(ErrorKind::Validation, std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                                        std::to_string(b.dim()) + ")");
    }
}

/// Exact real diagonal of `d` when it is diagonal with real entries.
inline std::optional<std::vector<Rational>> exact_real_diagonal(const ExactMatrix &d) {
    if (!d.is_diagonal()) {
        return std::nullopt;
    }
    std::vector<Rational> out;
    for (size_t i = 0; i < d.dim; i++) {
        if (d.at(i, i).im() != 0) {
            return std::nullopt;
        }
        out.push_back(d.at(i, i).re());
    }
    return out;
}

}  // namespace detail

/// D(a, b) = 1/2 ||a - b||_1 for Hermitian a, b.
inline double trace_distance(const Operator &a, const Operator &b, double eps = kEpsNum) {
    detail::require_same_dim(a, b, "trace_distance");
    if (!is_hermitian(a, eps) || !is_hermitian(b, eps)) {
        fail(ErrorKind::Validation, "trace_distance: non-Hermitian input");
    }
    if (a.exact() && b.exact()) {
        if (auto diag = detail::exact_real_diagonal(*a.exact() - *b.exact())) {
            Rational s = 0;
            for (const auto &v : *diag) {
                s += v < 0 ? Rational(-v) : v;
            }
            return to_double(s / 2);
        }
    }
    auto ev = hermitian_eigenvalues(a.dense() - b.dense());
    return 0.5 * ev.cwiseAbs().sum();
}

/// Trace distance of two dense Hermitian matrices, no checks.
inline double trace_distance(const Matrix &a, const Matrix &b) {
    return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

/// F(|psi>, sigma) = <psi|sigma|psi>.
inline double fidelity_pure(const PureState &psi, const Operator &sigma) {
    if (psi.dim() != sigma.dim()) {
        fail(ErrorKind::Validation, "fidelity_pure: dimension mismatch");
    }
    const Vector &v = psi.coeffs();
    return (v.adjoint() * sigma.dense() * v)(0, 0).real();
}

/// a <= b in the Loewner order, i.e. b - a is positive semidefinite.
inline bool psd_leq(const Operator &a, const Operator &b, double eps = kEpsNum) {
    detail::require_same_dim(a, b, "psd_leq");
    if (!is_hermitian(a, eps) || !is_hermitian(b, eps)) {
        fail(ErrorKind::Validation, "psd_leq: non-Hermitian input");
    }
    if (a.exact() && b.exact()) {
        if (auto diag = detail::exact_real_diagonal(*b.exact() - *a.exact())) {
            return std::all_of(diag->begin(), diag->end(), [&](const Rational &v) { return to_double(v) >= -eps; });
        }
    }
    return min_eigenvalue(b.dense() - a.dense()) >= -eps;
}

/// Projection onto the eigenvectors of `o` with eigenvalue >= theta. Eigenvalues
/// within eps of theta are included.
inline Operator threshold_projection(const Operator &o, double theta, double eps = kEpsNum) {
    if (!(theta > 0)) {
        fail(ErrorKind::Validation, "threshold_projection: theta must be positive");
    }
    if (!is_psd(o, eps)) {
        fail(ErrorKind::Validation, "threshold_projection: input is not positive semidefinite");
    }
    Operator out;
    if (auto *e = o.exact(); e && e->is_diagonal()) {
        ExactMatrix n(e->dim);
        for (size_t i = 0; i < e->dim; i++) {
            if (to_double(e->at(i, i).re()) >= theta - eps) {
                n.at(i, i) = ExactComplex(1);
            }
        }
        out = Operator(std::move(n));
    } else {
        auto sp = hermitian_spectrum(o.dense());
        Matrix n = Matrix::Zero(o.dim(), o.dim());
        for (Eigen::Index i = 0; i < sp.values.size(); i++) {
            if (sp.values(i) >= theta - eps) {
                n += sp.vectors.col(i) * sp.vectors.col(i).adjoint();
            }
        }
        out = Operator(std::move(n));
    }
    out.flags = {Tri::Yes, Tri::Yes, Tri::Yes, Tri::Unknown};
    return out;
}

/// Orthonormal basis of the eigenspace of `a` with eigenvalues <= tol.
inline std::vector<PureState> null_space(const Operator &a, double tol) {
    if (a.dim() == 0) {
        return {};
    }
    auto sp = hermitian_spectrum(a.dense());
    std::vector<PureState> out;
    for (Eigen::Index i = 0; i < sp.values.size(); i++) {
        if (sp.values(i) <= tol) {
            Vector v = sp.vectors.col(i);
            out.emplace_back(v / v.norm());
        }
    }
    return out;
}

/// Sum of |v><v| over the given states.
inline Operator projector_onto(const std::vector<PureState> &states, size_t dim) {
    Matrix p = Matrix::Zero(dim, dim);
    for (const auto &s : states) {
        if (s.dim() != dim) {
            fail(ErrorKind::Validation, "projector_onto: dimension mismatch");
        }
        p += s.projector();
    }
    Operator op(std::move(p));
    op.flags = {Tri::Yes, Tri::Yes, Tri::Yes, Tri::Unknown};
    return op;
}

struct CapacityResult {
    size_t rank = 0;
    size_t count = 0;
    double threshold = 1.0;
    bool bound_holds = true;
};

/// Counts members of an orthonormal family with <e|P|e> > 1 - 1/(4m) for a
/// rank-m projection P. Such a family always has fewer than 2m members.
inline CapacityResult capacity_check(const Operator &p, const std::vector<PureState> &family, double eps = kEpsNum) {
    if (!is_projection(p, eps)) {
        fail(ErrorKind::Validation, "capacity_check: operator is not a projection");
    }
    const size_t n = family.size();
    for (size_t i = 0; i < n; i++) {
        if (family[i].dim() != p.dim()) {
            fail(ErrorKind::Validation, "capacity_check: dimension mismatch");
        }
        for (size_t j = i + 1; j < n; j++) {
            if (std::abs(family[i].coeffs().dot(family[j].coeffs())) > eps) {
                fail(ErrorKind::Validation, "capacity_check: family is not orthonormal");
            }
        }
    }
    CapacityResult r;
    r.rank = static_cast<size_t>(std::llround(p.trace().real()));
    if (r.rank == 0) {
        return r;
    }
    r.threshold = 1.0 - 1.0 / (4.0 * static_cast<double>(r.rank));
    Matrix pm = p.dense();
    for (const auto &e : family) {
        double f = (e.coeffs().adjoint() * pm * e.coeffs())(0, 0).real();
        if (f > r.threshold) {
            r.count++;
        }
    }
    r.bound_holds = r.count < 2 * r.rank;
    return r;
}

}  // namespace qtmlab
