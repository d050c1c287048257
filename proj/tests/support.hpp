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

#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qtmlab/prefix_chain.hpp"

namespace qtmlab::testing {

inline std::string corpus_path(const std::string &name) {
    return std::string(QTMLAB_CORPUS_DIR) + "/" + name;
}

inline QTMDef corpus_machine(const std::string &name, Backend backend = Backend::Float) {
    return parse_machine(slurp_file(corpus_path(name)), backend);
}

inline Vector random_vector(size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); i++) {
        double re = g(rng);
        double im = g(rng);
        v(i) = cplx(re, im);
    }
    return v.normalized();
}

/// Random density matrix of the given rank.
inline Matrix random_density(size_t dim, size_t rank, std::mt19937_64 &rng) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double total = 0;
    for (size_t r = 0; r < rank; r++) {
        double w = u(rng);
        Vector v = random_vector(dim, rng);
        m += w * v * v.adjoint();
        total += w;
    }
    return m / total;
}

/// Haar-random unitary via QR of a Gaussian matrix.
inline Matrix random_unitary(size_t dim, std::mt19937_64 &rng) {
    Matrix g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index c = 0; c < g.cols(); c++) {
        g.col(c) = random_vector(dim, rng);
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
}

inline Matrix random_projection(size_t dim, size_t rank, std::mt19937_64 &rng) {
    Matrix u = random_unitary(dim, rng);
    Matrix cols = u.leftCols(static_cast<Eigen::Index>(rank));
    return cols * cols.adjoint();
}

/// Eigenvalues of a 2x2 Hermitian matrix in closed form, ascending.
inline std::pair<double, double> eig2(const Matrix &m) {
    double a = m(0, 0).real(), d = m(1, 1).real();
    double r = std::sqrt((a - d) * (a - d) / 4.0 + std::norm(m(0, 1)));
    return {(a + d) / 2.0 - r, (a + d) / 2.0 + r};
}

/// Capacity oracle: for the members of `family` above the fidelity
/// threshold, the Gram matrix G = [<e_i|P|e_j>] satisfies G <= I and has rank
/// at most m, so (count)(1 - 1/4m) < Tr G <= m. Returns the count and whether
/// those spectral facts hold.
struct GramOracle {
    size_t count = 0;
    bool spectrum_ok = true;
    bool count_below_2m = true;
};

inline GramOracle gram_oracle(const Matrix &p, const std::vector<Vector> &family) {
    const double m = std::round(p.trace().real());
    GramOracle o;
    if (m < 0.5) {
        return o;
    }
    const double thr = 1.0 - 1.0 / (4.0 * m);
    std::vector<Vector> hits;
    for (const auto &e : family) {
        if ((e.adjoint() * p * e)(0, 0).real() > thr) {
            hits.push_back(e);
        }
    }
    o.count = hits.size();
    if (hits.empty()) {
        return o;
    }
    Matrix g(static_cast<Eigen::Index>(hits.size()), static_cast<Eigen::Index>(hits.size()));
    for (size_t i = 0; i < hits.size(); i++) {
        for (size_t j = 0; j < hits.size(); j++) {
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (hits[i].adjoint() * p * hits[j])(0, 0);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const auto &ev = es.eigenvalues();
    const auto n = ev.size();
    double tail = 0;
    for (Eigen::Index i = 0; i < n - static_cast<Eigen::Index>(m); i++) {
        tail += std::abs(ev(i));
    }
    o.spectrum_ok = ev.maxCoeff() <= 1.0 + 1e-9 && tail <= 1e-8;
    o.count_below_2m = static_cast<double>(o.count) * thr < m + 1e-9 && o.count < 2 * static_cast<size_t>(m);
    return o;
}

/// Orthonormal family: the first `near` members hug the range of P, the
/// rest are random; all are orthonormalized together.
inline std::vector<Vector> capacity_family(const Matrix &p, size_t size, size_t near, double noise,
                                           std::mt19937_64 &rng) {
    const auto dim = p.rows();
    Matrix cols(dim, static_cast<Eigen::Index>(size));
    for (size_t c = 0; c < size; c++) {
        Vector v = random_vector(static_cast<size_t>(dim), rng);
        if (c < near) {
            v = p * v;
            if (v.norm() < 1e-12) {
                v = random_vector(static_cast<size_t>(dim), rng);
            }
            v = v.normalized() + noise * random_vector(static_cast<size_t>(dim), rng);
        }
        cols.col(static_cast<Eigen::Index>(c)) = v;
    }
    Eigen::HouseholderQR<Matrix> qr(cols);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, static_cast<Eigen::Index>(size));
    std::vector<Vector> out;
    for (size_t c = 0; c < size; c++) {
        out.push_back(q.col(static_cast<Eigen::Index>(c)));
    }
    return out;
}

/// Value for `key` in corpus/golden/constants.txt (the rest of the line).
inline std::string golden_constant(const std::string &key) {
    std::istringstream in(slurp_file(corpus_path("golden/constants.txt")));
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " ", 0) == 0) {
            return line.substr(key.size() + 1);
        }
    }
    throw std::runtime_error("no golden constant " + key);
}

inline double golden_real(const std::string &key) {
    return std::stod(golden_constant(key));
}

inline std::vector<std::string> corpus_strings() {
    std::vector<std::string> out;
    std::istringstream in(slurp_file(corpus_path("corpus4.txt")));
    for (std::string line; std::getline(in, line);) {
        std::istringstream words(line.substr(0, line.find("//")));
        for (std::string w; words >> w;) {
            out.push_back(word_parse(w));
        }
    }
    return out;
}

}  // namespace qtmlab::testing
