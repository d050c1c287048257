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


#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace qtmlab;
using namespace qtmlab::testing;

namespace {

Operator diag(std::initializer_list<double> d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double v : d) {
        m(i, i) = v;
        i++;
    }
    return Operator(m);
}

Operator ket(const Vector &v) {
    return Operator(Matrix(v * v.adjoint()));
}

Vector qubit(cplx a, cplx b) {
    Vector v(2);
    v << a, b;
    return v;
}

ExactMatrix exact_diag(std::initializer_list<Rational> d) {
    ExactMatrix m(d.size());
    size_t i = 0;
    for (const auto &v : d) {
        m.at(i, i) = ExactComplex(v);
        i++;
    }
    return m;
}

}  // namespace

TEST(TraceDistance, SameOperatorIsZero) {
    std::mt19937_64 rng(1);
    Operator r(random_density(4, 2, rng));
    EXPECT_NEAR(trace_distance(r, r), 0.0, 1e-12);
}

TEST(TraceDistance, OrthogonalBasisStates) {
    EXPECT_NEAR(trace_distance(diag({1, 0}), diag({0, 1})), 1.0, 1e-12);
}

TEST(TraceDistance, ZeroVersusPlusMatchesClosedForm) {
    const double s = 1.0 / std::sqrt(2.0);
    Operator zero = ket(qubit(1, 0));
    Operator plus = ket(qubit(s, s));
    auto [lo, hi] = eig2(zero.dense() - plus.dense());
    const double oracle = 0.5 * (std::abs(lo) + std::abs(hi));
    EXPECT_NEAR(oracle, 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(trace_distance(zero, plus), oracle, 1e-12);
}

TEST(TraceDistance, TriangleInequality) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; trial++) {
        size_t d = 2 + trial % 7;
        Operator a(random_density(d, 1 + trial % 3, rng));
        Operator b(random_density(d, 1 + trial % 2, rng));
        Operator c(random_density(d, d, rng));
        EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + kEpsNum);
    }
}

TEST(TraceDistance, DimensionMismatchIsAnError) {
    EXPECT_THROW(trace_distance(diag({1, 0}), diag({1, 0, 0})), Error);
}

TEST(Fidelity, PureTargets) {
    PureState zero = PureState::basis(2, 0);
    EXPECT_NEAR(fidelity_pure(zero, diag({1, 0})), 1.0, 1e-12);
    EXPECT_NEAR(fidelity_pure(zero, diag({0, 1})), 0.0, 1e-12);
    EXPECT_NEAR(fidelity_pure(zero, diag({0.5, 0.5})), 0.5, 1e-12);
}

TEST(Fidelity, BoundedBelowByOneMinusDistance) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; trial++) {
        size_t d = 2 + trial % 6;
        PureState psi(random_vector(d, rng));
        Operator rho(random_density(d, 1 + trial % 3, rng));
        EXPECT_LE(1.0 - trace_distance(rho, psi.density()), fidelity_pure(psi, rho) + kEpsNum);
    }
}

TEST(PsdOrder, Examples) {
    std::mt19937_64 rng(4);
    Operator a(random_density(3, 2, rng));
    EXPECT_TRUE(psd_leq(a, a));
    EXPECT_TRUE(psd_leq(diag({0.5, 0}), diag({1, 0.2})));
    EXPECT_FALSE(psd_leq(diag({1, 0}), diag({0.5, 1})));
}

TEST(PsdOrder, TraceAgainstPsdIsMonotone) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; trial++) {
        size_t d = 2 + trial % 5;
        Matrix a = random_density(d, 2, rng) * 0.5;
        Matrix b = a + random_density(d, 1, rng) * 0.3;
        ASSERT_TRUE(psd_leq(Operator(a), Operator(b)));
        Matrix c = random_density(d, d, rng);
        EXPECT_LE((a * c).trace().real(), (b * c).trace().real() + kEpsNum);
    }
}

TEST(ThresholdProjection, Examples) {
    Operator n = threshold_projection(diag({0.9, 0.3}), 0.5);
    EXPECT_NEAR(max_abs(n.dense() - diag({1, 0}).dense()), 0.0, 1e-12);
    Operator z = threshold_projection(Operator::zero(3), 0.5);
    EXPECT_NEAR(max_abs(z.dense()), 0.0, 1e-12);
}

TEST(ThresholdProjection, EigenvalueAtThresholdIsIncluded) {
    Operator n = threshold_projection(diag({0.5, 0.2}), 0.5);
    EXPECT_NEAR(n.trace().real(), 1.0, 1e-12);
}

TEST(ThresholdProjection, TraceBoundOnRandomPsd) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; trial++) {
        size_t d = 2 + trial % 9;
        Operator o(Matrix(random_density(d, 1 + trial % d, rng) * 1.5));
        Operator n = threshold_projection(o, 0.5);
        EXPECT_TRUE(is_projection(n));
        EXPECT_EQ(n.flags.projection, Tri::Yes);
        EXPECT_LE(n.trace().real(), 2.0 * o.trace().real() + kEpsNum);
    }
}

TEST(ThresholdProjection, RejectsNonPositiveThetaAndNonPsd) {
    EXPECT_THROW(threshold_projection(diag({1, 0}), 0.0), Error);
    EXPECT_THROW(threshold_projection(diag({1, -0.5}), 0.5), Error);
}

TEST(Capacity, SingleHit) {
    auto r = capacity_check(diag({1, 0}), {PureState::basis(2, 0)});
    EXPECT_EQ(r.count, 1u);
    EXPECT_TRUE(r.bound_holds);
}

TEST(Capacity, PerturbedTopEigenvectorsOfRankThree) {
    std::mt19937_64 rng(7);
    Matrix p = random_projection(16, 3, rng);
    auto fam = capacity_family(p, 5, 5, 0.05, rng);
    auto oracle = gram_oracle(p, fam);
    std::vector<PureState> family(fam.begin(), fam.end());
    auto r = capacity_check(Operator(p), family);
    EXPECT_EQ(r.count, oracle.count);
    EXPECT_LT(r.count, 6u);
    EXPECT_TRUE(oracle.spectrum_ok);
    EXPECT_TRUE(r.bound_holds);
}

TEST(Capacity, OrthonormalFamilyBelowThresholdCountsZero) {
    // P = diag(1, 0, 0, 0), m = 1; members sit at fidelity exactly 1/2 or 0.
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<PureState> fam;
    Vector a = Vector::Zero(4), b = Vector::Zero(4);
    a << s, s, 0, 0;
    b << s, -s, 0, 0;
    fam.emplace_back(a);
    fam.emplace_back(b);
    auto r = capacity_check(diag({1, 0, 0, 0}), fam);
    EXPECT_EQ(r.count, 0u);
    EXPECT_TRUE(r.bound_holds);
}

TEST(Capacity, RandomTrialsNeverViolate) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 2000; trial++) {
        size_t d = 2 + static_cast<size_t>(rng() % 31);
        size_t m = 1 + static_cast<size_t>(rng() % std::min<size_t>(8, d));
        Matrix p = random_projection(d, m, rng);
        size_t size = 1 + static_cast<size_t>(rng() % d);
        auto fam = capacity_family(p, size, std::min(size, 2 * m), 0.02, rng);
        std::vector<PureState> family(fam.begin(), fam.end());
        auto r = capacity_check(Operator(p), family);
        ASSERT_TRUE(r.bound_holds) << "trial " << trial;
        if (trial % 20 == 0) {
            auto o = gram_oracle(p, fam);
            EXPECT_EQ(o.count, r.count);
            EXPECT_TRUE(o.spectrum_ok);
            EXPECT_TRUE(o.count_below_2m);
        }
    }
}

TEST(Capacity, RejectsNonOrthonormalFamily) {
    std::vector<PureState> fam{PureState::basis(2, 0), PureState::basis(2, 0)};
    EXPECT_THROW(capacity_check(diag({1, 0}), fam), Error);
}

TEST(NullSpace, Examples) {
    auto ns = null_space(diag({0, 1}), 1e-9);
    ASSERT_EQ(ns.size(), 1u);
    EXPECT_NEAR(std::abs(ns[0].coeffs()(0)), 1.0, 1e-12);
    EXPECT_EQ(null_space(Operator::zero(5), 1e-9).size(), 5u);
}

TEST(NullSpace, ComplementOfRandomProjection) {
    std::mt19937_64 rng(9);
    Matrix p = random_projection(12, 5, rng);
    auto ns = null_space(Operator(p), 1e-9);
    ASSERT_EQ(ns.size(), 7u);
    for (const auto &v : ns) {
        EXPECT_LE((p * v.coeffs()).norm(), 1e-9);
    }
}

TEST(ExactBackend, DiagonalResultsMatchFloat) {
    ExactMatrix a = exact_diag({Rational(1, 3), Rational(2, 3), 0});
    ExactMatrix b = exact_diag({Rational(1, 2), Rational(1, 4), Rational(1, 4)});
    Operator ea(a), eb(b);
    Operator fa(a.shadow()), fb(b.shadow());
    EXPECT_NEAR(trace_distance(ea, eb), trace_distance(fa, fb), 1e-12);
    EXPECT_EQ(psd_leq(ea, eb), psd_leq(fa, fb));
    Operator en = threshold_projection(ea, 0.5);
    Operator fn = threshold_projection(fa, 0.5);
    EXPECT_EQ(en.backend(), Backend::Exact);
    EXPECT_NEAR(max_abs(en.dense() - fn.dense()), 0.0, 1e-12);
}

TEST(ExactBackend, PermutationTraceDistanceMatchesFloat) {
    ExactMatrix a = exact_diag({1, 0});
    ExactMatrix swap(2);
    swap.at(0, 1) = ExactComplex(1);
    swap.at(1, 0) = ExactComplex(1);
    ExactMatrix b = swap * a * swap.adjoint();
    EXPECT_NEAR(trace_distance(Operator(a), Operator(b)), 1.0, 1e-12);
    EXPECT_NEAR(trace_distance(Operator(a.shadow()), Operator(b.shadow())), 1.0, 1e-12);
}

TEST(Serialization, RoundTrip) {
    std::mt19937_64 rng(10);
    Operator a(random_density(3, 2, rng));
    std::istringstream in(operator_text(a));
    Operator b = read_operator(in);
    EXPECT_EQ(max_abs(a.dense() - b.dense()), 0.0);

    ExactMatrix e = exact_diag({Rational(1, 3), Rational(2, 3)});
    std::istringstream ein(operator_text(Operator(e)));
    Operator eb = read_operator(ein);
    ASSERT_EQ(eb.backend(), Backend::Exact);
    EXPECT_TRUE(*eb.exact() == e);
}

TEST(Serialization, MalformedInputs) {
    std::istringstream zero_den("op 1 exact\nentry 0 0 1/0 0\n");
    EXPECT_THROW(read_operator(zero_den), Error);
    std::istringstream out_of_range("op 2 float\nentry 2 0 1 0\n");
    EXPECT_THROW(read_operator(out_of_range), Error);
}

TEST(Rational, Parsing) {
    EXPECT_EQ(*parse_rational("3/4"), Rational(3, 4));
    EXPECT_EQ(*parse_rational("-0.25"), Rational(-1, 4));
    EXPECT_EQ(*parse_rational("1e-2"), Rational(1, 100));
    EXPECT_FALSE(parse_rational("abc").has_value());
    EXPECT_THROW(parse_rational("1/0"), Error);
}
