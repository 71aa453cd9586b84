#include "drsoc/ambiguity.hpp"
#include "drsoc/errors.hpp"
#include "generators.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace drsoc;
using drsoc::testing::brute_vertices;
using drsoc::testing::dot;

namespace {

const std::vector<double> kZ1234{1, 2, 3, 4};

bool contains_point(const std::vector<FiniteDistribution>& pts, const std::vector<double>& p, double tol = 1e-9) {
    return std::any_of(pts.begin(), pts.end(), [&](const FiniteDistribution& d) {
        for (std::size_t i = 0; i < p.size(); ++i)
            if (std::abs(d[i] - p[i]) > tol) return false;
        return true;
    });
}

// Vertices of {p in simplex : G p <= h} by brute force in the reduced
// coordinates p_0..p_{k-2}, with p_{k-1} = 1 - sum of the others.
std::vector<std::vector<double>> brute_simplex_vertices(const PolytopeH& poly) {
    const std::size_t k = poly.dim;
    if (k == 1) return {{1.0}};
    drsoc::testing::Matrix g;
    std::vector<double> h;
    auto push = [&](const std::vector<double>& a, double b) {
        std::vector<double> red(k - 1);
        for (std::size_t i = 0; i + 1 < k; ++i) red[i] = a[i] - a[k - 1];
        g.push_back(red);
        h.push_back(b - a[k - 1]);
    };
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> a(k, 0.0);
        a[i] = -1.0;
        push(a, 0.0);
    }
    for (std::size_t r = 0; r < poly.G.size(); ++r) push(poly.G[r], poly.h[r]);
    std::vector<std::vector<double>> out;
    for (auto v : brute_vertices(g, h)) {
        double last = 1.0;
        for (double x : v) last -= x;
        v.push_back(last);
        out.push_back(v);
    }
    return out;
}

} // namespace

TEST(Ambiguity, SingletonWorstCaseIsExpectation) {
    const std::vector<double> z{1, 2};
    auto wc = worst_case_expectation(Singleton{FiniteDistribution({0.3, 0.7})}, z);
    EXPECT_DOUBLE_EQ(wc.value, 1.7);
    EXPECT_EQ(wc.maximizer, FiniteDistribution({0.3, 0.7}));
}

TEST(Ambiguity, CvarBallWorstCaseFillsUpperTail) {
    const CvarBall ball{FiniteDistribution::uniform(4), 0.5};
    auto wc = worst_case_expectation(ball, kZ1234);
    EXPECT_NEAR(wc.value, 3.5, 1e-12);
    const std::vector<double> expected{0, 0, 0.5, 0.5};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(wc.maximizer[i], expected[i], 1e-12);

    // oracle: brute-force vertices of the capped simplex
    const PolytopeH capped{4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}, {0.5, 0.5, 0.5, 0.5}};
    double best = -1e300;
    for (const auto& v : brute_simplex_vertices(capped)) best = std::max(best, dot(v, kZ1234));
    EXPECT_NEAR(best, 3.5, 1e-12);
    EXPECT_NEAR(cvar_closed_form(kZ1234, FiniteDistribution::uniform(4), 0.5), best, 1e-12);
}

TEST(Ambiguity, CvarClosedFormExamples) {
    const auto q = FiniteDistribution::uniform(4);
    EXPECT_NEAR(cvar_closed_form(kZ1234, q, 0.0), 2.5, 1e-15);
    EXPECT_NEAR(cvar_closed_form(kZ1234, q, 0.5), 3.5, 1e-15);
    EXPECT_NEAR(cvar_closed_form(kZ1234, q, 0.75), 4.0, 1e-15);
    EXPECT_THROW(cvar_closed_form(kZ1234, q, 1.0), InputError);
    EXPECT_THROW(cvar_closed_form(kZ1234, FiniteDistribution({0.5, 0.6, 0, 0}), 0.2), InputError);
}

TEST(Ambiguity, CvarPolytopeCapsDensity) {
    auto poly = to_polytope(CvarBall{FiniteDistribution::uniform(4), 0.5}, 4);
    ASSERT_EQ(poly.ineq.size(), 4u);
    EXPECT_EQ(poly.aux, 0u);
    for (double cap : poly.ineq_rhs) EXPECT_DOUBLE_EQ(cap, 0.5);
}

TEST(Ambiguity, WassersteinPointMassTransport) {
    const DenseMatrix d{{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
    const std::vector<double> z{0, 1, 2};
    const WassersteinBall ball{FiniteDistribution::point_mass(3, 0), 1.0, d};
    // oracle: from a point mass, move mass m <= min(1, r / d_0j) to one atom j
    double best = z[0];
    for (std::size_t j = 1; j < 3; ++j) best = std::max(best, z[0] + std::min(1.0, 1.0 / d[0][j]) * (z[j] - z[0]));
    ASSERT_DOUBLE_EQ(best, 1.0);
    EXPECT_NEAR(worst_case_expectation(ball, z).value, best, 1e-12);
}

TEST(Ambiguity, WassersteinRadiusExtremes) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 30; ++t) {
        const std::size_t k = 1 + t % 5;
        const auto q = drsoc::testing::random_distribution(rng, k);
        const auto d = drsoc::testing::random_metric(rng, k);
        std::vector<double> z(k);
        for (double& x : z) x = std::uniform_real_distribution<double>(-5, 5)(rng);
        EXPECT_NEAR(worst_case_expectation(WassersteinBall{q, 0.0, d}, z).value, q.expectation(z), 1e-12);
        double diam = 0.0;
        for (const auto& row : d) diam = std::max(diam, *std::max_element(row.begin(), row.end()));
        EXPECT_EQ(worst_case_expectation(WassersteinBall{q, diam, d}, z).value, *std::max_element(z.begin(), z.end()));
    }
}

TEST(Ambiguity, ZeroRadiusWassersteinIsPointMass) {
    const DenseMatrix d{{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
    const WassersteinBall ball{FiniteDistribution::point_mass(3, 0), 0.0, d};
    auto verts = generating_measures(ball);
    ASSERT_EQ(verts.size(), 1u);
    EXPECT_TRUE(contains_point(verts, {1, 0, 0}));
}

TEST(Ambiguity, NonconvexFiniteSetHasNoPolytope) {
    FiniteSet fs{{FiniteDistribution({1, 0}), FiniteDistribution({0, 1})}, false};
    EXPECT_THROW(to_polytope(fs, 2), InputError);
    fs.convexify = true;
    EXPECT_NO_THROW(to_polytope(fs, 2));
}

TEST(Ambiguity, EmptyPolytopeRejected) {
    EXPECT_THROW(PolytopeH::make(2, {{1, 0}, {0, 1}}, {0.2, 0.2}), InputError);
    EXPECT_NO_THROW(PolytopeH::make(2, {{1, 0}}, {0.2}));
}

TEST(Ambiguity, DimensionMismatchRejected) {
    const std::vector<double> z{1, 2, 3};
    EXPECT_THROW(worst_case_expectation(CvarBall{FiniteDistribution::uniform(2), 0.1}, z), InputError);
    EXPECT_THROW(to_polytope(CvarBall{FiniteDistribution::uniform(2), 0.1}, 3), InputError);
}

TEST(Ambiguity, VertexEnumerationExamples) {
    const PolytopeH simplex{3, {}, {}};
    auto v = vertex_enumerate(simplex);
    ASSERT_EQ(v.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> e(3, 0.0);
        e[i] = 1.0;
        EXPECT_TRUE(contains_point(v, e));
    }
    auto c = vertex_enumerate(to_polytope(CvarBall{FiniteDistribution::uniform(2), 0.5}, 2));
    ASSERT_EQ(c.size(), 2u);
    EXPECT_TRUE(contains_point(c, {1, 0}));
    EXPECT_TRUE(contains_point(c, {0, 1}));
    auto s = vertex_enumerate(to_polytope(Singleton{FiniteDistribution({0.2, 0.3, 0.5})}, 3));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_TRUE(contains_point(s, {0.2, 0.3, 0.5}));
    EXPECT_THROW(vertex_enumerate(PolytopeH{7, {}, {}}), InputError);
}

TEST(Ambiguity, VertexEnumerationMatchesBruteForce) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 60; ++t) {
        const std::size_t k = 2 + t % 4;
        PolytopeH poly = t % 2 ? drsoc::testing::random_polytope(rng, k)
                               : std::get<PolytopeH>(AmbiguitySpec{PolytopeH{k, {}, {}}});
        if (t % 2 == 0) {
            // CVaR caps written as an explicit polytope
            const auto q = drsoc::testing::random_distribution(rng, k);
            const double alpha = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
            for (std::size_t i = 0; i < k; ++i) {
                std::vector<double> row(k, 0.0);
                row[i] = 1.0;
                poly.G.push_back(row);
                poly.h.push_back(q[i] / (1.0 - alpha));
            }
        }
        const auto expected = brute_simplex_vertices(poly);
        const auto got = vertex_enumerate(poly);
        EXPECT_EQ(got.size(), expected.size()) << "trial " << t;
        for (const auto& e : expected) EXPECT_TRUE(contains_point(got, e, 1e-8)) << "trial " << t;
    }
}

TEST(Ambiguity, PolytopeOracleEquivalence) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 150; ++t) {
        const std::size_t k = 1 + t % 6;
        const int kind = 2 + t % 4; // convexified finite set, cvar, wasserstein, polytope
        const AmbiguitySpec spec = drsoc::testing::random_spec(rng, k, kind);
        std::vector<double> z(k);
        for (double& x : z) x = std::uniform_real_distribution<double>(-3, 3)(rng);
        double best = -1e300;
        for (const auto& v : generating_measures(spec)) best = std::max(best, v.expectation(z));
        const auto wc = worst_case_expectation(spec, z);
        EXPECT_NEAR(wc.value, best, 1e-7) << spec_type_name(spec) << " k=" << k;
        EXPECT_NEAR(wc.maximizer.expectation(z), wc.value, 1e-8);
        EXPECT_TRUE(wc.maximizer.valid());
    }
}

TEST(Ambiguity, WassersteinVerticesRequireMetric) {
    const DenseMatrix d{{0, 1, 5}, {1, 0, 1}, {5, 1, 0}};
    EXPECT_THROW(generating_measures(WassersteinBall{FiniteDistribution::uniform(3), 0.5, d}), InputError);
}

TEST(Ambiguity, CvarMatchesClosedFormOnRandomInputs) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 100; ++t) {
        const std::size_t k = 1 + t % 6;
        const auto q = drsoc::testing::random_distribution(rng, k);
        const double alpha = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
        std::vector<double> z(k);
        for (double& x : z) x = std::uniform_real_distribution<double>(-10, 10)(rng);
        EXPECT_NEAR(worst_case_expectation(CvarBall{q, alpha}, z).value, cvar_closed_form(z, q, alpha), 1e-8);
    }
}

TEST(Ambiguity, ConvexifiedFiniteSetMatchesEnumeration) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 1 + t % 5;
        auto fs = std::get<FiniteSet>(drsoc::testing::random_spec(rng, k, 1));
        std::vector<double> z(k);
        for (double& x : z) x = std::uniform_real_distribution<double>(-3, 3)(rng);
        const double plain = worst_case_expectation(fs, z).value;
        fs.convexify = true;
        EXPECT_NEAR(worst_case_expectation(fs, z).value, plain, 1e-9);
    }
}

TEST(Ambiguity, CoherenceAxioms) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 100; ++t) {
        const std::size_t k = 1 + t % 5;
        const auto spec = drsoc::testing::random_spec(rng, k, t % 6);
        std::vector<double> z(k), bigger(k), shifted(k), scaled(k);
        const double c = u(rng);
        const double lambda = std::abs(u(rng));
        for (std::size_t i = 0; i < k; ++i) {
            z[i] = u(rng);
            bigger[i] = z[i] + std::abs(u(rng));
            shifted[i] = z[i] + c;
            scaled[i] = lambda * z[i];
        }
        const double v = worst_case_expectation(spec, z).value;
        EXPECT_LE(v, worst_case_expectation(spec, bigger).value + 1e-8);
        EXPECT_NEAR(worst_case_expectation(spec, shifted).value, v + c, 1e-8);
        EXPECT_NEAR(worst_case_expectation(spec, scaled).value, lambda * v, 1e-8);
    }
}

TEST(Ambiguity, ConditionalReferenceByBayesRule) {
    JointReference joint;
    joint.masses[{}] = {0.5, 0.5};
    joint.masses[{0}] = {0.1, 0.4};
    joint.masses[{1}] = {0.0, 0.0};
    const ReferenceMeasure ref = joint;
    auto root = conditional_reference(ref, {});
    ASSERT_TRUE(root);
    EXPECT_DOUBLE_EQ((*root)[0], 0.5);
    auto left = conditional_reference(ref, {0});
    ASSERT_TRUE(left);
    EXPECT_NEAR((*left)[0], 0.2, 1e-15);
    EXPECT_NEAR((*left)[1], 0.8, 1e-15);
    EXPECT_FALSE(conditional_reference(ref, {1}));
    EXPECT_FALSE(conditional_reference(ref, {0, 1}));

    const ReferenceMeasure stagewise = StagewiseReference{{FiniteDistribution::uniform(2), FiniteDistribution::uniform(3)}};
    EXPECT_EQ(conditional_reference(stagewise, {1})->size(), 3u);
}

TEST(Ambiguity, SpecValidation) {
    EXPECT_TRUE(validate_spec(Singleton{FiniteDistribution({0.5, 0.6})}).has_value());
    EXPECT_TRUE(validate_spec(CvarBall{FiniteDistribution::uniform(2), 1.0}).has_value());
    EXPECT_TRUE(validate_spec(WassersteinBall{FiniteDistribution::uniform(2), -1.0, {{0, 1}, {1, 0}}}).has_value());
    EXPECT_TRUE(validate_spec(WassersteinBall{FiniteDistribution::uniform(2), 1.0, {{0, 1}, {2, 0}}}).has_value());
    EXPECT_TRUE(validate_spec(WassersteinBall{FiniteDistribution::uniform(2), 1.0, {{1, 1}, {1, 0}}}).has_value());
    EXPECT_FALSE(validate_spec(WassersteinBall{FiniteDistribution::uniform(2), 1.0, {{0, 1}, {1, 0}}}).has_value());
    EXPECT_TRUE(validate_spec(FiniteSet{}).has_value());
}
