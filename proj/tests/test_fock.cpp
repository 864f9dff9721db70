#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qmetro/fock.hpp"

using namespace qmetro;

namespace {

Eigen::Matrix2cd coupler5050() {
    Eigen::Matrix2cd u;
    const double s = 1.0 / std::sqrt(2.0);
    u << cxd(s, 0), cxd(0, s), cxd(0, s), cxd(s, 0);
    return u;
}

Eigen::Matrix2cd coupler(double r) {
    Eigen::Matrix2cd u;
    u << cxd(std::sqrt(r), 0), cxd(0, std::sqrt(1 - r)), cxd(0, std::sqrt(1 - r)),
        cxd(std::sqrt(r), 0);
    return u;
}

long binomial(int n, int k) {
    long v = 1;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

}  // namespace

TEST_CASE("basis enumeration covers the documented cases") {
    const FockBasis b42 = FockBasis::enumerate(4, 2);
    CHECK(b42.size() == 10);
    CHECK(b42.states.front() == ModeOccupation{2, 0, 0, 0});
    CHECK(b42.states.back() == ModeOccupation{0, 0, 0, 2});

    const FockBasis b13 = FockBasis::enumerate(1, 3);
    CHECK(b13.size() == 1);
    CHECK(b13.states[0] == ModeOccupation{3});

    CHECK(FockBasis::enumerate(3, 2).size() == 6);
}

TEST_CASE("basis enumeration is complete, duplicate-free and descending") {
    for (int m = 1; m <= 4; ++m) {
        for (int n = 0; n <= 3; ++n) {
            const FockBasis basis = FockBasis::enumerate(m, n);
            CHECK(basis.size() == static_cast<std::size_t>(binomial(n + m - 1, n)));
            for (std::size_t i = 0; i < basis.size(); ++i) {
                CHECK(basis.states[i].photons() == n);
                if (i > 0) CHECK(basis.states[i - 1].occ > basis.states[i].occ);
            }
        }
    }
}

TEST_CASE("permanent of small fixed matrices") {
    Eigen::MatrixXcd one(1, 1);
    one << cxd(3.5, -1.0);
    CHECK(std::abs(permanent(one) - cxd(3.5, -1.0)) < 1e-15);

    Eigen::MatrixXcd two(2, 2);
    two << cxd(1, 1), cxd(2, 0), cxd(0, 3), cxd(1, -1);
    const cxd expected = cxd(1, 1) * cxd(1, -1) + cxd(2, 0) * cxd(0, 3);
    CHECK(std::abs(permanent(two) - expected) < 1e-14);

    // 4x4 of all entries 1/2: 4! / 16 = 1.5
    Eigen::MatrixXcd half = Eigen::MatrixXcd::Constant(4, 4, cxd(0.5, 0.0));
    CHECK(std::abs(permanent(half) - cxd(1.5, 0.0)) < 1e-12);
    CHECK(std::abs(oracle::permanent_naive(half) - cxd(1.5, 0.0)) < 1e-12);
}

TEST_CASE("permanent matches the permutation-sum oracle") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int k = 1; k <= 5; ++k) {
        for (int rep = 0; rep < 8; ++rep) {
            Eigen::MatrixXcd a(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) a(i, j) = cxd(gauss(rng), gauss(rng));
            const cxd fast = permanent(a);
            const cxd slow = oracle::permanent_naive(a);
            CHECK(std::abs(fast - slow) <= 1e-10 * std::max(1.0, std::abs(slow)));
        }
    }
}

TEST_CASE("permanent rejects non-square input") {
    CHECK_THROWS_AS(permanent(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("evolve through the identity is the identity") {
    const PureState s = evolve(Eigen::MatrixXcd::Identity(4, 4), ModeOccupation{0, 0, 1, 1});
    const int idx = s.basis.index_of(ModeOccupation{0, 0, 1, 1});
    CHECK(std::abs(s.amplitudes(idx) - cxd(1, 0)) < 1e-14);
    CHECK(std::abs(s.norm() - 1.0) < 1e-14);
}

TEST_CASE("two photons bunch at a balanced coupler") {
    const PureState s = evolve(coupler5050(), ModeOccupation{1, 1});
    const FockBasis& b = s.basis;
    // (|20> + |02>) with weight 1/2 each and nothing on |11>; the overall
    // phase is not observable.
    CHECK(std::abs(s.amplitudes(b.index_of(ModeOccupation{1, 1}))) < 1e-14);
    CHECK(std::abs(s.amplitudes(b.index_of(ModeOccupation{2, 0}))) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    Eigen::VectorXcd expected = Eigen::VectorXcd::Zero(3);
    expected(b.index_of(ModeOccupation{2, 0})) = cxd(0, 1.0 / std::sqrt(2.0));
    expected(b.index_of(ModeOccupation{0, 2})) = cxd(0, 1.0 / std::sqrt(2.0));
    CHECK(oracle::distance_up_to_global_phase(s.amplitudes, expected) < 1e-12);
}

TEST_CASE("evolve rejects dimension mismatches") {
    CHECK_THROWS_AS(evolve(Eigen::MatrixXcd::Identity(3, 3), ModeOccupation{0, 1}),
                    std::invalid_argument);
}

TEST_CASE("evolve preserves the norm for random unitaries") {
    std::mt19937_64 rng(11);
    for (int m = 2; m <= 4; ++m) {
        for (int n = 1; n <= 2; ++n) {
            for (int rep = 0; rep < 5; ++rep) {
                const Eigen::MatrixXcd u = oracle::random_unitary(m, rng);
                ModeOccupation input(std::vector<int>(m, 0));
                input.occ[0] = n;
                CHECK(std::abs(evolve(u, input).norm() - 1.0) < 1e-9);
            }
        }
    }
}

TEST_CASE("probability vectors are normalized for random unitaries") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXcd u = oracle::random_unitary(4, rng);
        const ModeOccupation input{0, 1, 1, 0};
        CHECK(probabilities_indistinguishable(u, input).sum() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(probabilities_distinguishable(u, input).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("coupler outcome probabilities, both photon classes") {
    const ModeOccupation input{1, 1};
    const Eigen::VectorXd p_ind = probabilities_indistinguishable(coupler5050(), input);
    const FockBasis b = FockBasis::enumerate(2, 2);
    CHECK(p_ind(b.index_of(ModeOccupation{2, 0})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p_ind(b.index_of(ModeOccupation{0, 2})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p_ind(b.index_of(ModeOccupation{1, 1})) == doctest::Approx(0.0).epsilon(1e-12));

    const Eigen::VectorXd p_dist = probabilities_distinguishable(coupler5050(), input);
    CHECK(p_dist(b.index_of(ModeOccupation{1, 1})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p_dist(b.index_of(ModeOccupation{2, 0})) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p_dist(b.index_of(ModeOccupation{0, 2})) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("identity routing for distinguishable photons") {
    const Eigen::VectorXd p =
        probabilities_distinguishable(Eigen::MatrixXcd::Identity(4, 4), ModeOccupation{0, 0, 1, 1});
    const FockBasis b = FockBasis::enumerate(4, 2);
    CHECK(p(b.index_of(ModeOccupation{0, 0, 1, 1})) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("distinguishable statistics require exactly two photons") {
    CHECK_THROWS_AS(probabilities_distinguishable(Eigen::MatrixXcd::Identity(2, 2),
                                                  ModeOccupation{1, 0}),
                    std::invalid_argument);
}

TEST_CASE("two-photon interference law across coupler reflectivities") {
    const FockBasis b = FockBasis::enumerate(2, 2);
    const int coincidence = b.index_of(ModeOccupation{1, 1});
    for (double r : {0.1, 0.3, 0.5, 0.62, 0.9}) {
        const Eigen::VectorXd p_ind = probabilities_indistinguishable(coupler(r), ModeOccupation{1, 1});
        const Eigen::VectorXd p_dist = probabilities_distinguishable(coupler(r), ModeOccupation{1, 1});
        CHECK(p_ind(coincidence) ==
              doctest::Approx((2 * r - 1) * (2 * r - 1)).epsilon(1e-10));
        CHECK(p_dist(coincidence) ==
              doctest::Approx(r * r + (1 - r) * (1 - r)).epsilon(1e-10));
    }
}

TEST_CASE("mode relabeling permutes the output distribution") {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXcd u = oracle::random_unitary(4, rng);
    const ModeOccupation input{0, 1, 0, 1};

    // Cyclic relabeling sigma(i) = i+1 mod 4.
    Eigen::Matrix4cd perm = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 4; ++i) perm((i + 1) % 4, i) = 1.0;
    const Eigen::MatrixXcd u_relabeled = perm * u * perm.transpose();
    ModeOccupation input_relabeled{1, 0, 1, 0};

    const Eigen::VectorXd p = probabilities_indistinguishable(u, input);
    const Eigen::VectorXd q = probabilities_indistinguishable(u_relabeled, input_relabeled);
    const FockBasis basis = FockBasis::enumerate(4, 2);
    for (std::size_t t = 0; t < basis.size(); ++t) {
        std::vector<int> relabeled(4);
        for (int i = 0; i < 4; ++i) relabeled[(i + 1) % 4] = basis.states[t].occ[i];
        const int tr = basis.index_of(ModeOccupation(relabeled));
        CHECK(q(tr) == doctest::Approx(p(static_cast<int>(t))).epsilon(1e-10));
    }
}

TEST_CASE("visibility mixing") {
    const ModeOccupation input{1, 1};
    const Eigen::VectorXd p_ind = probabilities_indistinguishable(coupler5050(), input);
    const Eigen::VectorXd p_dist = probabilities_distinguishable(coupler5050(), input);

    CHECK((mix_visibility(p_ind, p_dist, 1.0) - p_ind).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((mix_visibility(p_ind, p_dist, 0.0) - p_dist).cwiseAbs().maxCoeff() < 1e-14);

    const Eigen::VectorXd mixed = mix_visibility(p_ind, p_dist, 0.5);
    const FockBasis b = FockBasis::enumerate(2, 2);
    CHECK(mixed(b.index_of(ModeOccupation{1, 1})) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mixed(b.index_of(ModeOccupation{2, 0})) == doctest::Approx(0.375).epsilon(1e-12));

    CHECK_THROWS_AS(mix_visibility(p_ind, p_dist, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(mix_visibility(p_ind, p_dist, -0.1), std::invalid_argument);
}
