#include <doctest.h>

#include "ggsp/errors.hpp"
#include "ggsp/graph.hpp"
#include "ggsp/rng.hpp"
#include "ggsp/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

using namespace ggsp;

namespace {

Eigen::MatrixXd random_symmetric(int n, Rng& rng) {
    Eigen::MatrixXd a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = rng.gaussian();
    return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_signal(int n, int d, Rng& rng) {
    Eigen::MatrixXd x(n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) x(r, c) = rng.gaussian();
    return x;
}

JointBasis random_joint_basis(int n, int d, Rng& rng) {
    return {eigendecompose(random_symmetric(n, rng)), eigendecompose(random_symmetric(d, rng))};
}

} // namespace

TEST_SUITE("spectral") {

TEST_CASE("eigendecompose path Laplacian") {
    Eigen::MatrixXd l(2, 2);
    l << 1, -1, -1, 1;
    SpectralBasis b = eigendecompose(l);
    CHECK(b.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.eigenvalues(1) == doctest::Approx(2.0));
    double s = 1.0 / std::sqrt(2.0);
    CHECK(b.eigenvectors(0, 0) == doctest::Approx(s));
    CHECK(b.eigenvectors(1, 0) == doctest::Approx(s));
    CHECK(b.eigenvectors(0, 1) == doctest::Approx(s)); // tie broken at index 0
    CHECK(b.eigenvectors(1, 1) == doctest::Approx(-s));
    CHECK_FALSE(b.degenerate);
}

TEST_CASE("eigendecompose degeneracy detection") {
    Eigen::MatrixXd l = graph_matrices(cycle_graph(4)).laplacian;
    SpectralBasis b = eigendecompose(l);
    CHECK(b.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(b.eigenvalues(1) == doctest::Approx(2.0));
    CHECK(b.eigenvalues(2) == doctest::Approx(2.0));
    CHECK(b.eigenvalues(3) == doctest::Approx(4.0));
    CHECK(b.degenerate);

    SpectralBasis id = eigendecompose(Eigen::MatrixXd::Identity(3, 3));
    CHECK(id.eigenvalues.isApproxToConstant(1.0));
    CHECK(id.degenerate);

    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 0, 0;
    CHECK_THROWS_AS(eigendecompose(asym), NotSymmetric);
}

TEST_CASE("eigendecompose is deterministic and reconstructs") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd a = random_symmetric(3 + static_cast<int>(rng.uniform_index(5)), rng);
        SpectralBasis b1 = eigendecompose(a);
        SpectralBasis b2 = eigendecompose(a);
        CHECK((b1.eigenvectors - b2.eigenvectors).norm() == 0.0);
        CHECK((b1.eigenvalues - b2.eigenvalues).norm() == 0.0);
        // orthonormality
        Eigen::MatrixXd vtv = b1.eigenvectors.transpose() * b1.eigenvectors;
        CHECK((vtv - Eigen::MatrixXd::Identity(a.rows(), a.rows())).cwiseAbs().maxCoeff() < 1e-10);
        // reconstruction
        CHECK((b1.reconstruct() - a).norm() < 1e-8 * std::max(1.0, a.norm()));
        // sign convention: largest-abs entry of each column positive
        for (Eigen::Index c = 0; c < b1.eigenvectors.cols(); ++c) {
            Eigen::Index imax = 0;
            b1.eigenvectors.col(c).cwiseAbs().maxCoeff(&imax);
            CHECK(b1.eigenvectors(imax, c) > 0.0);
        }
    }
}

TEST_CASE("cycle harmonic basis") {
    SpectralBasis b = fourier_basis_cycle(4);
    CHECK(b.eigenvalues(0) == doctest::Approx(0.0));
    CHECK(b.eigenvalues(1) == doctest::Approx(2.0));
    CHECK(b.eigenvalues(2) == doctest::Approx(2.0));
    CHECK(b.eigenvalues(3) == doctest::Approx(4.0));
    CHECK(b.degenerate);
    // constant column carries eigenvalue 0
    CHECK(b.eigenvectors.col(0).isApproxToConstant(0.5, 1e-14));

    for (int t : {3, 5, 8, 24}) {
        SpectralBasis basis = fourier_basis_cycle(t);
        Eigen::MatrixXd vtv = basis.eigenvectors.transpose() * basis.eigenvectors;
        CHECK((vtv - Eigen::MatrixXd::Identity(t, t)).cwiseAbs().maxCoeff() < 1e-12);
        // columns are genuine Laplacian eigenvectors
        Eigen::MatrixXd l = graph_matrices(cycle_graph(t)).laplacian;
        Eigen::MatrixXd lv = l * basis.eigenvectors;
        Eigen::MatrixXd vd = basis.eigenvectors * basis.eigenvalues.asDiagonal();
        CHECK((lv - vd).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(fourier_basis_cycle(2), InvalidSize);
}

TEST_CASE("jft on pure modes and zero") {
    Rng rng(7);
    JointBasis b = random_joint_basis(4, 3, rng);
    Eigen::MatrixXd x =
        b.graph_basis.eigenvectors.col(2) * b.hilbert_basis.eigenvectors.col(1).transpose();
    Eigen::MatrixXd c = jft(x, b);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 3);
    expect(2, 1) = 1.0;
    CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(jft(Eigen::MatrixXd::Zero(4, 3), b).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(jft(Eigen::MatrixXd::Zero(3, 3), b), DimensionMismatch);
}

TEST_CASE("jft equals the dense Kronecker transform") {
    Rng rng(13);
    for (int trial = 0; trial < 8; ++trial) {
        JointBasis b = random_joint_basis(4, 3, rng);
        Eigen::MatrixXd x = random_signal(4, 3, rng);
        Eigen::MatrixXd c = jft(x, b);
        // oracle: inner products of vec(x) with Kronecker basis columns
        Eigen::MatrixXd u = kronecker(b.graph_basis.eigenvectors, b.hilbert_basis.eigenvectors);
        Eigen::VectorXd coef = u.transpose() * vectorize(x);
        CHECK((vectorize(c) - coef).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("ijft inverts jft") {
    Rng rng(19);
    JointBasis b = random_joint_basis(5, 4, rng);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(5, 4);
    c(0, 0) = 1.0;
    Eigen::MatrixXd x = ijft(c, b);
    Eigen::MatrixXd expect =
        b.graph_basis.eigenvectors.col(0) * b.hilbert_basis.eigenvectors.col(0).transpose();
    CHECK((x - expect).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd y = random_signal(5, 4, rng);
    CHECK((ijft(jft(y, b), b) - y).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ijft(Eigen::MatrixXd::Zero(5, 4), b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convolution filters") {
    Rng rng(29);
    JointBasis b = random_joint_basis(4, 3, rng);
    Eigen::MatrixXd x = random_signal(4, 3, rng);

    CHECK((apply_convolution(Eigen::MatrixXd::Ones(4, 3), x, b) - x).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK(apply_convolution(Eigen::MatrixXd::Zero(4, 3), x, b).cwiseAbs().maxCoeff() < 1e-14);

    // indicator gain projects onto a single mode
    Eigen::MatrixXd two_modes =
        b.graph_basis.eigenvectors.col(1) * b.hilbert_basis.eigenvectors.col(1).transpose() +
        b.graph_basis.eigenvectors.col(2) * b.hilbert_basis.eigenvectors.col(2).transpose();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 3);
    g(1, 1) = 1.0;
    Eigen::MatrixXd kept = apply_convolution(g, two_modes, b);
    Eigen::MatrixXd expect =
        b.graph_basis.eigenvectors.col(1) * b.hilbert_basis.eigenvectors.col(1).transpose();
    CHECK((kept - expect).cwiseAbs().maxCoeff() < 1e-12);

    // composition is pointwise multiplication of gains
    Eigen::MatrixXd g1 = random_signal(4, 3, rng);
    Eigen::MatrixXd g2 = random_signal(4, 3, rng);
    Eigen::MatrixXd chained = apply_convolution(g2, apply_convolution(g1, x, b), b);
    Eigen::MatrixXd merged = apply_convolution(g1.cwiseProduct(g2), x, b);
    CHECK((chained - merged).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("shift operator matches the matrix route") {
    Rng rng(37);
    JointBasis b = random_joint_basis(5, 3, rng);

    // eigenvector in, scaled eigenvector out
    Eigen::MatrixXd mode =
        b.graph_basis.eigenvectors.col(3) * b.hilbert_basis.eigenvectors.col(2).transpose();
    Eigen::MatrixXd shifted = apply_shift(mode, b);
    double lambda = b.graph_basis.eigenvalues(3) * b.hilbert_basis.eigenvalues(2);
    CHECK((shifted - lambda * mode).cwiseAbs().maxCoeff() < 1e-10);

    // identity factors leave signals unchanged
    JointBasis id{identity_basis(4), identity_basis(3)};
    Eigen::MatrixXd x = random_signal(4, 3, rng);
    CHECK((apply_shift(x, id) - x).cwiseAbs().maxCoeff() < 1e-12);

    // spectral path equals A_g X A_h^T
    for (int trial = 0; trial < 8; ++trial) {
        JointBasis jb = random_joint_basis(4, 4, rng);
        Eigen::MatrixXd y = random_signal(4, 4, rng);
        Eigen::MatrixXd a_g = jb.graph_basis.reconstruct();
        Eigen::MatrixXd a_h = jb.hilbert_basis.reconstruct();
        Eigen::MatrixXd direct = a_g * y * a_h.transpose();
        CHECK((apply_shift(y, jb) - direct).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("Parseval identity, degenerate bases included") {
    Rng rng(43);
    JointBasis degenerate{fourier_basis_cycle(6), identity_basis(3)};
    JointBasis generic = random_joint_basis(6, 3, rng);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::MatrixXd x = random_signal(6, 3, rng);
        CHECK(std::abs(jft(x, degenerate).norm() - x.norm()) <= 1e-10);
        CHECK(std::abs(jft(x, generic).norm() - x.norm()) <= 1e-10);
    }
}

TEST_CASE("vectorization layout") {
    Eigen::MatrixXd x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd v = vectorize(x);
    CHECK(v(0) == 1.0); // row-major: vertex 0's coordinates first
    CHECK(v(2) == 3.0);
    CHECK(v(3) == 4.0);
    CHECK((unvectorize(v, 2, 3) - x).norm() == 0.0);
    CHECK_THROWS_AS(unvectorize(v, 3, 3), DimensionMismatch);

    // vec(phi psi^T) equals the Kronecker column phi (x) psi
    Eigen::MatrixXd phi(2, 1), psi(3, 1);
    phi << 1, 2;
    psi << 5, 7, 11;
    Eigen::MatrixXd outer = phi * psi.transpose();
    Eigen::MatrixXd k = kronecker(phi, psi);
    CHECK((vectorize(outer) - k.col(0)).norm() == 0.0);
}

TEST_CASE("basis CSV round trip") {
    Rng rng(53);
    SpectralBasis b = eigendecompose(random_symmetric(4, rng));
    std::istringstream in(basis_to_csv(b));
    SpectralBasis back = basis_from_csv(in);
    CHECK((back.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
}

} // TEST_SUITE
