#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ark/linalg/matrix.hpp"
#include "ark/linalg/sylvester.hpp"
#include "ark/linalg/tridiagonal.hpp"
#include "test_util.hpp"

using namespace ark;
using ark::test::random_matrix;

namespace {

// Diagonally dominant tridiagonal with random bands.
TridiagonalOperator random_dominant(std::mt19937_64& rng, std::size_t n, bool periodic = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> lo(n), di(n), up(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = u(rng);
        up[i] = u(rng);
        di[i] = (u(rng) > 0 ? 1.0 : -1.0) * (3.0 + std::abs(u(rng)));
    }
    std::optional<PeriodicCorners> c;
    if (periodic) {
        c = PeriodicCorners{u(rng), u(rng)};
    }
    return {lo, di, up, c};
}

} // namespace

TEST(Tridiagonal, IdentitySolveReturnsRhs) {
    std::mt19937_64 rng(1);
    const Matrix rhs = random_matrix(rng, 10, 3);
    EXPECT_EQ(TridiagonalOperator::identity(10).solve(rhs), rhs);
}

TEST(Tridiagonal, TwoByTwoByHand) {
    const TridiagonalOperator op({0.0, 1.0}, {2.0, 2.0}, {1.0, 0.0});
    Matrix rhs(2, 1);
    rhs << 3.0, 3.0;
    const Matrix x = op.solve(rhs);
    EXPECT_NEAR(x(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(x(1, 0), 1.0, 1e-15);
}

TEST(Tridiagonal, MatchesDenseLu) {
    std::mt19937_64 rng(2);
    const TridiagonalOperator op = random_dominant(rng, 64);
    const Matrix rhs = random_matrix(rng, 64, 4);
    const Matrix oracle = op.dense().partialPivLu().solve(rhs);
    EXPECT_LE((op.solve(rhs) - oracle).norm(), 1e-12 * oracle.norm());
}

TEST(Tridiagonal, ApplyMatchesDenseProduct) {
    std::mt19937_64 rng(3);
    for (bool periodic : {false, true}) {
        const TridiagonalOperator op = random_dominant(rng, 37, periodic);
        const Matrix x = random_matrix(rng, 37, 5);
        const Matrix dense = op.dense() * x;
        EXPECT_LE((op.apply(x) - dense).norm(), 1e-14 * dense.norm() * 10);
    }
}

TEST(Tridiagonal, SolveApplyRoundTripRandomized) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> size(1, 80);
    for (int trial = 0; trial < 256; ++trial) {
        const auto n = static_cast<std::size_t>(size(rng));
        const TridiagonalOperator op = random_dominant(rng, n);
        const Matrix x = random_matrix(rng, static_cast<Eigen::Index>(n), 2);
        const Matrix back = op.solve(op.apply(x));
        ASSERT_LE((back - x).norm(), 1e-12 * x.norm()) << "trial " << trial << " n=" << n;
    }
}

TEST(Tridiagonal, PeriodicSolveMatchesDenseLu) {
    std::mt19937_64 rng(5);
    for (std::size_t n : {3u, 4u, 17u, 128u}) {
        const TridiagonalOperator op = random_dominant(rng, n, true);
        const Matrix rhs = random_matrix(rng, static_cast<Eigen::Index>(n), 3);
        const Matrix oracle = op.dense().partialPivLu().solve(rhs);
        EXPECT_LE((op.solve(rhs) - oracle).norm(), 1e-12 * oracle.norm()) << n;
    }
}

TEST(Tridiagonal, SingularThrows) {
    EXPECT_THROW(TridiagonalOperator::zero(5).solve(Matrix::Ones(5, 1)), SingularOperator);
}

TEST(Tridiagonal, ShapeErrors) {
    EXPECT_THROW(TridiagonalOperator::identity(4).solve(Matrix::Ones(5, 1)), DimensionMismatch);
    EXPECT_THROW(TridiagonalOperator({1.0}, {1.0, 2.0}, {1.0, 1.0}), DimensionMismatch);
}

TEST(Tridiagonal, SettersInvalidateFactorization) {
    TridiagonalOperator op = TridiagonalOperator::identity(4);
    const Matrix rhs = Matrix::Ones(4, 1);
    EXPECT_EQ(op.solve(rhs), rhs);
    for (std::size_t i = 0; i < 4; ++i) {
        op.set_diag(i, 2.0);
    }
    EXPECT_NEAR(op.solve(rhs)(0, 0), 0.5, 1e-15);
}

TEST(MgsQr, OrthonormalInputGivesIdentityR) {
    std::mt19937_64 rng(6);
    const Matrix q0 = random_matrix(rng, 30, 5).householderQr().householderQ() * Matrix::Identity(30, 5);
    const QrResult qr = mgs_qr(q0);
    ASSERT_EQ(qr.q.cols(), 5);
    EXPECT_LE((qr.r.cwiseAbs() - Matrix::Identity(5, 5)).norm(), 1e-13);
    EXPECT_LE((qr.q.cwiseAbs() - q0.cwiseAbs()).norm(), 1e-13);
}

TEST(MgsQr, DuplicateDirectionDeflates) {
    Vector v(4);
    v << 1.0, 2.0, 2.0, 4.0;
    Matrix m(4, 2);
    m << v, 2.0 * v;
    const QrResult qr = mgs_qr(m);
    ASSERT_EQ(qr.q.cols(), 1);
    EXPECT_NEAR(qr.r(0, 0), v.norm(), 1e-14);
    EXPECT_NEAR(qr.r(0, 1), 2.0 * v.norm(), 1e-14);
}

TEST(MgsQr, RandomReconstructionAndIdempotence) {
    std::mt19937_64 rng(7);
    const Matrix m = random_matrix(rng, 100, 8);
    const QrResult qr = mgs_qr(m);
    EXPECT_LE((qr.q * qr.r - m).norm(), 1e-12 * m.norm());
    EXPECT_LE((qr.q.transpose() * qr.q - Matrix::Identity(8, 8)).norm(), 1e-13);
    const QrResult again = mgs_qr(qr.q);
    EXPECT_LE((again.q.cwiseAbs() - qr.q.cwiseAbs()).norm(), 1e-13);
}

TEST(ReducedSvd, DiagonalInput) {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = 3.0;
    s(1, 1) = 1.0;
    const SvdResult r = reduced_svd(s);
    ASSERT_EQ(r.sigma.size(), 2u);
    EXPECT_DOUBLE_EQ(r.sigma[0], 3.0);
    EXPECT_DOUBLE_EQ(r.sigma[1], 1.0);
    EXPECT_LE((r.left.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(ReducedSvd, ZeroInput) {
    const SvdResult r = reduced_svd(Matrix::Zero(3, 3));
    for (double s : r.sigma) {
        EXPECT_LE(s, 1e-300);
    }
}

TEST(ReducedSvd, MatchesEigenvaluesOfGram) {
    std::mt19937_64 rng(8);
    const Matrix s = random_matrix(rng, 20, 20);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.transpose() * s);
    const SvdResult r = reduced_svd(s);
    for (int i = 0; i < 20; ++i) {
        const double oracle = std::sqrt(std::max(0.0, eig.eigenvalues()(19 - i)));
        EXPECT_NEAR(r.sigma[static_cast<std::size_t>(i)], oracle, 1e-10 * r.sigma[0]);
    }
}

TEST(Sylvester, HalfIdentityReturnsRhs) {
    std::mt19937_64 rng(9);
    const Matrix b = random_matrix(rng, 6, 4);
    const Matrix x = solve_sylvester_dense(0.5 * Matrix::Identity(6, 6), 0.5 * Matrix::Identity(4, 4), b);
    EXPECT_LE((x - b).norm(), 1e-14 * b.norm());
}

TEST(Sylvester, Scalar) {
    const Matrix x = solve_sylvester_dense(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 3.0),
                                           Matrix::Constant(1, 1, 10.0));
    EXPECT_NEAR(x(0, 0), 2.0, 1e-15);
}

TEST(Sylvester, KroneckerOracleAllSizes) {
    std::mt19937_64 rng(10);
    for (int m : {1, 2, 4, 8, 16}) {
        for (int k : {1, 2, 4, 8, 16}) {
            Matrix a1 = random_matrix(rng, m, m) + 2.0 * m * Matrix::Identity(m, m);
            Matrix a2 = random_matrix(rng, k, k) + 2.0 * k * Matrix::Identity(k, k);
            const Matrix b = random_matrix(rng, m, k);
            const Matrix oracle = ark::test::kronecker_sylvester(a1, a2, b);
            const Matrix x = solve_sylvester_dense(a1, a2, b);
            EXPECT_LE((x - oracle).norm(), 1e-12 * oracle.norm()) << m << "x" << k;
        }
    }
}

TEST(Sylvester, ComplexSchurOfRealMatrix) {
    std::mt19937_64 rng(12);
    for (int n : {1, 2, 5, 12, 30}) {
        // random real matrices have complex pairs at these sizes
        const Matrix a = random_matrix(rng, n, n);
        Eigen::MatrixXcd q, t;
        ASSERT_TRUE(ark::detail::complex_schur(a, q, t));
        EXPECT_LE(t.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm(), 1e-15 * t.norm()) << n;
        EXPECT_LE((q.adjoint() * q - Eigen::MatrixXcd::Identity(n, n)).norm(), 1e-13) << n;
        EXPECT_LE((q * t * q.adjoint() - a.cast<std::complex<double>>()).norm(), 1e-13 * a.norm()) << n;
    }
    // rotation block: eigenvalues +-i
    Matrix r(2, 2);
    r << 0.0, -1.0, 1.0, 0.0;
    Eigen::MatrixXcd q, t;
    ASSERT_TRUE(ark::detail::complex_schur(r, q, t));
    EXPECT_NEAR(std::abs(t(0, 0).imag()), 1.0, 1e-15);
    EXPECT_NEAR(t(0, 0).imag(), -t(1, 1).imag(), 1e-15);
    EXPECT_EQ(t(1, 0), std::complex<double>(0.0));
}

TEST(Sylvester, RotationCoefficients) {
    std::mt19937_64 rng(13);
    Matrix a1(4, 4);
    a1 << 1.0, -3.0, 0.2, 0.0, 3.0, 1.0, 0.0, 0.1, 0.0, 0.0, 2.0, -5.0, 0.0, 0.0, 5.0, 2.0;
    const Matrix a2 = random_matrix(rng, 3, 3) + 6.0 * Matrix::Identity(3, 3);
    const Matrix b = random_matrix(rng, 4, 3);
    const Matrix oracle = ark::test::kronecker_sylvester(a1, a2, b);
    EXPECT_LE((solve_sylvester_dense(a1, a2, b) - oracle).norm(), 1e-12 * oracle.norm());
}

TEST(Sylvester, SpectralOverlapThrows) {
    // a1 + a2 singular: eigenvalue 1 of A1 meets eigenvalue -1 of A2.
    EXPECT_THROW(solve_sylvester_dense(Matrix::Identity(2, 2), -Matrix::Identity(2, 2), Matrix::Ones(2, 2)),
                 Error);
}

TEST(Sylvester, ShapeMismatch) {
    EXPECT_THROW(solve_sylvester_dense(Matrix::Identity(2, 2), Matrix::Identity(3, 3), Matrix::Ones(2, 2)),
                 DimensionMismatch);
}
