#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "freeconvex/algebra.hpp"
#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"
#include "freeconvex/random.hpp"
#include "freeconvex/sdp.hpp"

using namespace freeconvex;

namespace {

Matrix random_hermitian(int n, Rng& rng) {
  const Matrix a = random_complex(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

Matrix random_pd(int n, double floor, Rng& rng) {
  const Matrix a = random_complex(n, n, rng);
  return a * a.adjoint() + floor * Matrix::Identity(n, n);
}

// Re tr(H X) for a block variable.
LinearExpr pairing(const SdpProblem& p, int block, const Matrix& H) {
  LinearExpr e;
  const auto& b = p.blocks()[static_cast<std::size_t>(block)];
  for (int r = 0; r < b.rows; ++r)
    for (int c = 0; c < b.cols; ++c) {
      const Complex w = b.psd ? H(c, r) : std::conj(H(r, c));
      if (w != Complex(0.0, 0.0)) e += w * p.entry(block, r, c);
    }
  e.compact();
  return e;
}

Complex pairing_value(const Matrix& H, const Matrix& X, bool psd) {
  return psd ? (H * X).trace() : (H.adjoint() * X).trace();
}

struct Planted {
  SdpProblem problem;
  MatrixList interior;
};

// Feasible instance with a planted interior point.
Planted planted_feasible(Rng& rng, int rows) {
  Planted out;
  const int n1 = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * 3), n2 = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * 2);
  const int b1 = out.problem.add_psd_block(n1), b2 = out.problem.add_psd_block(n2), f = out.problem.add_free_block(1, 2);
  out.interior = {random_pd(n1, 0.5, rng), random_pd(n2, 0.5, rng), random_complex(1, 2, rng)};
  for (int i = 0; i < rows; ++i) {
    const Matrix H1 = random_hermitian(n1, rng), H2 = random_hermitian(n2, rng), G = random_complex(1, 2, rng);
    const LinearExpr e = pairing(out.problem, b1, H1) + pairing(out.problem, b2, H2) + pairing(out.problem, f, G);
    const double rhs = (pairing_value(H1, out.interior[0], true) + pairing_value(H2, out.interior[1], true) +
                        pairing_value(G, out.interior[2], false))
                           .real();
    out.problem.add_equality(e, rhs, SdpProblem::Part::Real);
  }
  return out;
}

// Infeasible instance: combination mu of the rows has PSD blocks, vanishing free part, negative rhs.
SdpProblem planted_infeasible(Rng& rng, int rows) {
  SdpProblem p;
  const int n1 = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * 3), n2 = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * 2);
  const int b1 = p.add_psd_block(n1), b2 = p.add_psd_block(n2), f = p.add_free_block(1, 2);
  Matrix Z1 = random_pd(n1, 0.2, rng), Z2 = random_pd(n2, 0.2, rng);
  const double total = Z1.trace().real() + Z2.trace().real();
  Z1 /= total;
  Z2 /= total;
  Matrix H1last = Z1, H2last = Z2, Glast = Matrix::Zero(1, 2);
  double rlast = -0.5 - uniform(rng, 0.0, 1.0);
  for (int i = 0; i + 1 < rows; ++i) {
    const Matrix H1 = random_hermitian(n1, rng), H2 = random_hermitian(n2, rng), G = random_complex(1, 2, rng);
    const double mu = uniform(rng, 0.0, 1.0) * 2 - 1, r = uniform(rng, 0.0, 1.0) * 2 - 1;
    p.add_equality(pairing(p, b1, H1) + pairing(p, b2, H2) + pairing(p, f, G), r, SdpProblem::Part::Real);
    H1last -= mu * H1;
    H2last -= mu * H2;
    Glast -= mu * G;
    rlast -= mu * r;
  }
  p.add_equality(pairing(p, b1, H1last) + pairing(p, b2, H2last) + pairing(p, f, Glast), rlast, SdpProblem::Part::Real);
  return p;
}

}  // namespace

TEST_CASE("LinearExpr entries reproduce packed block values") {
  Rng rng(3);
  SdpProblem p;
  const int a = p.add_psd_block(3), b = p.add_free_block(2, 2);
  const MatrixList vals = {random_hermitian(3, rng), random_complex(2, 2, rng)};
  const RealVector params = p.pack(vals);
  const MatrixList back = p.unpack(params);
  CHECK((back[0] - vals[0]).norm() < 1e-14);
  CHECK((back[1] - vals[1]).norm() < 1e-14);
  for (int blk : {a, b})
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const LinearExpr e = p.entry(blk, r, c);
        Complex v = e.constant;
        for (const auto& [q, w] : e.terms) v += w * params(q);
        CHECK(std::abs(v - vals[static_cast<std::size_t>(blk)](r, c)) < 1e-14);
      }
}

TEST_CASE("Q >= I with no constraints returns the identity") {
  SdpProblem p;
  const int P = p.add_psd_block(3, "P");
  LinearExpr tr;
  for (int a = 0; a < 3; ++a) tr += p.entry(P, a, a);
  p.set_objective(tr);
  const SdpResult r = solve(p);
  REQUIRE(r.status == SdpStatus::Feasible);
  CHECK(r.objective_optimized);
  const Matrix Q = r.values[0] + Matrix::Identity(3, 3);
  CHECK((Q - Matrix::Identity(3, 3)).norm() < 1e-6);
}

TEST_CASE("q >= 1 with 2q = q is infeasible with a verified certificate") {
  SdpProblem p;
  const int P = p.add_psd_block(1, "p");  // q = 1 + p
  // 2(1+p) = 1+p  <=>  p = -1
  p.add_equality(p.entry(P, 0, 0), -1.0, SdpProblem::Part::Real);
  const SdpResult r = solve(p);
  REQUIRE(r.status == SdpStatus::Infeasible);
  CHECK(verify_infeasible(p, r.dual, 1e-8).has_value());
  CHECK(r.dual(0) > 0.0);
}

TEST_CASE("inconsistent affine constraints are infeasible") {
  SdpProblem p;
  const int P = p.add_psd_block(2);
  p.add_equality(p.entry(P, 0, 1), 1.0);
  p.add_equality(p.entry(P, 0, 1), 2.0);
  const SdpResult r = solve(p);
  CHECK(r.status == SdpStatus::Infeasible);
  CHECK(verify_infeasible(p, r.dual, 1e-8).has_value());
}

TEST_CASE("planted feasible and infeasible instances are classified correctly") {
  Rng rng = substream(11, "sdp-planted");
  int feasible_ok = 0, infeasible_ok = 0, wrong = 0;
  for (int k = 0; k < 25; ++k) {
    const int rows = 2 + static_cast<int>(uniform(rng, 0.0, 1.0) * 6);
    Planted f = planted_feasible(rng, rows);
    const SdpResult rf = solve(f.problem);
    if (rf.status == SdpStatus::Feasible) {
      ++feasible_ok;
      CHECK(verify_feasible(f.problem, rf.values, 1e-8));
      CHECK(rf.equality_residual <= 1e-8);
    } else if (rf.status == SdpStatus::Infeasible) {
      ++wrong;
    }
    const SdpProblem inf = planted_infeasible(rng, rows);
    const SdpResult ri = solve(inf);
    if (ri.status == SdpStatus::Infeasible) {
      ++infeasible_ok;
      CHECK(verify_infeasible(inf, ri.dual, 1e-8).has_value());
    } else if (ri.status == SdpStatus::Feasible) {
      ++wrong;
    }
  }
  CHECK(wrong == 0);
  CHECK(feasible_ok == 25);
  CHECK(infeasible_ok == 25);
}

TEST_CASE("realified double has the same status as the complex problem") {
  Rng rng = substream(12, "sdp-realify");
  for (int k = 0; k < 50; ++k) {
    const bool plant_feasible = k % 2 == 0;
    SdpProblem cp;
    const int n = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * 3);
    const int X = cp.add_psd_block(n);
    std::vector<std::pair<Matrix, double>> rows;
    const Matrix X0 = random_pd(n, 0.3, rng);
    const int m = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * 4);
    for (int i = 0; i < m; ++i) {
      const Matrix H = random_hermitian(n, rng);
      double rhs = (H * X0).trace().real();
      if (!plant_feasible && i == 0) {
        // tr(P X) = -1 with P PSD has no PSD solution
        const Matrix P = random_pd(n, 0.1, rng);
        rows.emplace_back(P, -1.0);
        continue;
      }
      rows.emplace_back(H, rhs);
    }
    for (const auto& [H, rhs] : rows) cp.add_equality(pairing(cp, X, H), rhs, SdpProblem::Part::Real);

    // Real symmetric 2n block Y with tr(realify(H) Y)/2 = rhs and all imaginary parts zero.
    SdpProblem rp;
    const int Y = rp.add_psd_block(2 * n);
    for (const auto& [H, rhs] : rows) {
      Matrix HR = Matrix::Zero(2 * n, 2 * n);
      HR.topLeftCorner(n, n) = H.real().cast<Complex>();
      HR.bottomRightCorner(n, n) = H.real().cast<Complex>();
      HR.topRightCorner(n, n) = (-H.imag()).cast<Complex>();
      HR.bottomLeftCorner(n, n) = H.imag().cast<Complex>();
      rp.add_equality(0.5 * pairing(rp, Y, HR), rhs, SdpProblem::Part::Real);
    }
    for (int a = 0; a < 2 * n; ++a)
      for (int b = a + 1; b < 2 * n; ++b) rp.add_equality(rp.entry(Y, a, b), 0.0, SdpProblem::Part::Imag);

    const SdpResult rc = solve(cp), rr = solve(rp);
    CHECK(rc.status == rr.status);
    CHECK(rc.status == (plant_feasible ? SdpStatus::Feasible : SdpStatus::Infeasible));
  }
}

TEST_CASE("moment block contraction reproduces sum C_k^* G C_k") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 4, eps = 1 + (trial * 7) % 3;
    MatrixList C;
    for (int k = 0; k < 3; ++k) C.push_back(random_complex(d, eps, rng));
    const Matrix G = random_complex(d, d, rng);
    Matrix expected = Matrix::Zero(eps, eps);
    for (const Matrix& c : C) expected += c.adjoint() * G * c;
    const Matrix M = moment_block(C);
    CHECK((contract(G, M, d, eps) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hermitian similarity") {
  Rng rng(21);
  SUBCASE("already hermitian pencil gives Q = I") {
    const LinearPencil L = fixtures::ball_pencil();
    const auto hs = hermitian_similarity(L);
    REQUIRE(hs.has_value());
    CHECK((hs->Q - Matrix::Identity(2, 2)).norm() < 1e-6);
    CHECK(hs->pencil.is_hermitian_monic());
  }
  SUBCASE("scalar pencil with b != conj(a) is refused") {
    Matrix a(1, 1), b(1, 1);
    a(0, 0) = Complex(0.5, 0.2);
    b(0, 0) = Complex(0.3, 0.0);
    CHECK_FALSE(hermitian_similarity(LinearPencil::monic({a}, {b})).has_value());
  }
  SUBCASE("similarity transform of a hermitian pencil") {
    for (int trial = 0; trial < 5; ++trial) {
      const int d = 2 + trial % 3;
      const LinearPencil H = LinearPencil::hermitian_monic({random_complex(d, d, rng)});
      const Matrix S = random_complex(d, d, rng) + 2.0 * Matrix::Identity(d, d);
      const LinearPencil L = transform(S, H, S.inverse());
      REQUIRE_FALSE(L.is_hermitian_monic());
      const auto hs = hermitian_similarity(L);
      REQUIRE(hs.has_value());
      CHECK(min_eigenvalue(hs->Q) >= 1.0 - 1e-6);
      CHECK(hs->pencil.is_hermitian_monic());
      const auto P = similar(L, hs->pencil, rng);
      CHECK(P.has_value());
      const auto U = similar(H, hs->pencil, rng);
      REQUIRE(U.has_value());
      // Unitary equivalence: the polar factor of the transform intertwines.
      Eigen::JacobiSVD<Matrix> svd(*U, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Matrix W = svd.matrixU() * svd.matrixV().adjoint();
      CHECK(max_coefficient_distance(transform(W, H, W.adjoint()), hs->pencil) < 1e-5);
    }
  }
}

TEST_CASE("spectrahedral inclusion") {
  Rng rng(31);
  const LinearPencil ball = fixtures::ball_pencil(1.0), half = fixtures::ball_pencil(0.5);
  CHECK(inclusion(ball, ball).included);
  CHECK_FALSE(inclusion(ball, half).included);
  CHECK(inclusion(half, ball).included);
  for (int trial = 0; trial < 4; ++trial) {
    const LinearPencil L = LinearPencil::hermitian_monic({random_complex(2, 2, rng)});
    const LinearPencil Lp = LinearPencil::hermitian_monic({random_complex(2, 2, rng)});
    CHECK(inclusion(L, L).included);
    CHECK(inclusion(direct_sum({L, Lp}, 1), L).included);
  }
  // Chain ball_{1/4} in ball_{1/2} in ball_1.
  const LinearPencil quarter = fixtures::ball_pencil(0.25);
  CHECK(inclusion(quarter, half).included);
  CHECK(inclusion(half, ball).included);
  CHECK(inclusion(quarter, ball).included);
  const InclusionResult r = inclusion(half, ball);
  CHECK(r.sdp.equality_residual <= 1e-6);
}

TEST_CASE("rank certificate examples") {
  SUBCASE("Ltilde = L") {
    const LinearPencil L = fixtures::ball_pencil();
    const RankCertificate rc = rank_certificate(L, L);
    REQUIRE(rc.status == SdpStatus::Feasible);
    CHECK(rc.kernel.cols() == 0);
    // Re(D L) = P0 + sum C_k^* L C_k coefficientwise, with the moment block in place of the C_k.
    const Matrix Kc = 0.5 * (rc.D * L.constant() + L.constant().adjoint() * rc.D.adjoint());
    CHECK((Kc - rc.P0 - contract(Matrix::Identity(2, 2), rc.M, 2, 2)).norm() < 1e-6);
    const Matrix Kx = 0.5 * (rc.D * L.coeff_x()[0] + L.coeff_xstar()[0].adjoint() * rc.D.adjoint());
    CHECK((Kx + contract(L.A(0), rc.M, 2, 2)).norm() < 1e-6);
    CHECK(std::abs((rc.D * L.constant()).trace().real() - 1.0) < 1e-8);
  }
  SUBCASE("Ltilde = 1 + x - x*") {
    Matrix one = Matrix::Ones(1, 1);
    const LinearPencil Lt(one, {one}, {-one});
    const RankCertificate rc = rank_certificate(Lt, fixtures::ball_pencil());
    REQUIRE(rc.status == SdpStatus::Feasible);
    CHECK(rc.kernel.cols() == 0);
    CHECK(std::abs(rc.D(0, 0).real() - 1.0) < 1e-6);
  }
  SUBCASE("Ltilde = 1 - 2x - 2x* against the unit ball") {
    const RankCertificate rc = rank_certificate(fixtures::singular_rank_instance(), fixtures::ball_pencil());
    CHECK(rc.status == SdpStatus::Infeasible);
    CHECK(rc.sdp.certificate_margin > 1e-6);
  }
}
