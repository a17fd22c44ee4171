#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "freeconvex/algebra.hpp"
#include "freeconvex/linalg.hpp"
#include "freeconvex/realization.hpp"

using namespace freeconvex;

namespace {

LinearPencil inverse_pencil(const std::string& text) {
  return pencil_of(minimize(realize_inverse(realize_expression(parse(text)))));
}

// Random irreducible block: generic matrices generate M_n.
MatrixList random_generators(int n, int slots, Rng& rng) {
  MatrixList out;
  for (int k = 0; k < slots; ++k) out.push_back(random_complex(n, n, rng));
  return out;
}

LinearPencil pencil_from_slots(const MatrixList& slots) {
  const int g = static_cast<int>(slots.size()) / 2;
  return LinearPencil::monic(MatrixList(slots.begin(), slots.begin() + g), MatrixList(slots.begin() + g, slots.end()));
}

std::vector<int> sorted_sizes(const BlockDecomposition& dec) {
  std::vector<int> s;
  for (const auto& b : dec.blocks) s.push_back(b.size);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

TEST_CASE("generated algebra dimensions") {
  CHECK(generated_algebra({Matrix::Identity(3, 3)}).dimension() == 1);
  CHECK(generated_algebra(fixtures::degree4_pencil().slot_matrices()).dimension() == 9);
  Rng rng = substream(31, "algebra");
  // Generic strictly upper triangular 3x3 pair: I plus the full nilpotent algebra.
  Matrix n1 = random_complex(3, 3, rng).triangularView<Eigen::StrictlyUpper>();
  Matrix n2 = random_complex(3, 3, rng).triangularView<Eigen::StrictlyUpper>();
  AlgebraBasis alg = generated_algebra({n1, n2});
  CHECK(alg.dimension() == 4);
  CHECK(closure_residual(alg) < 1e-10);
  CHECK(radical(alg).size() == 3);
}

TEST_CASE("irreducibility") {
  Matrix one = Matrix::Identity(1, 1);
  CHECK(is_irreducible(LinearPencil::monic({one}, {Matrix::Zero(1, 1)})));
  CHECK(is_irreducible(fixtures::degree4_pencil()));
  LinearPencil L = fixtures::degree4_pencil();
  CHECK_FALSE(is_irreducible(direct_sum({L, fixtures::ball_pencil()}, 1)));
}

TEST_CASE("irreducible pencil gives a single well conditioned block") {
  Rng rng = substream(32, "algebra");
  BlockDecomposition dec = burnside_decompose(fixtures::degree4_pencil(), rng);
  REQUIRE(dec.blocks.size() == 1);
  CHECK(dec.blocks[0].size == 3);
  CHECK(condition_number(dec.S) < 1.0 + 1e-10);
}

TEST_CASE("cubic atom inverse pencil is similar to the reference pencil") {
  Rng rng = substream(33, "algebra");
  LinearPencil L = inverse_pencil(fixtures::kCubicAtom);
  REQUIRE(L.rows() == 3);
  auto P = similar(L, fixtures::degree4_pencil(), rng);
  REQUIRE(P.has_value());
  for (int k = 0; k < 2; ++k)
    CHECK(max_abs(*P * L.slot_matrices()[k] - fixtures::degree4_pencil().slot_matrices()[k] * *P) < 1e-9);
}

TEST_CASE("product of the two atoms splits into blocks of sizes 3 and 1") {
  Rng rng = substream(34, "algebra");
  LinearPencil L = inverse_pencil(fixtures::kDegree4);
  REQUIRE(L.rows() == 4);
  BlockDecomposition dec = burnside_decompose(L, rng);
  CHECK(sorted_sizes(dec) == std::vector<int>{1, 3});
  CHECK(dec.triangularity_residual <= 1e-7);
  for (const auto& b : dec.blocks) {
    CHECK(b.kind == BlockKind::Irreducible);
    CHECK(is_irreducible(b.pencil));
    if (b.size == 3) CHECK(similar(b.pencil, fixtures::degree4_pencil(), rng).has_value());
  }
}

TEST_CASE("duplicated block decomposes into two similar blocks") {
  Rng rng = substream(35, "algebra");
  LinearPencil L1 = fixtures::degree4_pencil();
  BlockDecomposition dec = burnside_decompose(direct_sum({L1, L1}, 1), rng);
  REQUIRE(dec.blocks.size() == 2);
  for (const auto& b : dec.blocks) CHECK(similar(b.pencil, L1, rng).has_value());
  std::vector<LinearPencil> blocks{dec.blocks[0].pencil, dec.blocks[1].pencil};
  auto classes = similarity_classes(blocks, rng);
  REQUIRE(classes.size() == 1);
  CHECK(classes[0].members.size() == 2);
}

TEST_CASE("zero-coefficient directions become identity blocks") {
  Rng rng = substream(36, "algebra");
  LinearPencil L = direct_sum({fixtures::degree4_pencil(), LinearPencil::monic({Matrix::Zero(2, 2)}, {Matrix::Zero(2, 2)})}, 1);
  BlockDecomposition dec = burnside_decompose(L, rng);
  int identity = 0;
  for (const auto& b : dec.blocks) identity += b.kind == BlockKind::Identity;
  CHECK(identity == 2);
  CHECK(dec.blocks.size() == 3);
}

TEST_CASE("similar: constructed, mismatched, reflexive") {
  Rng rng = substream(37, "algebra");
  LinearPencil L = pencil_from_slots(random_generators(3, 4, rng));
  Matrix S = random_complex(3, 3, rng) + 2.0 * Matrix::Identity(3, 3);
  LinearPencil M = transform(S, L, S.inverse());
  auto P = similar(L, M, rng);
  REQUIRE(P.has_value());
  for (int k = 0; k < 4; ++k) CHECK(max_abs(*P * L.slot_matrices()[k] - M.slot_matrices()[k] * *P) < 1e-9);
  Matrix one = Matrix::Identity(1, 1);
  CHECK_FALSE(similar(LinearPencil::monic({one}, {Matrix::Zero(1, 1)}),
                      LinearPencil::monic({Matrix(2.0 * one)}, {Matrix::Zero(1, 1)}), rng)
                  .has_value());
  auto Id = similar(L, L, rng);
  REQUIRE(Id.has_value());
  // Schur's lemma: a scalar multiple of the identity.
  Matrix scaled = *Id / (*Id)(0, 0);
  CHECK(max_abs(scaled - Matrix::Identity(3, 3)) < 1e-8);
}

TEST_CASE("similarity classes keep first occurrence and never merge sizes") {
  Rng rng = substream(38, "algebra");
  LinearPencil A = pencil_from_slots(random_generators(2, 2, rng));
  LinearPencil B = pencil_from_slots(random_generators(2, 2, rng));
  LinearPencil C = pencil_from_slots(random_generators(3, 2, rng));
  Matrix S = random_complex(2, 2, rng) + 2.0 * Matrix::Identity(2, 2);
  LinearPencil A2 = transform(S, A, S.inverse());
  auto classes = similarity_classes({B, A, C, A2, B}, rng);
  REQUIRE(classes.size() == 3);
  CHECK(classes[0].representative == 0);
  CHECK(classes[0].members == std::vector<int>{0, 4});
  CHECK(classes[1].members == std::vector<int>{1, 3});
  CHECK(classes[2].members == std::vector<int>{2});
}

TEST_CASE("similarity is an equivalence relation on random families") {
  Rng rng = substream(39, "algebra");
  for (int t = 0; t < 10; ++t) {
    LinearPencil L = pencil_from_slots(random_generators(3, 2, rng));
    Matrix S1 = random_complex(3, 3, rng) + 2.0 * Matrix::Identity(3, 3);
    Matrix S2 = random_complex(3, 3, rng) + 2.0 * Matrix::Identity(3, 3);
    LinearPencil M = transform(S1, L, S1.inverse()), N = transform(S2, M, S2.inverse());
    auto pLM = similar(L, M, rng), pMN = similar(M, N, rng), pML = similar(M, L, rng);
    REQUIRE(pLM.has_value());
    REQUIRE(pMN.has_value());
    REQUIRE(pML.has_value());
    CHECK(similar(L, L, rng).has_value());
    // Symmetry via the inverse and transitivity via the composition.
    Matrix inv = pLM->inverse(), comp = *pMN * *pLM;
    for (int k = 0; k < 2; ++k) {
      CHECK(max_abs(inv * M.slot_matrices()[k] - L.slot_matrices()[k] * inv) < 1e-8 * max_abs(inv));
      CHECK(max_abs(comp * L.slot_matrices()[k] - N.slot_matrices()[k] * comp) < 1e-8 * max_abs(comp));
    }
  }
}

TEST_CASE("planted block upper triangular pencils") {
  Rng rng = substream(40, "algebra");
  for (int t = 0; t < 20; ++t) {
    const int g = 1 + t % 2;
    std::vector<int> plan;
    std::uniform_int_distribution<int> size(1, 3), count(1, 3);
    int nb = count(rng);
    for (int i = 0; i < nb; ++i) plan.push_back(size(rng));
    int d = 0;
    for (int s : plan) d += s;
    MatrixList slots(2 * g, Matrix::Zero(d, d));
    int off = 0;
    for (int s : plan) {
      MatrixList blk = random_generators(s, 2 * g, rng);
      for (int k = 0; k < 2 * g; ++k) {
        slots[k].block(off, off, s, s) = blk[k];
        slots[k].block(off, off + s, s, d - off - s) = random_complex(s, d - off - s, rng);
      }
      off += s;
    }
    Matrix S = random_complex(d, d, rng) + 2.0 * Matrix::Identity(d, d);
    LinearPencil L = transform(S, pencil_from_slots(slots), S.inverse());
    BlockDecomposition dec = burnside_decompose(L, rng);
    std::vector<int> expect = plan;
    std::sort(expect.begin(), expect.end());
    CHECK(sorted_sizes(dec) == expect);
    CHECK(dec.triangularity_residual <= 1e-7 * std::max(1.0, coefficient_scale(L)));
    // det L = prod det L^i at random points.
    MatrixTuple X = MatrixTuple::random(g, 2, rng);
    Complex prod = 1.0;
    for (const auto& b : dec.blocks) prod *= b.pencil.evaluate(X).determinant();
    Complex full = L.evaluate(X).determinant();
    CHECK(std::abs(prod - full) <= 1e-6 * std::max(1.0, std::abs(full)));
  }
}
