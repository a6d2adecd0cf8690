#include <catch_amalgamated.hpp>

#include "qsekit/channels.hpp"
#include "qsekit/jordan_wigner.hpp"
#include "qsekit/symmetry.hpp"
#include "support.hpp"

using namespace qsekit;

namespace {

// Independent oracle: explicit Kronecker products, qubit 0 leftmost.
ComplexMatrix kron_oracle(const PauliOperator& op) {
  const int n = op.qubit_count();
  ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (const auto& [s, c] : op.terms()) {
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) m = kron(m, pauli_matrix(pauli_letter(s[q])));
    out += c * m;
  }
  return out;
}

FermionOperator random_operator(std::mt19937_64& rng, int modes) {
  std::uniform_int_distribution<int> mode(0, modes - 1), len(0, 3), coin(0, 1);
  FermionOperator f(modes);
  for (int t = 0; t < 3; ++t) {
    LadderString s;
    for (int k = len(rng); k > 0; --k) s.push_back({mode(rng), coin(rng) == 1});
    f.add_term(s, testing::gaussian(rng));
  }
  return f;
}

}  // namespace

TEST_CASE("Pauli products carry the expected phases") {
  auto [p1, r1] = multiply(Pauli::X, Pauli::Y);
  CHECK(r1 == Pauli::Z);
  CHECK(p1 == cplx(0, 1));
  auto [p2, r2] = multiply(Pauli::Y, Pauli::X);
  CHECK(r2 == Pauli::Z);
  CHECK(p2 == cplx(0, -1));
  auto [p3, r3] = multiply(Pauli::Z, Pauli::Z);
  CHECK(r3 == Pauli::I);
  CHECK(p3 == cplx(1, 0));
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      auto [ph, r] = multiply(static_cast<Pauli>(a), static_cast<Pauli>(b));
      const ComplexMatrix lhs = pauli_matrix(letters[a]) * pauli_matrix(letters[b]);
      REQUIRE(testing::max_abs(lhs - ph * pauli_matrix(letters[static_cast<int>(r)])) < 1e-15);
    }
}

TEST_CASE("pauli_to_dense matches the Kronecker oracle") {
  CHECK(testing::max_abs(pauli_to_dense(PauliOperator::identity(2)) - ComplexMatrix::Identity(4, 4)) == 0.0);
  ComplexMatrix z(2, 2);
  z << 1, 0, 0, -1;
  CHECK(testing::max_abs(pauli_to_dense(PauliOperator::single(1, 0, Pauli::Z)) - z) == 0.0);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> letter(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    PauliOperator op(n);
    for (int t = 0; t < 4; ++t) {
      PauliString s(n);
      for (auto& p : s) p = static_cast<Pauli>(letter(rng));
      op.add_term(s, testing::gaussian(rng));
    }
    REQUIRE(testing::max_abs(pauli_to_dense(op) - kron_oracle(op)) < 1e-13);
  }
  CHECK_THROWS_AS(pauli_to_dense(PauliOperator::identity(13)), std::invalid_argument);
}

TEST_CASE("Pauli labels and rendering") {
  const auto op = PauliOperator::from_label(2, "Z0 X1", 0.25);
  CHECK(op.str() == "(0.25+0i) [Z0 X1]\n");
  CHECK(PauliOperator::from_label(3, "").str() == "(1+0i) []\n");
  CHECK_THROWS(PauliOperator::from_label(2, "X2"));
  CHECK(op.is_hermitian());
  CHECK_FALSE((op * cplx(0, 1)).is_hermitian());
}

TEST_CASE("Jordan-Wigner images of single ladders") {
  const auto a0 = jordan_wigner(FermionOperator::creation(1, 0));
  CHECK(a0.coefficient({Pauli::X}) == cplx(0.5, 0));
  CHECK(a0.coefficient({Pauli::Y}) == cplx(0, -0.5));
  const auto a1 = jordan_wigner(FermionOperator::creation(2, 1));
  CHECK(a1.coefficient({Pauli::Z, Pauli::X}) == cplx(0.5, 0));
  CHECK(a1.coefficient({Pauli::Z, Pauli::Y}) == cplx(0, -0.5));
  CHECK(a1.size() == 2);
  // a0^dagger a0 -> (I - Z)/2
  const auto n0 = jordan_wigner(FermionOperator::excitation(1, 0, 0));
  CHECK(n0.str() == "(-0.5+0i) [Z0]\n(0.5+0i) []\n");
  // sigma^+ maps |0> to |1>
  const ComplexMatrix up = pauli_to_dense(a0);
  CHECK(up(1, 0) == cplx(1.0));
  CHECK(up(0, 1) == cplx(0.0));
}

TEST_CASE("number operator is diagonal in the occupation basis") {
  const ComplexMatrix n = pauli_to_dense(jordan_wigner(number_operator(2)));
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.diagonal() << 0, 1, 1, 2;
  CHECK(testing::max_abs(n - expected) < 1e-15);
}

TEST_CASE("Jordan-Wigner is an algebra homomorphism") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 4;
    const FermionOperator a = random_operator(rng, m), b = random_operator(rng, m);
    const ComplexMatrix lhs = pauli_to_dense(jordan_wigner(a * b));
    const ComplexMatrix rhs = pauli_to_dense(jordan_wigner(a)) * pauli_to_dense(jordan_wigner(b));
    REQUIRE(testing::max_abs(lhs - rhs) < 1e-12);
    REQUIRE(testing::max_abs(pauli_to_dense(jordan_wigner(a)) - fermion_to_dense(a)) < 1e-12);
  }
}

TEST_CASE("canonical anticommutation relations under the mapping") {
  const int m = 4;
  const ComplexMatrix id = ComplexMatrix::Identity(16, 16);
  for (int p = 0; p < m; ++p) {
    const ComplexMatrix cp = pauli_to_dense(jordan_wigner(FermionOperator::creation(m, p)));
    const ComplexMatrix ap = pauli_to_dense(jordan_wigner(FermionOperator::annihilation(m, p)));
    REQUIRE(testing::max_abs(cp.adjoint() - ap) < 1e-15);
    for (int q = 0; q < m; ++q) {
      const ComplexMatrix cq = pauli_to_dense(jordan_wigner(FermionOperator::creation(m, q)));
      const ComplexMatrix aq = cq.adjoint();
      REQUIRE(testing::max_abs(ap * cq + cq * ap - (p == q ? id : ComplexMatrix::Zero(16, 16))) < 1e-14);
      REQUIRE(testing::max_abs(ap * aq + aq * ap) < 1e-14);
    }
  }
}
