#include <catch_amalgamated.hpp>

#include <array>

#include "qsekit/molecule.hpp"
#include "qsekit/rdm.hpp"
#include "qsekit/sector.hpp"
#include "support.hpp"

using namespace qsekit;

namespace {

// Dense oracle: 1/k! Tr[a+_{i1}..a+_{ik} a_{jk}..a_{j1} rho] from JW matrices.
cplx dense_rdm_element(const ComplexMatrix& rho, int modes, const std::vector<int>& up, const std::vector<int>& lo) {
  FermionOperator op(modes);
  LadderString term;
  for (int i : up) term.push_back(cre(i));
  for (auto it = lo.rbegin(); it != lo.rend(); ++it) term.push_back(des(*it));
  op.add_term(term, 1.0);
  double f = 1;
  for (std::size_t k = 2; k <= up.size(); ++k) f *= double(k);
  return trace_product(fermion_to_dense(op), rho) / f;
}

// Random Slater determinant: n orbitals b+_k = sum_p C_pk a+_p on the vacuum.
ComplexVector random_determinant(std::mt19937_64& rng, int modes, int n) {
  Eigen::HouseholderQR<ComplexMatrix> qr(testing::random_matrix(rng, modes, modes));
  const ComplexMatrix c = qr.householderQ() * ComplexMatrix::Identity(modes, modes);
  ComplexVector psi = ComplexVector::Zero(Eigen::Index(1) << modes);
  psi(0) = 1.0;
  for (int k = 0; k < n; ++k) {
    FermionOperator b(modes);
    for (int p = 0; p < modes; ++p) b.add_term({cre(p)}, c(p, k));
    psi = fermion_to_dense(b) * psi;
  }
  return psi / psi.norm();
}

ComplexVector basis_state(int modes, const std::string& occ) {
  ComplexVector v = ComplexVector::Zero(Eigen::Index(1) << modes);
  v(std::stoi(occ, nullptr, 2)) = 1.0;
  return v;
}

void iterate(int k, int modes, const std::function<void(const std::vector<int>&, const std::vector<int>&)>& f) {
  std::vector<int> idx(2 * k, 0);
  while (true) {
    f({idx.begin(), idx.begin() + k}, {idx.begin() + k, idx.end()});
    int a = 2 * k - 1;
    while (a >= 0 && ++idx[a] == modes) idx[a--] = 0;
    if (a < 0) return;
  }
}

double max_diff(const RdmSet& a, const RdmSet& b) {
  double m = 0;
  for (int k = 1; k <= 4; ++k)
    if (a.has(k) && b.has(k)) m = std::max(m, max_abs_diff(a[k], b[k]));
  return m;
}

}  // namespace

TEST_CASE("occupation state 1-RDM") {
  const auto r = compute_rdms(basis_state(4, "1100"), 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(r[1].at({i, j}) - (i == j && i < 2 ? 1.0 : 0.0)) < 1e-15);
  CHECK(std::abs(r[2].at({0, 1, 0, 1}) - 0.5) < 1e-15);
  CHECK(std::abs(r[2].at({0, 1, 1, 0}) + 0.5) < 1e-15);
}

TEST_CASE("RDM elements match the dense trace formula") {
  std::mt19937_64 rng(1);
  const ComplexMatrix rho = testing::random_density(rng, 16, 3);
  const auto r = compute_rdms(rho, 4);
  for (int k = 1; k <= 4; ++k)
    iterate(k, 4, [&](const std::vector<int>& up, const std::vector<int>& lo) {
      REQUIRE(std::abs(r[k](up, lo) - dense_rdm_element(rho, 4, up, lo)) < 1e-12);
    });
}

TEST_CASE("pure state equals its rank-1 density matrix") {
  std::mt19937_64 rng(2);
  const ComplexVector psi = testing::random_state(rng, 32);
  CHECK(max_diff(compute_rdms(psi, 3), compute_rdms(ComplexMatrix(psi * psi.adjoint()), 3)) < 1e-12);
}

TEST_CASE("trace and partial-trace identities on number eigenstates") {
  const auto pts = load_sweep(testing::fixture("h2_sto6g_sweep.txt"));
  for (std::size_t i : {1u, 7u, 11u}) {
    const ComplexMatrix h = fermion_to_dense(assemble_hamiltonian(pts[i].integrals));
    const auto sp = sector_spectrum(h, 2);
    for (Eigen::Index level = 0; level < sp.eigenvalues.size(); ++level) {
      const auto r = compute_rdms(ComplexVector(sp.eigenvectors.col(level)), 2);
      cplx tr1{}, tr2{};
      for (int a = 0; a < 4; ++a) tr1 += r[1].at({a, a});
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) tr2 += r[2].at({a, b, a, b});
      REQUIRE(std::abs(tr1 - 2.0) < 1e-10);
      REQUIRE(std::abs(tr2 - 1.0) < 1e-10);
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) {
          cplx part{};
          for (int b = 0; b < 4; ++b) part += r[2].at({a, b, c, b});
          REQUIRE(std::abs(part - 0.5 * r[1].at({a, c})) < 1e-10);
        }
    }
  }
}

TEST_CASE("RDM symmetries") {
  std::mt19937_64 rng(3);
  const auto r = compute_rdms(testing::random_density(rng, 16), 3);
  iterate(2, 4, [&](const std::vector<int>& up, const std::vector<int>& lo) {
    REQUIRE(std::abs(r[2](up, lo) - std::conj(r[2](lo, up))) < 1e-13);
    REQUIRE(std::abs(r[2](up, lo) + r[2](std::vector<int>{up[1], up[0]}, lo)) < 1e-13);
  });
  iterate(3, 4, [&](const std::vector<int>& up, const std::vector<int>& lo) {
    REQUIRE(std::abs(r[3](up, lo) + r[3](up, std::vector<int>{lo[0], lo[2], lo[1]})) < 1e-13);
  });
}

TEST_CASE("wedge product") {
  std::mt19937_64 rng(4);
  const auto r = compute_rdms(testing::random_density(rng, 16), 2);
  const RdmTensor& d = r[1];
  const RdmTensor w = wedge(d, d);
  iterate(2, 4, [&](const std::vector<int>& up, const std::vector<int>& lo) {
    const cplx expected = 0.5 * (d.at({up[0], lo[0]}) * d.at({up[1], lo[1]}) - d.at({up[0], lo[1]}) * d.at({up[1], lo[0]}));
    REQUIRE(std::abs(w(up, lo) - expected) < 1e-14);
  });
  CHECK(wedge(d, RdmTensor(1, 4)).max_abs() == 0.0);

  // antisymmetry of random products under every upper and lower transposition
  for (int t = 0; t < 20; ++t) {
    const auto rr = compute_rdms(testing::random_density(rng, 16), 2);
    const RdmTensor w3 = wedge(rr[2], rr[1]);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int s = 0; s < 30; ++s) {
      std::vector<int> up{pick(rng), pick(rng), pick(rng)}, lo{pick(rng), pick(rng), pick(rng)};
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          auto up2 = up, lo2 = lo;
          std::swap(up2[a], up2[b]);
          std::swap(lo2[a], lo2[b]);
          REQUIRE(std::abs(w3(up, lo) + w3(up2, lo)) < 1e-14);
          REQUIRE(std::abs(w3(up, lo) + w3(up, lo2)) < 1e-14);
        }
    }
  }
  CHECK_THROWS_AS(wedge(RdmTensor(1, 4), RdmTensor(1, 5)), std::invalid_argument);
}

TEST_CASE("Slater determinant cumulants vanish") {
  std::mt19937_64 rng(5);
  for (int modes : {4, 5, 6})
    for (int n = 1; n < modes; ++n) {
      const auto c = cumulants_from_rdms(compute_rdms(random_determinant(rng, modes, n), 4));
      for (int k = 2; k <= 4; ++k) REQUIRE(c[k].max_abs() < 1e-10);
    }
  const auto vac = cumulants_from_rdms(compute_rdms(basis_state(4, "0000"), 4));
  for (int k = 1; k <= 4; ++k) CHECK(vac[k].max_abs() == 0.0);
}

TEST_CASE("Slater D2 is the wedge square of D1") {
  std::mt19937_64 rng(6);
  const auto r = compute_rdms(random_determinant(rng, 4, 2), 2);
  CHECK(max_abs_diff(r[2], wedge(r[1], r[1])) < 1e-12);
}

TEST_CASE("cumulant round trip and truncation") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    const auto r = compute_rdms(testing::random_density(rng, 16, 2), 4);
    const auto c = cumulants_from_rdms(r);
    REQUIRE(max_diff(r, reconstruct_rdms(c, 4)) < 1e-12);
  }
  const auto slater = compute_rdms(random_determinant(rng, 5, 3), 4);
  CHECK(max_diff(slater, reconstruct_rdms(cumulants_from_rdms(slater), 2)) < 1e-10);

  const auto pts = load_sweep(testing::fixture("h2_sto6g_sweep.txt"));
  const SweepPoint* stretched = nullptr;
  for (const auto& p : pts)
    if (std::abs(p.bond_length - 2.5) < 1e-9) stretched = &p;
  REQUIRE(stretched);
  const ComplexMatrix h = fermion_to_dense(assemble_hamiltonian(stretched->integrals));
  const auto exact = compute_rdms(sector_ground_state(h, 2), 3);
  const auto approx = reconstruct_rdms(cumulants_from_rdms(exact), 2, 3);
  CHECK(max_abs_diff(exact[3], approx[3]) > 1e-3);
  CHECK(max_abs_diff(exact[2], approx[2]) < 1e-12);
}

TEST_CASE("cumulant inputs are validated") {
  RdmSet gap;
  gap.modes = 4;
  gap.d[1] = RdmTensor(2, 4);
  CHECK_THROWS_AS(cumulants_from_rdms(gap), std::invalid_argument);
  CHECK_THROWS_AS(compute_rdms(ComplexVector(ComplexVector::Zero(1 << 9)), 4), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct_rdms(CumulantSet{}, 2), std::invalid_argument);
}

TEST_CASE("energy contraction") {
  const auto ints = to_spin_orbital(load_fcidump(testing::fixture("h2_sto6g_1.1000.fcidump")));
  const ComplexMatrix h = fermion_to_dense(assemble_hamiltonian(ints));
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    const ComplexVector psi = testing::random_state(rng, 16);
    REQUIRE(std::abs(contract_energy(ints, compute_rdms(psi, 2)) - psi.dot(h * psi).real()) < 1e-10);
  }
  CHECK(std::abs(contract_energy(ints, compute_rdms(basis_state(4, "0000"), 2)) - ints.core_energy) < 1e-15);

  MolecularIntegrals hub(1, 2, 0);
  hub.one_body(0, 0) = -0.4;
  hub.set_eri(0, 0, 0, 0, 1.1);
  CHECK(std::abs(contract_energy(to_spin_orbital(hub), compute_rdms(basis_state(2, "11"), 2)) - (2 * -0.4 + 1.1)) <
        1e-14);
}

TEST_CASE("body operator expectation matches dense") {
  std::mt19937_64 rng(9);
  const auto ints = to_spin_orbital(load_fcidump(testing::fixture("h2_sto3g_0.7414.fcidump")));
  const auto op = BodyOperator::from_integrals(ints);
  const ComplexMatrix rho = testing::random_density(rng, 16);
  const cplx dense = trace_product(fermion_to_dense(op.to_fermion()), rho);
  CHECK(std::abs(op.expectation(compute_rdms(rho, 2)) - dense) < 1e-11);
  CHECK(std::abs(dense.real() - contract_energy(ints, compute_rdms(rho, 2))) < 1e-11);
  CHECK_THROWS_AS(BodyOperator::from_fermion(FermionOperator::creation(4, 0)), std::invalid_argument);
}
