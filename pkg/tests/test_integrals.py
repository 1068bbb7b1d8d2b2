import numpy as np
import pytest

from arnnsci.determinant import Configuration, enumerate_sector, SymmetrySector
from arnnsci.integrals import (
    IntegralTable,
    MatrixElement,
    assemble_subspace,
    parse_fcidump,
    slater_condon,
)

from bruteforce import brute_force_hamiltonian, random_integral_table

RNG = np.random.default_rng(20240817)


@pytest.fixture(scope="module")
def small_table():
    return random_integral_table(3, 4, RNG)


@pytest.fixture(scope="module")
def oracle_pair():
    t = random_integral_table(4, 4, np.random.default_rng(7))
    return t, brute_force_hamiltonian(t)


MINIMAL_DUMP = """\
&FCI NORB=2,NELEC=2,MS2=0,
  ORBSYM=1,1,
  ISYM=1,
&END
  0.6744887663568981  1  1  1  1
  0.6634680586340054  2  2  1  1
  0.6973979494693358  2  2  2  2
  0.1812875358123322  2  1  2  1
 -1.2524635735648981  1  1  0  0
 -0.4759487152209648  2  2  0  0
  0.7137539936876182  0  0  0  0
"""


class TestParseFcidump:
    def test_header_fields(self):
        t = parse_fcidump(MINIMAL_DUMP)
        assert t.n_spatial == 2
        assert t.n_electrons == 2
        assert t.ms2 == 0
        assert t.m == 4
        assert t.orbital_irreps == (0, 0)

    def test_core_energy_line(self):
        t = parse_fcidump(MINIMAL_DUMP)
        assert t.core_energy == pytest.approx(0.7137539936876182, abs=0)

    def test_symmetry_completion(self):
        t = parse_fcidump(MINIMAL_DUMP)
        assert t.h2[0, 0, 1, 1] == t.h2[1, 1, 0, 0]
        assert t.h2[1, 0, 1, 0] == t.h2[0, 1, 1, 0]
        assert t.h1[0, 1] == t.h1[1, 0] == 0.0

    def test_missing_core_warns(self):
        stripped = "\n".join(
            line for line in MINIMAL_DUMP.splitlines() if not line.startswith("  0.7137")
        )
        with pytest.warns(UserWarning):
            t = parse_fcidump(stripped)
        assert t.core_energy == 0.0

    def test_bad_index_rejected(self):
        with pytest.raises(ValueError):
            parse_fcidump(MINIMAL_DUMP + "  1.0  3  1  1  1\n")

    def test_bytes_input(self):
        t = parse_fcidump(MINIMAL_DUMP.encode())
        assert t.n_spatial == 2

    def test_fortran_conventions(self):
        # D exponents, CRLF endings, slash-terminated namelist
        text = (
            "&FCI NORB=2,NELEC=2,MS2=0,\r\n ORBSYM=1,1,\r\n ISYM=1,\r\n&END\r\n"
            " 0.5D+00 1 1 1 1\r\n -1.25D0 1 1 0 0\r\n 0.71D+00 0 0 0 0\r\n"
        )
        t = parse_fcidump(text)
        assert t.h2[0, 0, 0, 0] == 0.5
        assert t.h1[0, 0] == -1.25
        assert t.core_energy == 0.71
        t2 = parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,ORBSYM=1, /\n 0.9 1 1 1 1\n 0.7 0 0 0 0\n")
        assert t2.n_spatial == 1


class TestSlaterCondon:
    def test_degree_beyond_two_is_zero(self, small_table):
        a = Configuration.from_text("111000")
        b = Configuration.from_text("000111")
        el = slater_condon(a, b, small_table)
        assert el.value == 0.0
        assert el.excitation_degree == 3

    def test_hermitian(self, small_table):
        for _ in range(200):
            a = Configuration(int(RNG.integers(0, 64)), 6)
            b = Configuration(int(RNG.integers(0, 64)), 6)
            assert slater_condon(a, b, small_table).value == slater_condon(
                b, a, small_table
            ).value

    def test_matches_brute_force_all_pairs(self, oracle_pair):
        t, dense = oracle_pair
        dim = 1 << t.m
        for a_bits in range(dim):
            a = Configuration(a_bits, t.m)
            for b_bits in range(dim):
                el = slater_condon(a, Configuration(b_bits, t.m), t)
                assert el.value == pytest.approx(dense[a_bits, b_bits], abs=1e-12)

    def test_single_excitation_sign_rule(self):
        # with h1 = all ones and h2 = 0 the single-excitation element is
        # exactly (-1)^(occupied bits strictly between the two positions)
        n = 4
        t = IntegralTable(n, 4, 0, 0.0, np.ones((n, n)), np.zeros((n,) * 4), (0,) * n)
        for a_bits in range(1 << t.m):
            for i in range(t.m):
                if not (a_bits >> i) & 1:
                    continue
                for x in range(t.m):
                    if (a_bits >> x) & 1 or (i < t.m // 2) != (x < t.m // 2):
                        continue
                    b_bits = (a_bits ^ (1 << i)) | (1 << x)
                    lo, hi = sorted((i, x))
                    n_between = bin(a_bits & ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)).count("1")
                    got = slater_condon(Configuration(a_bits, t.m), Configuration(b_bits, t.m), t)
                    assert got.value == (-1.0) ** n_between

    def test_dimension_mismatch(self, small_table):
        with pytest.raises(ValueError):
            slater_condon(Configuration(0, 4), Configuration(0, 4), small_table)


class TestAssembleSubspace:
    def test_single_determinant(self, small_table):
        c = Configuration.from_text("101101")
        h = assemble_subspace([c], small_table)
        assert h.shape == (1, 1)
        assert h[0, 0] == pytest.approx(slater_condon(c, c, small_table).value, abs=1e-14)

    def test_matches_brute_force_rows(self, oracle_pair):
        t, dense = oracle_pair
        sector = SymmetrySector(4, True, 0, (0,) * t.n_spatial)
        basis = list(enumerate_sector(sector, t.m))
        h = assemble_subspace(basis, t).toarray()
        idx = [c.bits for c in basis]
        assert np.allclose(h, dense[np.ix_(idx, idx)], atol=1e-12)

    def test_permutation_similarity(self, oracle_pair):
        t, _ = oracle_pair
        sector = SymmetrySector(4, True, 0, (0,) * t.n_spatial)
        basis = list(enumerate_sector(sector, t.m))
        perm = list(RNG.permutation(len(basis)))
        h = assemble_subspace(basis, t).toarray()
        hp = assemble_subspace([basis[p] for p in perm], t).toarray()
        assert np.allclose(hp, h[np.ix_(perm, perm)], atol=1e-14)

    def test_exactly_symmetric(self, oracle_pair):
        t, _ = oracle_pair
        sector = SymmetrySector(4, True, 0, (0,) * t.n_spatial)
        basis = list(enumerate_sector(sector, t.m))
        h = assemble_subspace(basis, t)
        assert (h != h.T).nnz == 0

    def test_duplicates_rejected(self, small_table):
        c = Configuration.from_text("101101")
        with pytest.raises(ValueError):
            assemble_subspace([c, c], small_table)

    def test_worker_count_does_not_change_result(self, oracle_pair, monkeypatch):
        from arnnsci._kernels import assemble_coo

        t, _ = oracle_pair
        sector = SymmetrySector(4, True, 0, (0,) * t.n_spatial)
        basis = list(enumerate_sector(sector, t.m))
        keys = np.array([c.bits for c in basis], dtype=np.uint64)
        monkeypatch.setenv("ARNNSCI_THREADS", "1")
        one = assemble_coo(keys, t)
        monkeypatch.setenv("ARNNSCI_THREADS", "3")
        many = assemble_coo(keys, t, chunk_rows=7)
        for a, b in zip(one, many):
            assert np.array_equal(a, b)


def test_matrix_element_type():
    el = MatrixElement(1.5, 2)
    assert el.value == 1.5
    assert el.excitation_degree == 2


def test_integral_symmetry_enforced():
    n = 2
    good_h1 = np.zeros((n, n))
    bad_h1 = np.array([[0.0, 0.1], [0.2, 0.0]])
    h2 = np.zeros((n,) * 4)
    with pytest.raises(ValueError, match="not symmetric"):
        IntegralTable(n, 2, 0, 0.0, bad_h1, h2, (0, 0))
    bad_h2 = h2.copy()
    bad_h2[0, 1, 0, 0] = 0.3  # missing its permutation partners
    with pytest.raises(ValueError, match="permutational"):
        IntegralTable(n, 2, 0, 0.0, good_h1, bad_h2, (0, 0))


class TestAgainstFixtures:
    def test_hf_diagonal_equals_recorded_hf_energy(self, fixture_dir):
        from arnnsci.determinant import hf_configuration
        from arnnsci.integrals import load_fcidump
        from conftest import fixture_path, load_reference

        for name in ("h2_sto3g", "h4_sto3g", "lih_sto3g", "h2o_sto3g"):
            t = load_fcidump(fixture_path(name))
            ref = load_reference(name)
            hf = hf_configuration(t.m, t.n_electrons)
            el = slater_condon(hf, hf, t)
            assert el.value == pytest.approx(ref["hf_energy"], abs=1e-8), name

    def test_full_sector_lowest_eigenvalue_is_fci(self, fixture_dir):
        from arnnsci.integrals import load_fcidump
        from conftest import fixture_path, load_reference

        t = load_fcidump(fixture_path("h2_sto3g"))
        basis = list(enumerate_sector(t.sector(), t.m))
        h = assemble_subspace(basis, t).toarray()
        ref = load_reference("h2_sto3g")
        assert np.linalg.eigvalsh(h)[0] == pytest.approx(ref["fci_energy"], abs=1e-9)
