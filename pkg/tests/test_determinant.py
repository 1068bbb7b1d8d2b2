import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arnnsci.determinant import (
    Configuration,
    SymmetrySector,
    count_sector,
    count_symmetry_sector,
    enumerate_sector,
    excitations,
    hf_configuration,
    passes_symmetry,
    popcount_block,
)


def sector(m, n_e, sz_zero=True, irreps=None, target=0):
    irreps = tuple(irreps) if irreps is not None else (0,) * (m // 2)
    return SymmetrySector(n_e, sz_zero, target, irreps)


class TestConfiguration:
    def test_text_roundtrip(self):
        c = Configuration.from_text("00110011")
        assert c.m == 8
        assert c.to_text() == "00110011"
        assert c.occupied() == [2, 3, 6, 7]

    def test_hf_reference_matches_block_layout(self):
        assert hf_configuration(8, 4).to_text() == "00110011"
        assert hf_configuration(4, 2).to_text() == "0101"

    def test_rejects_wide_registers(self):
        with pytest.raises(ValueError):
            Configuration(0, 65)

    def test_lex_key_orders_like_text(self):
        cs = [Configuration(b, 4) for b in range(16)]
        by_key = sorted(cs, key=lambda c: c.lex_key())
        by_text = sorted(cs, key=lambda c: c.to_text())
        assert by_key == by_text


class TestPopcountBlock:
    def test_paper_hf_example(self):
        c = Configuration.from_text("00110011")
        assert popcount_block(c, "down") == 2
        assert popcount_block(c, "up") == 2

    def test_empty(self):
        c = Configuration(0, 8)
        assert popcount_block(c, "down") == 0
        assert popcount_block(c, "up") == 0

    def test_full(self):
        c = Configuration((1 << 8) - 1, 8)
        assert popcount_block(c, "up") == 4


class TestPassesSymmetry:
    def test_hf_in_sector(self):
        assert passes_symmetry(Configuration.from_text("00110011"), sector(8, 4))

    def test_wrong_particle_number(self):
        assert not passes_symmetry(Configuration.from_text("00100011"), sector(8, 4))

    def test_double_excitation_stays_in_sector(self):
        # move one down and one up electron between irrep-0 orbitals
        hf = hf_configuration(8, 4)
        moved = (hf.bits ^ (1 << 3) ^ (1 << 7)) | (1 << 0) | (1 << 4)
        c = Configuration(moved, 8)
        assert c.popcount() == 4
        assert passes_symmetry(c, sector(8, 4))

    def test_irrep_filter(self):
        s = sector(4, 2, irreps=(0, 1), target=0)
        assert passes_symmetry(Configuration.from_text("0101"), s)
        # singly moving one electron to the odd orbital breaks the label
        assert not passes_symmetry(Configuration.from_text("1001"), s)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            passes_symmetry(Configuration(0, 6), sector(8, 4))


class TestCountSector:
    @pytest.mark.parametrize(
        "m,n_e,expect",
        [(24, 14, 627_264), (26, 10, 1_656_369), (28, 16, 9_018_009), (36, 12, 344_622_096)],
    )
    def test_number_preserving_counts(self, m, n_e, expect):
        assert count_sector(m, n_e, sz_zero=True) == expect

    @pytest.mark.parametrize("m", [24, 26, 28, 36])
    def test_fock_space_totals(self, m):
        assert count_sector(m, None) == 2**m

    def test_sz_free(self):
        assert count_sector(2, 1, sz_zero=False) == 2

    def test_odd_electrons_rejected_for_sz_zero(self):
        with pytest.raises(ValueError):
            count_sector(8, 3, sz_zero=True)


class TestEnumerateSector:
    def test_small_sector_brute_force(self):
        s = sector(4, 2)
        got = list(enumerate_sector(s, 4))
        brute = [c for b in range(16) if passes_symmetry(c := Configuration(b, 4), s)]
        assert len(got) == 4
        assert sorted(got, key=lambda c: c.lex_key()) == sorted(
            brute, key=lambda c: c.lex_key()
        )

    def test_lexicographic_and_unique(self):
        s = sector(8, 4)
        texts = [c.to_text() for c in enumerate_sector(s, 8)]
        assert texts == sorted(texts)
        assert len(set(texts)) == len(texts) == count_sector(8, 4)

    def test_zero_electrons(self):
        got = list(enumerate_sector(sector(8, 0), 8))
        assert got == [Configuration(0, 8)]

    def test_irrep_count_agrees_with_dp(self):
        irreps = (0, 3, 1, 2, 5, 0)
        s = sector(12, 6, irreps=irreps)
        got = list(enumerate_sector(s, 12))
        assert len(got) == count_symmetry_sector(s, 12)
        assert all(passes_symmetry(c, s) for c in got)

    def test_membership_equivalence_exhaustive(self):
        irreps = (1, 0, 2)
        s = sector(6, 2, irreps=irreps, target=3)
        enumerated = {c.bits for c in enumerate_sector(s, 6)}
        for b in range(64):
            assert (b in enumerated) == passes_symmetry(Configuration(b, 6), s)

    def test_membership_equivalence_twelve_orbitals(self):
        irreps = (0, 1, 2, 3, 4, 5)
        s = sector(12, 6, irreps=irreps, target=1)
        enumerated = {c.bits for c in enumerate_sector(s, 12)}
        for b in range(1 << 12):
            assert (b in enumerated) == passes_symmetry(Configuration(b, 12), s)


class TestSectorCountsFromFixtures:
    def test_c2h2_counts(self, fixture_dir):
        from arnnsci.integrals import load_fcidump
        from conftest import fixture_path

        t = load_fcidump(fixture_path("c2h2_sto3g"))
        s = t.sector()
        assert count_symmetry_sector(s, t.m) == 78_992
        assert count_sector(t.m, t.n_electrons) == 627_264
        assert sum(1 for _ in enumerate_sector(s, t.m)) == 78_992

    def test_h2o_631g_counts(self, fixture_dir):
        from arnnsci.integrals import load_fcidump
        from conftest import fixture_path

        t = load_fcidump(fixture_path("h2o_631g"))
        s = t.sector()
        assert count_symmetry_sector(s, t.m) == 414_441
        assert count_sector(t.m, t.n_electrons) == 1_656_369


class TestExcitations:
    def test_hand_enumerated_singles(self):
        c = Configuration.from_text("1010")
        got = {e.to_text() for e in excitations(c, "singles")}
        assert got == {"0110", "1001"}

    def test_full_configuration_has_none(self):
        c = Configuration((1 << 8) - 1, 8)
        assert list(excitations(c, "singles")) == []
        assert list(excitations(c, "doubles")) == []

    def test_h2_cisd_spans_sector(self):
        hf = hf_configuration(4, 2)
        span = {hf.bits}
        span |= {e.bits for e in excitations(hf, "singles")}
        span |= {e.bits for e in excitations(hf, "doubles")}
        assert span == {c.bits for c in enumerate_sector(sector(4, 2), 4)}

    def test_no_duplicates(self):
        c = hf_configuration(8, 4)
        doubles = [e.bits for e in excitations(c, "doubles")]
        assert len(doubles) == len(set(doubles))

    @given(st.integers(min_value=0, max_value=255))
    @settings(max_examples=60, deadline=None)
    def test_singles_are_involutive(self, bits):
        c = Configuration(bits, 8)
        for e in excitations(c, "singles"):
            assert c.bits in {back.bits for back in excitations(e, "singles")}

    @given(st.integers(min_value=0, max_value=63), st.integers(min_value=0, max_value=63))
    @settings(max_examples=100, deadline=None)
    def test_singles_symmetric_relation(self, a_bits, b_bits):
        a, b = Configuration(a_bits, 6), Configuration(b_bits, 6)
        fwd = b.bits in {e.bits for e in excitations(a, "singles")}
        bwd = a.bits in {e.bits for e in excitations(b, "singles")}
        assert fwd == bwd
