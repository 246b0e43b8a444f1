import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spvqe.errors import FcidumpError
from spvqe.fcidump import FermionIntegrals, parse_fcidump, write_fcidump

from .conftest import ALL_FILES, load_ints

HEADER = "&FCI NORB=2,NELEC=2,MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n&END\n"


def test_header_fields():
    ints = parse_fcidump(HEADER)
    assert (ints.n_spatial, ints.n_electrons, ints.ms2) == (2, 2, 0)


def test_single_line_header():
    ints = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0 /\n0.75 1 1 1 1\n")
    assert ints.g[0, 0, 0, 0] == 0.75


def test_two_body_record_is_zero_based():
    ints = parse_fcidump(HEADER + "0.75 1 1 1 1\n")
    assert ints.g[0, 0, 0, 0] == 0.75
    assert np.count_nonzero(ints.g) == 1


def test_one_body_sentinel():
    ints = parse_fcidump(HEADER + "-1.25 1 1 0 0\n")
    assert ints.h[0, 0] == -1.25


def test_core_energy_and_symmetric_fill():
    ints = parse_fcidump(HEADER + "0.1 2 1 0 0\n0.2 2 1 1 1\n0.7 0 0 0 0\n")
    assert ints.e0 == 0.7
    assert ints.h[0, 1] == ints.h[1, 0] == 0.1
    for idx in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]:
        assert ints.g[idx] == 0.2


def test_fortran_exponent():
    ints = parse_fcidump(HEADER + "1.5D-01 1 1 0 0\n")
    assert ints.h[0, 0] == pytest.approx(0.15)


@pytest.mark.parametrize("text", [
    "NORB=2\n",                                   # no namelist start
    "&FCI NELEC=2 /\n",                           # NORB missing
    HEADER + "0.5 3 1 0 0\n",                     # index out of range
    HEADER + "0.5 1 1\n",                         # short record
    HEADER + "abc 1 1 0 0\n",                     # bad value
    HEADER + "0.1 1 2 0 0\n0.3 2 1 0 0\n",        # inconsistent symmetric duplicate
])
def test_malformed(text):
    with pytest.raises(FcidumpError):
        parse_fcidump(text)


def test_roundtrip_fixture():
    ints = load_ints("h2_0.735")
    back = parse_fcidump(write_fcidump(ints))
    np.testing.assert_allclose(back.h, ints.h, atol=1e-15)
    np.testing.assert_allclose(back.g, ints.g, atol=1e-15)
    assert back.e0 == ints.e0


@pytest.mark.parametrize("name", ALL_FILES)
def test_fixture_symmetries(name):
    defects = load_ints(name).symmetry_defects()
    assert max(defects.values()) <= 1e-10


@given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_write_parse_roundtrip_random(n, seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, n))
    h = h + h.T
    g = rng.normal(size=(n, n, n, n))
    # symmetrize over the 8-fold group
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    ints = FermionIntegrals(n, 2, 0, h, g, float(rng.normal()))
    back = parse_fcidump(write_fcidump(ints))
    np.testing.assert_allclose(back.h, h, atol=1e-13)
    np.testing.assert_allclose(back.g, g, atol=1e-13)
