from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvsc_sim.channel import NoiseParams, awgn
from gvsc_sim.errors import ConfigurationError, FormatError, FramingError
from gvsc_sim.fec import (
    SUPPORTED_RATES,
    code_rate,
    from_alist,
    gf2_rank,
    ldpc_code,
    ldpc_decode,
    ldpc_encode,
    read_alist,
    to_alist,
    write_alist,
)
from gvsc_sim.fec.ldpc import repeat_accumulate_matrix
from gvsc_sim.modulation import QAM4, QAM16, modulate, soft_demodulate

EXPECTED_K = {Fraction(1, 3): 216, Fraction(1, 2): 324, Fraction(2, 3): 432, Fraction(3, 4): 486}


@pytest.fixture(scope="module", params=SUPPORTED_RATES, ids=str)
def code(request):
    return ldpc_code(request.param)


def clean_llrs(codewords, magnitude=10.0):
    return magnitude * (1.0 - 2.0 * np.asarray(codewords, dtype=float))


def test_dimensions(code):
    assert code.n == 648
    assert code.k == EXPECTED_K[code.rate]
    assert code.k == code.n - gf2_rank(code.parity_matrix)


def test_encoded_words_satisfy_parity(code):
    msgs = np.random.default_rng(0).integers(0, 2, (1000, code.k), dtype=np.uint8)
    words = ldpc_encode(msgs, code)
    assert not code.syndrome(words).any()
    # independent check with a dense product
    assert not ((words.astype(np.int64) @ code.parity_matrix.T.astype(np.int64)) % 2).any()


def test_systematic(code):
    msg = np.random.default_rng(1).integers(0, 2, code.k, dtype=np.uint8)
    assert np.array_equal(ldpc_encode(msg, code)[code.info_positions], msg)


def test_zero_message(code):
    assert not ldpc_encode(np.zeros(code.k, dtype=np.uint8), code).any()


def test_linearity(code):
    a, b = np.random.default_rng(2).integers(0, 2, (2, code.k), dtype=np.uint8)
    assert np.array_equal(ldpc_encode(a ^ b, code), ldpc_encode(a, code) ^ ldpc_encode(b, code))


def test_noiseless_decode(code):
    msgs = np.random.default_rng(3).integers(0, 2, (100, code.k), dtype=np.uint8)
    decoded, converged, used = ldpc_decode(clean_llrs(ldpc_encode(msgs, code)), code)
    assert np.array_equal(decoded, msgs)
    assert converged.all() and (used <= 2).all()


def test_length_errors(code):
    with pytest.raises(ConfigurationError):
        ldpc_encode(np.zeros(code.k + 1, dtype=np.uint8), code)
    with pytest.raises(FramingError):
        ldpc_decode(np.zeros(code.n - 1), code)


def test_converged_implies_zero_syndrome(code):
    rng = np.random.default_rng(4)
    msgs = rng.integers(0, 2, (60, code.k), dtype=np.uint8)
    words = ldpc_encode(msgs, code)
    noise = NoiseParams.from_snr(1.0, rng_seed=5)
    llr = soft_demodulate(awgn(modulate(words, QAM4), noise), noise.sigma2, QAM4)
    decoded, converged, _ = ldpc_decode(llr, code)
    # a converged block stopped on a valid codeword; at this length that is the sent one
    assert np.array_equal(decoded[converged], msgs[converged])
    # and a block that did not converge reports so instead of a silent pass
    wrong = np.any(decoded != msgs, axis=1)
    assert not np.any(wrong & converged)


def test_single_block_api(code):
    msg = np.random.default_rng(6).integers(0, 2, code.k, dtype=np.uint8)
    decoded, converged, used = ldpc_decode(clean_llrs(ldpc_encode(msg, code)), code)
    assert decoded.shape == (code.k,) and bool(converged) and int(used) == 0


def test_rate_half_4qam_4db_no_block_errors():
    code = ldpc_code(Fraction(1, 2))
    msgs = np.random.default_rng(7).integers(0, 2, (100, code.k), dtype=np.uint8)
    noise = NoiseParams.from_snr(4.0, rng_seed=8)
    llr = soft_demodulate(awgn(modulate(ldpc_encode(msgs, code), QAM4), noise), noise.sigma2, QAM4)
    decoded, _, _ = ldpc_decode(llr, code)
    assert np.array_equal(decoded, msgs)


def test_16qam_pairings_improve_with_snr():
    # the adaptive table pairs 1/2 and 2/3 with 16-QAM; check the BER trend only
    for rate in (Fraction(1, 2), Fraction(2, 3)):
        code = ldpc_code(rate)
        bers = []
        for i, snr in enumerate((6.0, 8.0, 10.0)):
            msgs = np.random.default_rng(100 + i).integers(0, 2, (200, code.k), dtype=np.uint8)
            noise = NoiseParams.from_snr(snr, rng_seed=200 + i)
            llr = soft_demodulate(awgn(modulate(ldpc_encode(msgs, code), QAM16), noise), noise.sigma2, QAM16)
            bers.append(np.mean(ldpc_decode(llr, code)[0] != msgs))
        assert bers[0] >= bers[1] >= bers[2]


def test_ra_matrix_has_no_four_cycles():
    h = repeat_accumulate_matrix().astype(np.int64)
    overlap = h.T @ h
    np.fill_diagonal(overlap, 0)
    assert overlap.max() <= 1


def test_ra_matrix_degrees():
    h = repeat_accumulate_matrix()
    assert h.shape == (432, 648)
    assert (h[:, :216].sum(axis=0) == 4).all()
    assert (h[:, :216].sum(axis=1) == 2).all()


@pytest.mark.parametrize(
    "text, expected", [("1/3", Fraction(1, 3)), (0.5, Fraction(1, 2)), (Fraction(3, 4), Fraction(3, 4))]
)
def test_code_rate_parsing(text, expected):
    assert code_rate(text) == expected


@pytest.mark.parametrize("bad", ["5/6", "x", 0.9, "1/0"])
def test_code_rate_rejects(bad):
    with pytest.raises(ConfigurationError):
        code_rate(bad)


class TestAlist:
    def test_roundtrip_standard_code(self, tmp_path):
        h = ldpc_code(Fraction(1, 2)).parity_matrix
        write_alist(h, tmp_path / "h.alist")
        assert np.array_equal(read_alist(tmp_path / "h.alist"), h)

    def test_small_known_text(self):
        h = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
        assert to_alist(h) == "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n"

    def test_inconsistent_rows(self):
        text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 3\n2 3\n"
        with pytest.raises(FormatError):
            from_alist(text)

    def test_zero_padding_accepted(self):
        text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
        assert from_alist(text).tolist() == [[1, 1, 0], [0, 1, 1]]

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_roundtrip_property(self, m, n, seed):
        h = np.random.default_rng(seed).integers(0, 2, (m, n), dtype=np.uint8)
        assert np.array_equal(from_alist(to_alist(h)), h)
