import numpy as np

from confrec.philox import TAG_DIGITS, categorical_matrix, philox4x32, uniform_matrix


def _block(ctr, key):
    arrs = [np.array([x], dtype=np.uint32) for x in ctr + key]
    return tuple(int(w[0]) for w in philox4x32(*arrs))


def test_known_answer_vectors():
    # Random123 reference vectors for philox4x32-10
    assert _block((0, 0, 0, 0), (0, 0)) == (
        0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)
    assert _block((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2) == (
        0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)
    assert _block(
        (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
        (0xA4093822, 0x299F31D0),
    ) == (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)


def test_uniform_matrix_deterministic():
    a = uniform_matrix(42, 100, 16, TAG_DIGITS)
    b = uniform_matrix(42, 100, 16, TAG_DIGITS)
    assert np.array_equal(a, b)
    c = uniform_matrix(43, 100, 16, TAG_DIGITS)
    assert not np.array_equal(a, c)
    assert np.all((a >= 0.0) & (a < 1.0))


def test_per_sample_streams_are_offset_invariant():
    # row i of the full matrix equals row 0 of a matrix starting at index i
    full = uniform_matrix(7, 50, 9, TAG_DIGITS)
    for i in (0, 13, 49):
        part = uniform_matrix(7, 1, 9, TAG_DIGITS, start=i)
        assert np.array_equal(full[i], part[0])


def test_tags_decorrelate():
    a = uniform_matrix(5, 20, 8, tag=1)
    b = uniform_matrix(5, 20, 8, tag=2)
    assert not np.array_equal(a, b)


def test_categorical_frequencies():
    probs = np.array([0.2, 0.5, 0.3])
    m = categorical_matrix(11, 20_000, 4, probs, TAG_DIGITS)
    freq = np.bincount(m.ravel(), minlength=3) / m.size
    # 3 sigma on 80k draws
    for p, f in zip(probs, freq):
        se = np.sqrt(p * (1 - p) / m.size)
        assert abs(f - p) < 3 * se
