import pytest

from confrec.errors import ValidationError
from confrec.words import EMPTY_WORD, Word


def test_concat_and_power():
    assert (Word((0, 1)) + Word((1,))).symbols == (0, 1, 1)
    assert Word((0, 1)).power(3).symbols == (0, 1) * 3
    assert Word((0, 1)).power(0) == EMPTY_WORD


def test_shift():
    assert Word((0, 1, 0, 1)).shift().symbols == (1, 0, 1)
    assert Word((1,)).shift() == EMPTY_WORD
    with pytest.raises(ValidationError):
        Word((0,)).shift(2)


def test_periodic_prefix():
    w = Word((0, 1))
    assert w.periodic_prefix(5).symbols == (0, 1, 0, 1, 0)
    assert w.periodic_prefix(0) == EMPTY_WORD
    with pytest.raises(ValidationError):
        EMPTY_WORD.periodic_prefix(3)


def test_prefix_relation():
    assert Word((0, 1)).is_prefix_of(Word((0, 1, 0)))
    assert not Word((0, 1)).is_prefix_of(Word((0, 0, 1)))
    assert EMPTY_WORD.is_prefix_of(Word((1,)))


def test_parse_and_validate():
    assert Word.parse("010").symbols == (0, 1, 0)
    assert Word.parse("") == EMPTY_WORD
    with pytest.raises(ValidationError):
        Word.parse("0a1")
    with pytest.raises(ValidationError):
        Word((0, 2)).validate(2)
    Word((0, 1)).validate(2)
