"""Finite symbol words over the alphabet {0, ..., |D|-1}.

Words index cylinder sets; the empty word stands for the identity
composition (the whole attractor).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import ValidationError


@dataclass(frozen=True, slots=True)
class Word:
    symbols: tuple[int, ...]

    def __init__(self, symbols=()):
        object.__setattr__(self, "symbols", tuple(int(s) for s in symbols))
        if any(s < 0 for s in self.symbols):
            raise ValidationError(f"negative symbol in word {self.symbols}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.symbols + other.symbols)

    def power(self, k: int) -> "Word":
        if k < 0:
            raise ValidationError("negative word power")
        return Word(self.symbols * k)

    def prefix(self, m: int) -> "Word":
        return Word(self.symbols[:m])

    def shift(self, n: int = 1) -> "Word":
        """Drop the first n symbols."""
        if n < 0 or n > len(self.symbols):
            raise ValidationError(f"cannot shift word of length {len(self)} by {n}")
        return Word(self.symbols[n:])

    def periodic_prefix(self, m: int) -> "Word":
        """First m symbols of the periodic repetition of this word."""
        if not self.symbols:
            raise ValidationError("periodic prefix of empty word")
        k, s = divmod(m, len(self.symbols))
        return Word(self.symbols * k + self.symbols[:s])

    def is_prefix_of(self, other: "Word") -> bool:
        return self.symbols == other.symbols[: len(self.symbols)]

    def validate(self, alphabet_size: int) -> None:
        for s in self.symbols:
            if s >= alphabet_size:
                raise ValidationError(
                    f"symbol {s} out of range for alphabet of size {alphabet_size}"
                )

    @staticmethod
    def parse(text: str) -> "Word":
        """Parse a digit string like '010'; empty string is the empty word."""
        text = text.strip()
        if not text:
            return Word(())
        if not text.isdigit():
            raise ValidationError(f"word must be a digit string, got {text!r}")
        return Word(int(ch) for ch in text)

    def __str__(self) -> str:
        return "".join(str(s) for s in self.symbols) if self.symbols else "(empty)"

    def __repr__(self) -> str:
        return f"Word({''.join(str(s) for s in self.symbols)})"


EMPTY_WORD = Word(())
