from dataclasses import dataclass

import numpy as np

SEED_MAX = 2 ** 64 - 1


def check_seed(value) -> int:
    """Seeds are plain 64-bit unsigned integers; any value in range is valid."""
    seed = int(value)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {value}")
    return seed


def symbol_dtype(alphabet_size: int) -> np.dtype:
    return np.min_scalar_type(max(alphabet_size - 1, 0))


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    """
    A read-only run of symbol indices into {0, ..., alphabet_size - 1}.

    Messages, reconstructions, databases and codebooks are all SymbolBlocks; once built the
    array is frozen so it can be handed to several search workers at once.
    """
    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise ValueError(f"alphabet_size must be >= 1, got {self.alphabet_size}")
        raw = np.asarray(self.symbols)
        if raw.ndim != 1:
            raise ValueError("symbols must be one-dimensional")
        if raw.size and (raw.min() < 0 or raw.max() >= self.alphabet_size):
            raise ValueError(f"symbols must lie in [0, {self.alphabet_size})")
        arr = raw.astype(symbol_dtype(self.alphabet_size), copy=False)
        arr.setflags(write=False)
        object.__setattr__(self, 'symbols', arr)

    @classmethod
    def of(cls, symbols, alphabet_size: int) -> "SymbolBlock":
        return cls(np.asarray(symbols, dtype=np.int64), alphabet_size)

    def __len__(self):
        return int(self.symbols.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SymbolBlock(self.symbols[item], self.alphabet_size)
        return int(self.symbols[item])

    def __eq__(self, other):
        if not isinstance(other, SymbolBlock):
            return NotImplemented
        return self.alphabet_size == other.alphabet_size and np.array_equal(self.symbols, other.symbols)

    def __hash__(self):
        return hash((self.alphabet_size, self.symbols.tobytes()))

    def tolist(self) -> list[int]:
        return [int(s) for s in self.symbols]

    def __repr__(self):
        head = ','.join(str(s) for s in self.symbols[:8])
        more = ',...' if len(self) > 8 else ''
        return f"SymbolBlock(n={len(self)}, k={self.alphabet_size}, [{head}{more}])"
