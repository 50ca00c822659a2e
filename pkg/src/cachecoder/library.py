"""The content library: N files of f uniformly random symbols each."""

from array import array

from .gf import FieldSpec
from .rng import derived_rng, symbols


class FileLibrary:
    """Seeded random file contents, shared by transmitters and the
    decode oracle (a user's reconstruction is checked against these
    symbols bit for bit)."""

    def __init__(self, field: FieldSpec, n_files: int, f: int, seed: int):
        self.field = field
        self.n_files = n_files
        self.f = f
        self.seed = seed
        self._files = [
            symbols(derived_rng(seed, "file", n), field.q, f)
            for n in range(1, n_files + 1)
        ]

    def file(self, n: int) -> array:
        """Contents of file n (1-based)."""
        return self._files[n - 1]

    def slice(self, n: int, start: int, length: int) -> array:
        return self._files[n - 1][start : start + length]
