"""Dense key interning and growable value tables.

Tabular learners index numpy arrays by dense integers. A ``KeyIndex``
interns arbitrary hashable keys (state tuples, observation encodings) to
consecutive integers in first-seen order, which keeps the encoding stable
within a run; the tables grow row capacity on demand with the interner.
"""

import numpy as np


class KeyIndex:
    """Interns hashable keys to 0, 1, 2, ... in first-seen order."""

    def __init__(self):
        self._index = {}

    def intern(self, key):
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._index)
            self._index[key] = idx
        return idx

    def get(self, key):
        """Index of a previously interned key, or None."""
        return self._index.get(key)

    def __len__(self):
        return len(self._index)

    def items(self):
        """(key, index) pairs in index order."""
        return self._index.items()


class Table2D:
    """Growable (rows x n_cols) float64 table with a constant fill value."""

    def __init__(self, n_cols, fill=0.0, capacity=64):
        self.n_cols = n_cols
        self.fill = fill
        self._data = np.full((capacity, n_cols), fill, dtype=np.float64)
        self.rows = 0

    def ensure(self, n_rows):
        """Make at least ``n_rows`` rows valid."""
        if n_rows > self._data.shape[0]:
            cap = self._data.shape[0]
            while cap < n_rows:
                cap *= 2
            grown = np.full((cap, self.n_cols), self.fill, dtype=np.float64)
            grown[: self._data.shape[0]] = self._data
            self._data = grown
        if n_rows > self.rows:
            self.rows = n_rows

    @property
    def data(self):
        """Backing array (capacity rows); only rows < ``rows`` are live."""
        return self._data

    def row(self, key):
        return self._data[key]

    def view(self):
        return self._data[: self.rows]


class Table3D:
    """Growable (n_slabs x rows x n_cols) float64 table, one slab per agent."""

    def __init__(self, n_slabs, n_cols, fill=0.0, capacity=64):
        self.n_slabs = n_slabs
        self.n_cols = n_cols
        self.fill = fill
        self._data = np.full((n_slabs, capacity, n_cols), fill, dtype=np.float64)
        self.rows = 0

    def ensure(self, n_rows):
        if n_rows > self._data.shape[1]:
            cap = self._data.shape[1]
            while cap < n_rows:
                cap *= 2
            grown = np.full((self.n_slabs, cap, self.n_cols), self.fill,
                            dtype=np.float64)
            grown[:, : self._data.shape[1]] = self._data
            self._data = grown
        if n_rows > self.rows:
            self.rows = n_rows

    @property
    def data(self):
        return self._data

    def view(self):
        return self._data[:, : self.rows]
