from dataclasses import dataclass

import numpy as np

EXTREMUM_THRESHOLD = 1e-9


@dataclass(frozen=True)
class EntropyCurve:
    """Per-time Gaussian law and entropies on a time grid.

    ``h_c`` is None when no reference stationary density exists.
    """

    t: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    h_g: np.ndarray
    h_c: np.ndarray | None = None

    def __post_init__(self):
        for name in ("t", "mean", "variance", "h_g", "h_c"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.array(val, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.t.shape[0]
        if any(getattr(self, k) is not None and getattr(self, k).shape != (n,)
               for k in ("mean", "variance", "h_g", "h_c")):
            raise ValueError("all curve columns must match the grid length")

    def __len__(self):
        return self.t.shape[0]


def strict_extrema(values, threshold=EXTREMUM_THRESHOLD):
    """Indices of strict local extrema.

    An extremum is a sign change between consecutive finite differences,
    where both differences (ignoring near-flat runs) exceed ``threshold``
    in magnitude. Flat stretches below the threshold are skipped, so
    roundoff wiggles are not reported.
    """
    d = np.diff(np.asarray(values, dtype=float))
    found = []
    last_sign, last_idx = 0, -1
    for i, di in enumerate(d):
        if abs(di) <= threshold:
            continue
        sign = 1 if di > 0 else -1
        if last_sign and sign != last_sign:
            found.append((last_idx + i + 1) // 2 if i - last_idx > 1 else i)
        last_sign, last_idx = sign, i
    return found


def is_non_monotone(values, threshold=EXTREMUM_THRESHOLD):
    return bool(strict_extrema(values, threshold))
