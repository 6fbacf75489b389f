"""Numeric hot-path kernels with numba acceleration and a numpy fallback.

The simulator's inner loops that are actually numeric live here: the frame
checksum, batched ellipse containment, and sliding-window event counting.
By default the kernels are JIT-compiled with numba (cached on disk); setting
the environment variable ``WNSLAB_NO_NUMBA=1`` selects the plain numpy path
instead. ``bench/bench_kernels.py`` compares the two.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("WNSLAB_NO_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:
        USE_NUMBA = False


def _maybe_jit(func):
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# Reflected CRC-16, generator x^16 + x^12 + x^5 + 1 (0x8408 reversed form),
# init 0, no final xor. Table indexed by (crc ^ byte) & 0xff.
def _build_crc_table() -> np.ndarray:
    table = np.zeros(256, dtype=np.uint16)
    for byte in range(256):
        reg = byte
        for _ in range(8):
            if reg & 1:
                reg = (reg >> 1) ^ 0x8408
            else:
                reg >>= 1
        table[byte] = reg
    return table


_CRC_TABLE = _build_crc_table()
_CRC_TABLE_LIST = [int(v) for v in _CRC_TABLE]


def _crc16_nb(data: np.ndarray, table: np.ndarray) -> np.uint16:
    crc = np.uint16(0)
    for i in range(data.shape[0]):
        crc = np.uint16((crc >> 8) ^ table[(crc ^ data[i]) & 0xFF])
    return crc


_crc16_nb = _maybe_jit(_crc16_nb)


def crc16(data: bytes) -> int:
    """Checksum over a byte string, in the reflected ITU-T convention."""
    if USE_NUMBA:
        buf = np.frombuffer(data, dtype=np.uint8)
        return int(_crc16_nb(buf, _CRC_TABLE))
    crc = 0
    table = _CRC_TABLE_LIST
    for byte in data:
        crc = (crc >> 8) ^ table[(crc ^ byte) & 0xFF]
    return crc


def _ellipse_contains_nb(px, py, cx, cy, a, b, cos_r, sin_r, out):
    for i in range(px.shape[0]):
        dx = px[i] - cx
        dy = py[i] - cy
        u = dx * cos_r + dy * sin_r
        v = -dx * sin_r + dy * cos_r
        out[i] = (u / a) ** 2 + (v / b) ** 2 <= 1.0


_ellipse_contains_nb = _maybe_jit(_ellipse_contains_nb)


def ellipse_contains(
    points: np.ndarray, cx: float, cy: float, a: float, b: float, rotation: float
) -> np.ndarray:
    """Closed containment test of N points against one rotated ellipse.

    ``points`` is an (N, 2) float array; returns a boolean array of length N.
    Boundary points count as inside.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    cos_r = float(np.cos(rotation))
    sin_r = float(np.sin(rotation))
    if USE_NUMBA:
        out = np.empty(pts.shape[0], dtype=np.bool_)
        _ellipse_contains_nb(
            pts[:, 0].copy(), pts[:, 1].copy(), cx, cy, a, b, cos_r, sin_r, out
        )
        return out
    dx = pts[:, 0] - cx
    dy = pts[:, 1] - cy
    u = dx * cos_r + dy * sin_r
    v = -dx * sin_r + dy * cos_r
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def _window_max_nb(times, weights, width):
    best_count = 0
    best_weight = 0.0
    best_count_at = 0
    best_weight_at = 0
    n = times.shape[0]
    j = 0
    wsum = 0.0
    for i in range(n):
        # window anchored at times[i], spanning [times[i], times[i] + width]
        j = i
        count = 0
        wsum = 0.0
        while j < n and times[j] <= times[i] + width:
            count += 1
            wsum += weights[j]
            j += 1
        if count > best_count:
            best_count = count
            best_count_at = times[i]
        if wsum > best_weight:
            best_weight = wsum
            best_weight_at = times[i]
    return best_count, best_weight, best_count_at, best_weight_at


_window_max_nb = _maybe_jit(_window_max_nb)


def window_max(times, weights, width: int):
    """Worst sliding window over point events, anchored at event times.

    ``times`` must be sorted ascending. Every window [t, t + width] with t an
    event time is evaluated; returns
    ``(max_count, max_weight_sum, count_anchor, weight_anchor)``.
    """
    t = np.ascontiguousarray(times, dtype=np.int64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if t.shape[0] == 0:
        return 0, 0.0, 0, 0
    if t.shape != w.shape:
        raise ValueError("times and weights must have equal length")
    if np.any(np.diff(t) < 0):
        raise ValueError("times must be sorted")
    if USE_NUMBA:
        count, weight, c_at, w_at = _window_max_nb(t, w, np.int64(width))
        return int(count), float(weight), int(c_at), int(w_at)
    ends = np.searchsorted(t, t + width, side="right")
    idx = np.arange(t.shape[0])
    counts = ends - idx
    csum = np.concatenate(([0.0], np.cumsum(w)))
    sums = csum[ends] - csum[idx]
    ci = int(np.argmax(counts))
    wi = int(np.argmax(sums))
    return int(counts[ci]), float(sums[wi]), int(t[ci]), int(t[wi])


def warmup() -> None:
    """Force JIT compilation of every kernel (no-op on the numpy path)."""
    crc16(b"\x00\x01\x02")
    ellipse_contains(np.zeros((2, 2)), 0.0, 0.0, 1.0, 1.0, 0.0)
    window_max(np.array([0, 1, 2], dtype=np.int64), np.ones(3), 5)
