import numpy as np
from numba import njit

FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)


@njit(cache=True)
def _fnv1a(data, offset, prime):
    h = offset
    for b in data:
        h = (h ^ np.uint64(b)) * prime
    return h


def fnv1a64(payload):
    """64-bit FNV-1a of a bytes payload, as 16 lowercase hex digits."""
    data = np.frombuffer(bytes(payload), dtype=np.uint8)
    return format(int(_fnv1a(data, FNV_OFFSET, FNV_PRIME)), "016x")
