"""Compiled event loops for the Moran particle systems.

Both kernels consume pre-drawn uniforms ``U`` (and normals ``Z``) from
index ``ui`` (``zi``) on.  An event and the draw of the following waiting
time form one unit; a unit that would run past the end of a buffer is not
started (or, for rejection sampling, is abandoned before any state is
touched), and the kernel returns so the caller can refill.  The consumed
sequence is therefore independent of the buffer size.

Status codes: 0 reached ``t_stop``, 1 needs uniforms, 2 needs normals,
3 rejection cap exceeded.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

REJECTION_CAP = 10_000


@njit(cache=True)
def gaussian_moran(parts, t, next_t, t_stop, pair_rate, mut_rate, step_sd, lo, hi, U, ui, Z, zi):
    """Continuous-marker Moran system.

    Every ordered pair ``(i, j)``, ``i != j``, fires at ``pair_rate`` and
    replaces particle ``i`` by a copy of ``j``; every particle moves at
    ``mut_rate`` by a normal step of sd ``step_sd`` conditioned to
    ``[lo, hi]``.  ``next_t`` is the pending event time (NaN: not drawn).
    Returns ``(t, next_t, ui, zi, n_events, status)``.
    """
    N = parts.shape[0]
    R = pair_rate * N * (N - 1)
    M = mut_rate * N
    total = R + M
    n_events = 0
    nU = U.shape[0]
    nZ = Z.shape[0]
    if math.isnan(next_t):
        if ui >= nU:
            return t, next_t, ui, zi, n_events, 1
        next_t = t - math.log(1.0 - U[ui]) / total if total > 0.0 else math.inf
        ui += 1
    while next_t <= t_stop:
        if ui + 4 > nU:
            return t, next_t, ui, zi, n_events, 1
        k = ui
        r = U[k] * total
        k += 1
        if r < R:
            i = int(U[k] * N)
            j = int(U[k + 1] * (N - 1))
            k += 2
            if i >= N:
                i = N - 1
            if j >= N - 1:
                j = N - 2
            if j >= i:
                j += 1
            parts[i] = parts[j]
            zk = zi
        else:
            i = int(U[k] * N)
            k += 1
            if i >= N:
                i = N - 1
            zk = zi
            tries = 0
            while True:
                if zk >= nZ:
                    return t, next_t, ui, zi, n_events, 2
                v = parts[i] + step_sd * Z[zk]
                zk += 1
                if lo <= v <= hi:
                    break
                tries += 1
                if tries >= REJECTION_CAP:
                    return t, next_t, ui, zi, n_events, 3
            parts[i] = v
        t = next_t
        next_t = t - math.log(1.0 - U[k]) / total
        k += 1
        ui = k
        zi = zk
        n_events += 1
    t = t_stop
    return t, next_t, ui, zi, n_events, 0


@njit(cache=True)
def two_allele_moran(n_a, N, t, next_t, t_stop, pair_rate, flip_a, flip_A, U, ui):
    """Two-allele Moran system on the count ``n_a`` of allele ``a``.

    Resampling moves ``n_a`` by one in either direction at rate
    ``pair_rate * n_a * (N - n_a)`` each; ``a`` particles mutate to ``A`` at
    ``flip_a`` each and ``A`` to ``a`` at ``flip_A`` each.
    Returns ``(n_a, t, next_t, ui, n_events, status)``.
    """
    n_events = 0
    nU = U.shape[0]
    if math.isnan(next_t):
        if ui >= nU:
            return n_a, t, next_t, ui, n_events, 1
        nA = N - n_a
        total = 2.0 * pair_rate * n_a * nA + flip_a * n_a + flip_A * nA
        next_t = t - math.log(1.0 - U[ui]) / total if total > 0.0 else math.inf
        ui += 1
    while next_t <= t_stop:
        if ui + 2 > nU:
            return n_a, t, next_t, ui, n_events, 1
        nA = N - n_a
        res = pair_rate * n_a * nA
        down = res + flip_a * n_a
        total = down + res + flip_A * nA
        if U[ui] * total < down:
            n_a -= 1
        else:
            n_a += 1
        t = next_t
        nA = N - n_a
        total = 2.0 * pair_rate * n_a * nA + flip_a * n_a + flip_A * nA
        next_t = t - math.log(1.0 - U[ui + 1]) / total if total > 0.0 else math.inf
        ui += 2
        n_events += 1
    t = t_stop
    return n_a, t, next_t, ui, n_events, 0


@njit(cache=True)
def wf_euler(W, steps, dt, drift_up, drift_down, diff, noise):
    """Vectorised Euler-Maruyama for the Wright-Fisher SDE with clamping.

    ``W`` (paths) is updated in place over ``steps`` steps; ``noise`` has
    shape ``(steps, paths)``.  Returns the number of clamp activations.
    """
    clamps = 0
    sq = math.sqrt(dt)
    for s in range(steps):
        for p in range(W.shape[0]):
            w = W[p]
            w += (drift_up * (1.0 - w) - drift_down * w) * dt + math.sqrt(diff * w * (1.0 - w)) * sq * noise[s, p]
            if w < 0.0:
                w = 0.0
                clamps += 1
            elif w > 1.0:
                w = 1.0
                clamps += 1
            W[p] = w
    return clamps
