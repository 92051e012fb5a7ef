"""Compiled inner loops.

Every kernel takes a tensor stack in its flat form: ``data`` holds all degree
blocks back to back (row-major), ``offsets[d]:offsets[d + 1]`` delimits block
``d`` of degree ``degrees[d]`` and ``scales[d] = c_p / N^((p-1)/2)``.
Spins are float64 arrays of +-1.0. Summation order is fixed: degree-major,
tuples row-major.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def block_sum(block, n, p, sigma):
    """sum over all index tuples of g[t] * sigma[t_1] * ... * sigma[t_p]."""
    total = 0.0
    if p == 2:
        for i in range(n):
            si = sigma[i]
            row = i * n
            for j in range(n):
                total += block[row + j] * si * sigma[j]
        return total
    digits = np.zeros(p, dtype=np.int64)
    for idx in range(block.size):
        term = block[idx]
        for q in range(p):
            term *= sigma[digits[q]]
        total += term
        q = p - 1
        while q >= 0:
            digits[q] += 1
            if digits[q] < n:
                break
            digits[q] = 0
            q -= 1
    return total


@njit(cache=True, nogil=True)
def stack_energy(data, offsets, degrees, scales, n, sigma):
    h = 0.0
    for d in range(degrees.size):
        blk = data[offsets[d]:offsets[d + 1]]
        h += scales[d] * block_sum(blk, n, degrees[d], sigma)
    return h


@njit(cache=True, nogil=True)
def stack_inner(a, b):
    total = 0.0
    for i in range(a.size):
        total += a[i] * b[i]
    return total


@njit(cache=True, nogil=True)
def odd_sum(block, n, p, k, sigma):
    """Sum of g[t] * prod(sigma[t]) over tuples where ``k`` appears an odd
    number of times; also returns how many tuples containing ``k`` were read.

    Tuples are enumerated by the position ``j`` of the first occurrence of
    ``k``: positions before ``j`` avoid ``k``, positions after are free.
    """
    total = 0.0
    touched = 0
    digits = np.zeros(p, dtype=np.int64)
    for j in range(p):
        n_pre = (n - 1) ** j
        n_suf = n ** (p - 1 - j)
        for a in range(n_pre):
            rem = a
            for q in range(j - 1, -1, -1):
                v = rem % (n - 1)
                rem //= n - 1
                digits[q] = v if v < k else v + 1
            digits[j] = k
            for b in range(n_suf):
                rem = b
                for q in range(p - 1, j, -1):
                    digits[q] = rem % n
                    rem //= n
                idx = 0
                mult = 0
                prod = 1.0
                for q in range(p):
                    idx = idx * n + digits[q]
                    prod *= sigma[digits[q]]
                    if digits[q] == k:
                        mult += 1
                touched += 1
                if mult % 2 == 1:
                    total += block[idx] * prod
    return total, touched


@njit(cache=True, nogil=True)
def local_fields(block2, n, sigma, out):
    """out[k] = sum_j (g_kj + g_jk) sigma_j."""
    for k in range(n):
        acc = 0.0
        for j in range(n):
            acc += (block2[k * n + j] + block2[j * n + k]) * sigma[j]
        out[k] = acc


@njit(cache=True, nogil=True)
def flip_delta(data, offsets, degrees, scales, n, sigma, fields, d2, k):
    """Energy change from negating spin ``k`` (state not modified)."""
    delta = 0.0
    touched = 0
    sk = sigma[k]
    for d in range(degrees.size):
        blk = data[offsets[d]:offsets[d + 1]]
        if d == d2:
            s = sk * (fields[k] - 2.0 * blk[k * n + k] * sk)
            touched += n
        else:
            s, t = odd_sum(blk, n, degrees[d], k, sigma)
            touched += t
        delta += -2.0 * scales[d] * s
    return delta, touched


@njit(cache=True, nogil=True)
def apply_flip(data, offsets, n, sigma, fields, d2, k):
    """Negate spin ``k`` and maintain the degree-2 local fields."""
    change = -2.0 * sigma[k]
    sigma[k] = -sigma[k]
    if d2 >= 0:
        blk = data[offsets[d2]:offsets[d2 + 1]]
        for j in range(n):
            fields[j] += (blk[j * n + k] + blk[k * n + j]) * change


@njit(cache=True, nogil=True)
def resync(data, offsets, degrees, scales, n, sigma, fields, d2):
    if d2 >= 0:
        local_fields(data[offsets[d2]:offsets[d2 + 1]], n, sigma, fields)
    return stack_energy(data, offsets, degrees, scales, n, sigma)


@njit(cache=True, nogil=True)
def sweep_profile(data, offsets, degrees, scales, n, tol, resync_every):
    """Visit all 2^n states in reflected Gray-code order from all-plus.

    Returns per-level running maxima (level index = number of +1 spins, i.e.
    (m + n) / 2), the bitmask (bit i set <=> sigma_i = -1) and visit step of
    each level's argmax, visit counts per level, and the global argmax
    bitmask/step. A state replaces the incumbent only if it beats it by more
    than ``tol``, so near-ties go to the first visited state.
    """
    d2 = -1
    for d in range(degrees.size):
        if degrees[d] == 2:
            d2 = d
    sigma = np.ones(n)
    fields = np.zeros(n)
    h = resync(data, offsets, degrees, scales, n, sigma, fields, d2)

    nlev = n + 1
    best = np.full(nlev, -np.inf)
    best_code = np.zeros(nlev, dtype=np.int64)
    best_step = np.zeros(nlev, dtype=np.int64)
    counts = np.zeros(nlev, dtype=np.int64)
    g_best = -np.inf
    g_code = 0
    g_step = 0

    code = 0
    nplus = n
    total = 1 << n
    for step in range(total):
        if step > 0:
            k = 0
            while (step >> k) & 1 == 0:
                k += 1
            delta, _ = flip_delta(data, offsets, degrees, scales, n, sigma, fields, d2, k)
            apply_flip(data, offsets, n, sigma, fields, d2, k)
            h += delta
            code ^= 1 << k
            if sigma[k] > 0:
                nplus += 1
            else:
                nplus -= 1
            if step % resync_every == 0:
                h = resync(data, offsets, degrees, scales, n, sigma, fields, d2)
        counts[nplus] += 1
        if h > best[nplus] + tol:
            best[nplus] = h
            best_code[nplus] = code
            best_step[nplus] = step
        if h > g_best + tol:
            g_best = h
            g_code = code
            g_step = step
    return best, best_code, best_step, counts, g_code, g_step


@njit(cache=True, nogil=True)
def anneal_run(data, offsets, degrees, scales, n, sigma0, proposals, uniforms, temps,
               resync_every):
    """Metropolis single-spin-flip annealing for maximization; keeps the best state."""
    d2 = -1
    for d in range(degrees.size):
        if degrees[d] == 2:
            d2 = d
    sigma = sigma0.copy()
    fields = np.zeros(n)
    h = resync(data, offsets, degrees, scales, n, sigma, fields, d2)
    best = h
    best_sigma = sigma.copy()
    for s in range(proposals.size):
        k = proposals[s]
        delta, _ = flip_delta(data, offsets, degrees, scales, n, sigma, fields, d2, k)
        if delta >= 0.0 or uniforms[s] < np.exp(delta / temps[s]):
            apply_flip(data, offsets, n, sigma, fields, d2, k)
            h += delta
            if h > best:
                best = h
                best_sigma[:] = sigma
        if (s + 1) % resync_every == 0:
            h = resync(data, offsets, degrees, scales, n, sigma, fields, d2)
    return best_sigma


@njit(cache=True, nogil=True)
def sweep_profile_quadratic(block2, scale, n, tol, resync_every):
    """``sweep_profile`` specialised to a single degree-2 block."""
    a = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a[i, j] = block2[i * n + j] + block2[j * n + i]
    sigma = np.ones(n)
    fields = np.zeros(n)
    local_fields(block2, n, sigma, fields)
    h = scale * block_sum(block2, n, 2, sigma)

    nlev = n + 1
    best = np.full(nlev, -np.inf)
    best_code = np.zeros(nlev, dtype=np.int64)
    best_step = np.zeros(nlev, dtype=np.int64)
    counts = np.zeros(nlev, dtype=np.int64)
    g_best = -np.inf
    g_code = 0
    g_step = 0

    code = 0
    nplus = n
    total = 1 << n
    for step in range(total):
        if step > 0:
            k = 0
            while (step >> k) & 1 == 0:
                k += 1
            sk = sigma[k]
            h += -2.0 * scale * (sk * (fields[k] - 2.0 * block2[k * n + k] * sk))
            change = -2.0 * sk
            sigma[k] = -sk
            row = a[k]
            for j in range(n):
                fields[j] += row[j] * change
            code ^= 1 << k
            if sk < 0:
                nplus += 1
            else:
                nplus -= 1
            if step % resync_every == 0:
                local_fields(block2, n, sigma, fields)
                h = scale * block_sum(block2, n, 2, sigma)
        counts[nplus] += 1
        if h > best[nplus] + tol:
            best[nplus] = h
            best_code[nplus] = code
            best_step[nplus] = step
        if h > g_best + tol:
            g_best = h
            g_code = code
            g_step = step
    return best, best_code, best_step, counts, g_code, g_step
