"""Compiled float kernels for the orbit loop and the limit-integral sampler.

Matrices are ``(n, n)`` float64 arrays holding unitriangular elements.  The
coordinate order is passed as two index arrays ``oi, oj`` (0-based entry
positions) plus ``odist`` (superdiagonal distance of each position).
Test functions are packed as ``freqs (J, T, d)``, ``coeffs (J, T)``,
``nterms (J,)``, ``windows (J,)`` and a window mask ``wmask (d,)``.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

TWO_PI = 2.0 * math.pi


@nb.njit(cache=True, nogil=True)
def ut_mul(a, b, out):
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = 0.0
        out[i, i] = 1.0
        for j in range(i + 1, n):
            s = a[i, j] + b[i, j]
            for l in range(i + 1, j):
                s += a[i, l] * b[l, j]
            out[i, j] = s


@nb.njit(cache=True, nogil=True)
def to_malcev(g, oi, oj, work, t):
    n = g.shape[0]
    for i in range(n):
        for j in range(n):
            work[i, j] = g[i, j]
    for e in range(oi.shape[0]):
        i = oi[e]
        j = oj[e]
        c = work[i, j]
        t[e] = c
        if c != 0.0:
            # left-multiply by exp(-c E_ij): row_i -= c * row_j
            for l in range(j, n):
                work[i, l] -= c * work[j, l]


@nb.njit(cache=True, nogil=True)
def from_malcev(t, oi, oj, g):
    n = g.shape[0]
    for i in range(n):
        for j in range(n):
            g[i, j] = 1.0 if i == j else 0.0
    for e in range(oi.shape[0]):
        c = t[e]
        if c != 0.0:
            i = oi[e]
            j = oj[e]
            # right-multiply by exp(c E_ij): col_j += c * col_i
            for r in range(i + 1):
                g[r, j] += c * g[r, i]


@nb.njit(cache=True, nogil=True)
def reduce_inplace(g, oi, oj, odist, work, t):
    """Right-multiply ``g`` by a lattice element so its coordinates lie in [0, 1).

    On return ``t`` holds the reduced coordinates.
    """
    n = g.shape[0]
    for d in range(1, n):
        to_malcev(g, oi, oj, work, t)
        for e in range(oi.shape[0]):
            if odist[e] != d:
                continue
            m = math.floor(t[e])
            if m != 0.0:
                i = oi[e]
                j = oj[e]
                for r in range(i + 1):
                    g[r, j] -= m * g[r, i]
    to_malcev(g, oi, oj, work, t)


# -- double-double arithmetic for the orbit state ---------------------------------
# Orbits of a unipotent translation separate polynomially, so per-step
# rounding in plain doubles grows like m^k along the orbit.  The orbit loop
# therefore keeps every point as an unevaluated sum hi + lo (~106 bits).

_SPLITTER = 134217729.0  # 2^27 + 1


@nb.njit(cache=True, nogil=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@nb.njit(cache=True, nogil=True, inline="always")
def _fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@nb.njit(cache=True, nogil=True, inline="always")
def _two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@nb.njit(cache=True, nogil=True, inline="always")
def dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    t, f = _two_sum(al, bl)
    e += t
    s, e = _fast_two_sum(s, e)
    e += f
    return _fast_two_sum(s, e)


@nb.njit(cache=True, nogil=True, inline="always")
def dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _fast_two_sum(p, e)


@nb.njit(cache=True, nogil=True, inline="always")
def dd_floor(h, l):
    f = math.floor(h)
    if f == h:
        return f + math.floor(l)
    return f


@nb.njit(cache=True, nogil=True)
def ut_mul_dd(ah, al, bh, bl, oh, ol):
    n = ah.shape[0]
    for i in range(n):
        for j in range(n):
            oh[i, j] = 0.0
            ol[i, j] = 0.0
        oh[i, i] = 1.0
        for j in range(i + 1, n):
            sh, sl = dd_add(ah[i, j], al[i, j], bh[i, j], bl[i, j])
            for l in range(i + 1, j):
                ph, pl = dd_mul(ah[i, l], al[i, l], bh[l, j], bl[l, j])
                sh, sl = dd_add(sh, sl, ph, pl)
            oh[i, j] = sh
            ol[i, j] = sl


@nb.njit(cache=True, nogil=True)
def to_malcev_dd(gh, gl, oi, oj, wh, wl, th, tl):
    n = gh.shape[0]
    wh[:, :] = gh
    wl[:, :] = gl
    for e in range(oi.shape[0]):
        i = oi[e]
        j = oj[e]
        ch = wh[i, j]
        cl = wl[i, j]
        th[e] = ch
        tl[e] = cl
        if ch != 0.0 or cl != 0.0:
            for l in range(j, n):
                ph, pl = dd_mul(ch, cl, wh[j, l], wl[j, l])
                wh[i, l], wl[i, l] = dd_add(wh[i, l], wl[i, l], -ph, -pl)


@nb.njit(cache=True, nogil=True)
def reduce_inplace_dd(gh, gl, oi, oj, odist, wh, wl, th, tl):
    """Double-double ``reduce_inplace``; ``th`` holds the leading coordinate parts."""
    n = gh.shape[0]
    for d in range(1, n):
        to_malcev_dd(gh, gl, oi, oj, wh, wl, th, tl)
        for e in range(oi.shape[0]):
            if odist[e] != d:
                continue
            m = dd_floor(th[e], tl[e])
            if m != 0.0:
                i = oi[e]
                j = oj[e]
                for r in range(i + 1):
                    ph, pl = dd_mul(m, 0.0, gh[r, i], gl[r, i])
                    gh[r, j], gl[r, j] = dd_add(gh[r, j], gl[r, j], -ph, -pl)
    to_malcev_dd(gh, gl, oi, oj, wh, wl, th, tl)


@nb.njit(cache=True, nogil=True)
def eval_trig(t, freqs, coeffs, nterms, window, wmask):
    re = 0.0
    im = 0.0
    d = t.shape[0]
    for s in range(nterms):
        ph = 0.0
        for e in range(d):
            m = freqs[s, e]
            if m != 0:
                ph += m * t[e]
        ph = TWO_PI * (ph - math.floor(ph))
        c = coeffs[s]
        cr = math.cos(ph)
        sr = math.sin(ph)
        re += c.real * cr - c.imag * sr
        im += c.real * sr + c.imag * cr
    if window > 0:
        w = 1.0
        for e in range(d):
            if wmask[e]:
                w *= (4.0 * t[e] * (1.0 - t[e])) ** window
        re *= w
        im *= w
    return complex(re, im)


@nb.njit(cache=True, nogil=True)
def orbit_trace(steps, steps_lo, p0, p0_lo, oi, oj, odist, freqs, coeffs, nterms, windows,
                wmask, n_steps, checkpoints):
    """Partial sums of prod_j f_j(a^{jn} x) for n = 0..n_steps-1.

    ``steps[j] + steps_lo[j] = a^(j+1)`` and ``p0[j] + p0_lo[j]`` are the
    starting points, both as double-double splits.  Returns the running
    average at each checkpoint (counts of terms summed).
    """
    J = steps.shape[0]
    n = steps.shape[1]
    d = oi.shape[0]
    ph = p0.copy()
    pl = p0_lo.copy()
    th = np.empty((n, n))
    tl = np.empty((n, n))
    wh = np.empty((n, n))
    wl = np.empty((n, n))
    t = np.empty(d)
    tlo = np.empty(d)
    coords = np.empty((J, d))
    for j in range(J):
        reduce_inplace_dd(ph[j], pl[j], oi, oj, odist, wh, wl, t, tlo)
        coords[j, :] = t
    out = np.empty(checkpoints.shape[0], dtype=np.complex128)
    acc = 0.0 + 0.0j
    c = 0
    for step in range(n_steps):
        prod = 1.0 + 0.0j
        for j in range(J):
            prod *= eval_trig(coords[j], freqs[j], coeffs[j], nterms[j], windows[j], wmask)
        acc += prod
        while c < checkpoints.shape[0] and checkpoints[c] == step + 1:
            out[c] = acc / (step + 1)
            c += 1
        for j in range(J):
            ut_mul_dd(steps[j], steps_lo[j], ph[j], pl[j], th, tl)
            ph[j, :, :] = th
            pl[j, :, :] = tl
            reduce_inplace_dd(ph[j], pl[j], oi, oj, odist, wh, wl, t, tlo)
            coords[j, :] = t
    return out


@nb.njit(cache=True, nogil=True)
def orbit_points(steps, steps_lo, p0, p0_lo, oi, oj, odist, n_steps):
    """Reduced orbit points p_j(n) for n = 0..n_steps, leading parts (testing aid)."""
    J = steps.shape[0]
    n = steps.shape[1]
    d = oi.shape[0]
    ph = p0.copy()
    pl = p0_lo.copy()
    th = np.empty((n, n))
    tl = np.empty((n, n))
    wh = np.empty((n, n))
    wl = np.empty((n, n))
    t = np.empty(d)
    tlo = np.empty(d)
    out = np.empty((n_steps + 1, J, n, n))
    for j in range(J):
        reduce_inplace_dd(ph[j], pl[j], oi, oj, odist, wh, wl, t, tlo)
    out[0] = ph
    for step in range(n_steps):
        for j in range(J):
            ut_mul_dd(steps[j], steps_lo[j], ph[j], pl[j], th, tl)
            ph[j, :, :] = th
            pl[j, :, :] = tl
            reduce_inplace_dd(ph[j], pl[j], oi, oj, odist, wh, wl, t, tlo)
        out[step + 1] = ph
    return out


@nb.njit(cache=True, nogil=True)
def _power_into(y, m, out, tmp):
    n = y.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = 1.0 if i == j else 0.0
    for _ in range(m):
        ut_mul(out, y, tmp)
        out[:, :] = tmp


@nb.njit(cache=True, nogil=True)
def limit_integrand(x, u, oi, oj, odist, binoms, freqs, coeffs, nterms,
                    windows, wmask, out):
    """Integrand prod_j f_j(x prod_i y_i^C(j,i)) at each row of ``u``.

    ``u`` has shape ``(M, Dy)``: for ``i = 1..k`` in turn, the coordinates of
    ``y_i`` at the positions of distance ``>= i``.  ``binoms[j, i]`` holds
    ``C(j+1, i+1)``.
    """
    M = u.shape[0]
    n = x.shape[0]
    k = n - 1
    d = oi.shape[0]
    J = freqs.shape[0]
    ys = np.empty((k, n, n))
    tcomp = np.empty(d)
    g = np.empty((n, n))
    tmp = np.empty((n, n))
    pw = np.empty((n, n))
    work = np.empty((n, n))
    t = np.empty(d)
    for s in range(M):
        col = 0
        for i in range(1, k + 1):
            for e in range(d):
                if odist[e] >= i:
                    tcomp[e] = u[s, col]
                    col += 1
                else:
                    tcomp[e] = 0.0
            from_malcev(tcomp, oi, oj, ys[i - 1])
        prod = 1.0 + 0.0j
        for j in range(J):
            g[:, :] = x
            top = j + 1 if j + 1 < k else k
            for i in range(top):
                m = binoms[j, i]
                if m == 0:
                    continue
                _power_into(ys[i], m, pw, tmp)
                ut_mul(g, pw, tmp)
                g[:, :] = tmp
            reduce_inplace(g, oi, oj, odist, work, t)
            prod *= eval_trig(t, freqs[j], coeffs[j], nterms[j], windows[j], wmask)
        out[s] = prod


@nb.njit(cache=True, nogil=True)
def eval_many(coords, freqs, coeffs, nterms, window, wmask, out):
    for s in range(coords.shape[0]):
        out[s] = eval_trig(coords[s], freqs, coeffs, nterms, window, wmask)
