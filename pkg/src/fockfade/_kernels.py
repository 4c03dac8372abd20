"""Dense Fock-basis evolution kernels.

All kernels fill a rank-4 array ``rho[a, b, c, d]`` holding the matrix
element <a|_1 <b|_2 rho |c>_1 |d>_2, restricted to the triangles
a + b <= size - 1 and c + d <= size - 1 (total-photon-number cutoff per
mode-pair index).  Coefficient formulas are real throughout.

Inputs are Schmidt-form coefficient vectors ``q`` with per-mode index
offsets ``off1``/``off2`` (the state is sum_n q[n] |n+off1>|n+off2>), or
for the generic engine an explicit list of elementary density entries.

The functions are nopython-compatible; ``fockfade._backend.maybe_jit``
decides whether they run compiled or interpreted.
"""

import math

import numpy as np

from ._backend import maybe_jit

# Largest Fock index any binomial lookup can touch.  C(400, 200) ~ 1e119
# still fits comfortably in float64.
MAX_PHOTON = 400


def _binomial_table(n: int) -> np.ndarray:
    table = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        table[i, 0] = 1.0
        for j in range(1, i + 1):
            table[i, j] = table[i - 1, j - 1] + table[i - 1, j]
    return table


BINOM = _binomial_table(MAX_PHOTON)


def asym_noiseless(q, off1, off2, eta2, size, binom):
    """Pure-loss channel on mode 2 only (mode 1 kept, eta1=1, chi1=0)."""
    rho = np.zeros((size, size, size, size))
    nq = q.shape[0]
    loss = 1.0 - eta2 * eta2
    for a in range(size):
        s = a - off1
        if s < 0 or s >= nq:
            continue
        for c in range(size):
            t = c - off1
            if t < 0 or t >= nq:
                continue
            qq = q[s] * q[t]
            if qq == 0.0:
                continue
            m2 = s + off2
            n2 = t + off2
            bmax = min(m2, size - 1 - a)
            for b in range(bmax + 1):
                ell = m2 - b
                d = n2 - ell
                if d < 0 or d > size - 1 - c:
                    continue
                rho[a, b, c, d] = (
                    qq
                    * math.sqrt(binom[m2, ell] * binom[n2, ell])
                    * loss**ell
                    * eta2 ** (b + d)
                )
    return rho


def asym_noisy(q, off1, off2, phi2, zeta2, size, binom):
    """Noisy attenuator on mode 2 only (mode 1 kept)."""
    rho = np.zeros((size, size, size, size))
    nq = q.shape[0]
    ip2 = 1.0 / (phi2 * phi2)
    gain = 1.0 - ip2
    damp = zeta2 / phi2
    loss = 1.0 - zeta2 * zeta2
    for a in range(size):
        s = a - off1
        if s < 0 or s >= nq:
            continue
        for c in range(size):
            t = c - off1
            if t < 0 or t >= nq:
                continue
            qq = q[s] * q[t]
            if qq == 0.0:
                continue
            m2 = s + off2
            n2 = t + off2
            for b in range(size - a):
                d = n2 - m2 + b
                if d < 0 or d > size - 1 - c:
                    continue
                lo = max(0, b - m2)
                hi = min(b, d)
                acc = 0.0
                for lp in range(lo, hi + 1):
                    ell = m2 - b + lp
                    if ell > n2:
                        continue
                    acc += (
                        math.sqrt(
                            binom[b, lp]
                            * binom[d, lp]
                            * binom[m2, ell]
                            * binom[n2, ell]
                        )
                        * damp ** (m2 + n2 - 2 * ell)
                        * gain**lp
                        * loss**ell
                    )
                if acc != 0.0:
                    rho[a, b, c, d] = ip2 * qq * acc
    return rho


def sym_noiseless(q, off1, off2, eta1, eta2, ell_max, size, binom):
    """Independent pure-loss channels on both modes."""
    rho = np.zeros((size, size, size, size))
    nq = q.shape[0]
    loss1 = 1.0 - eta1 * eta1
    loss2 = 1.0 - eta2 * eta2
    for b in range(size):
        for d in range(size):
            for ell in range(ell_max + 1):
                s = b - off2 + ell
                t = d - off2 + ell
                if s < 0 or t < 0 or s >= nq or t >= nq:
                    continue
                qq = q[s] * q[t]
                if qq == 0.0:
                    continue
                m2 = s + off2
                n2 = t + off2
                f2 = (
                    math.sqrt(binom[m2, ell] * binom[n2, ell])
                    * eta2 ** (b + d)
                    * loss2**ell
                )
                m1 = s + off1
                n1 = t + off1
                amax = min(m1, size - 1 - b)
                for a in range(amax + 1):
                    j = m1 - a
                    if j > n1:
                        continue
                    c = a + n1 - m1
                    if c < 0 or c > size - 1 - d:
                        continue
                    f1 = (
                        math.sqrt(binom[m1, j] * binom[n1, j])
                        * eta1 ** (m1 + n1 - 2 * j)
                        * loss1**j
                    )
                    rho[a, b, c, d] += qq * f1 * f2
    return rho


def sym_noisy(q, off1, off2, phi1, zeta1, phi2, zeta2, ell_max, size, binom):
    """Independent noisy attenuators on both modes."""
    rho = np.zeros((size, size, size, size))
    nq = q.shape[0]
    ip1 = 1.0 / (phi1 * phi1)
    ip2 = 1.0 / (phi2 * phi2)
    gain1 = 1.0 - ip1
    gain2 = 1.0 - ip2
    damp1 = zeta1 / phi1
    damp2 = zeta2 / phi2
    loss1 = 1.0 - zeta1 * zeta1
    loss2 = 1.0 - zeta2 * zeta2
    norm = ip1 * ip2
    for b in range(size):
        for d in range(size):
            for lp in range(min(b, d) + 1):
                for ell in range(ell_max + 1):
                    s = b - off2 + ell - lp
                    t = d - off2 + ell - lp
                    if s < 0 or t < 0 or s >= nq or t >= nq:
                        continue
                    qq = q[s] * q[t]
                    if qq == 0.0:
                        continue
                    m2 = s + off2
                    n2 = t + off2
                    if ell > m2 or ell > n2:
                        continue
                    f2 = (
                        math.sqrt(
                            binom[b, lp]
                            * binom[d, lp]
                            * binom[m2, ell]
                            * binom[n2, ell]
                        )
                        * damp2 ** (m2 + n2 - 2 * ell)
                        * gain2**lp
                        * loss2**ell
                    )
                    if f2 == 0.0:
                        continue
                    m1 = s + off1
                    n1 = t + off1
                    for j in range(min(m1, n1) + 1):
                        f1j = (
                            math.sqrt(binom[m1, j] * binom[n1, j])
                            * damp1 ** (m1 + n1 - 2 * j)
                            * loss1**j
                        )
                        if f1j == 0.0:
                            continue
                        base = norm * qq * f2 * f1j
                        for a in range(max(0, m1 - j), size - b):
                            jp = a - m1 + j
                            c = a + n1 - m1
                            if c < 0 or c > size - 1 - d:
                                continue
                            rho[a, b, c, d] += base * math.sqrt(
                                binom[a, jp] * binom[c, jp]
                            ) * gain1**jp
    return rho


def kraus_table(phi, zeta, in_size, out_size, binom):
    """Single-mode transfer coefficients A[m, n, m'].

    A[m, n, m'] is the weight with which the elementary operator |m><n|
    maps onto |m'><n'| under the composed attenuator/amplifier channel;
    the bra index is implied, n' = n - m + m'.
    """
    table = np.zeros((in_size, in_size, out_size))
    ip = 1.0 / (phi * phi)
    gain = 1.0 - ip
    damp = zeta / phi
    loss = 1.0 - zeta * zeta
    for m in range(in_size):
        for n in range(in_size):
            for mp in range(out_size):
                npr = n - m + mp
                if npr < 0:
                    continue
                acc = 0.0
                for ell in range(min(m, n) + 1):
                    lp = mp - m + ell
                    if lp < 0:
                        continue
                    acc += (
                        math.sqrt(
                            binom[mp, lp]
                            * binom[npr, lp]
                            * binom[m, ell]
                            * binom[n, ell]
                        )
                        * damp ** (m + n - 2 * ell)
                        * gain**lp
                        * loss**ell
                    )
                if acc != 0.0:
                    table[m, n, mp] = ip * acc
    return table


def generic_contract(idx, vals, table1, table2, size):
    """Tensor two single-mode transfer tables over sparse input entries.

    ``idx`` rows are (m1, m2, n1, n2): ket/bra Fock indices of an input
    entry |m1>_1<n1| (x) |m2>_2<n2| with weight ``vals``.
    """
    rho = np.zeros((size, size, size, size))
    for k in range(idx.shape[0]):
        m1 = idx[k, 0]
        m2 = idx[k, 1]
        n1 = idx[k, 2]
        n2 = idx[k, 3]
        w = vals[k]
        for a in range(size):
            c = n1 - m1 + a
            if c < 0 or c >= size:
                continue
            f1 = table1[m1, n1, a] * w
            if f1 == 0.0:
                continue
            for b in range(size - a):
                d = n2 - m2 + b
                if d < 0 or d > size - 1 - c:
                    continue
                f2 = table2[m2, n2, b]
                if f2 != 0.0:
                    rho[a, b, c, d] += f1 * f2
    return rho


asym_noiseless = maybe_jit(asym_noiseless)
asym_noisy = maybe_jit(asym_noisy)
sym_noiseless = maybe_jit(sym_noiseless)
sym_noisy = maybe_jit(sym_noisy)
kraus_table = maybe_jit(kraus_table)
generic_contract = maybe_jit(generic_contract)
