"""Compiled inner loops of the Gibbs sampler.

All kernels mutate their array arguments in place and draw from an explicit
``numpy.random.Generator``.
"""

from __future__ import annotations

import math

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)

HALF_PI = 0.5 * math.pi


@_jit
def tilted_beta_rejection(c, rng):
    # Beta(1/2, 1/2) proposal, acceptance exp(c * alpha); c <= 0
    while True:
        s = math.sin(HALF_PI * rng.random())
        alpha = s * s
        if alpha <= 0.0 or alpha >= 1.0:
            continue
        if rng.random() < math.exp(c * alpha):
            return alpha


@_jit
def tilted_beta_vonmises(c, rng):
    # alpha = sin^2(psi/2) with psi ~ von Mises(0, kappa = -c/2) (Best-Fisher),
    # written so that no step cancels when kappa is large
    kappa = -0.5 * c
    s4 = math.sqrt(1.0 + 4.0 * kappa * kappa)
    tau = 1.0 + s4
    one_minus_rho = (math.sqrt(2.0 * tau) - 1.0 - 1.0 / (s4 + 2.0 * kappa)) / (2.0 * kappa)
    rho = 1.0 - one_minus_rho
    rm1 = one_minus_rho * one_minus_rho / (2.0 * rho)
    while True:
        half = HALF_PI * rng.random()
        sh = math.sin(half) ** 2
        ch = math.cos(half) ** 2
        denom = rm1 + 2.0 * ch
        cc = kappa * rm1 * (rm1 + 2.0) / denom
        u2 = rng.random()
        if cc * (2.0 - cc) - u2 > 0.0 or (u2 > 0.0 and math.log(cc / u2) + 1.0 - cc >= 0.0):
            alpha = rm1 * sh / denom
            if 0.0 < alpha < 1.0:
                return alpha


@_jit
def tilted_beta(c, rng):
    if c >= -1.0:
        return tilted_beta_rejection(c, rng)
    return tilted_beta_vonmises(c, rng)


@_jit
def tilted_beta_many(c, size, rng):
    out = np.empty(size)
    for t in range(size):
        out[t] = tilted_beta(c, rng)
    return out


@_jit
def compute_c(gamma, hvec, c):
    p = gamma.shape[0]
    for m in range(p):
        c[m] = 0.0
    for j in range(p):
        hj = hvec[j]
        for m in range(p):
            g = gamma[j, m]
            c[m] += g * g * hj


@_jit
def pair_update(gamma, lam_inv, c, hvec, i, j, rng):
    """Gibbs update of rows i, j of gamma; returns cos^2(theta + omega)."""
    p = gamma.shape[1]
    a11 = 0.0
    a12 = 0.0
    a22 = 0.0
    for m in range(p):
        gi = gamma[i, m]
        gj = gamma[j, m]
        li = lam_inv[m]
        a11 += gi * gi * li
        a12 += gi * gj * li
        a22 += gj * gj * li
    s_gap = 2.0 * math.hypot(0.5 * (a11 - a22), a12)
    omega = 0.5 * math.atan2(2.0 * a12, a11 - a22)
    if omega <= -HALF_PI:
        omega += math.pi
    dh = hvec[i] - hvec[j]
    craw = -0.5 * s_gap * dh
    if craw <= 0.0:
        alpha = tilted_beta(craw, rng)
        cos2 = alpha
        phi = math.atan2(math.sqrt(1.0 - alpha), math.sqrt(alpha))
    else:
        # density exp(craw cos^2) = const * exp(-craw sin^2): sample sin^2 instead
        alpha = tilted_beta(-craw, rng)
        cos2 = 1.0 - alpha
        phi = math.atan2(math.sqrt(alpha), math.sqrt(1.0 - alpha))
    if rng.random() < 0.5:
        phi = -phi
    theta = phi - omega
    while theta > HALF_PI:
        theta -= math.pi
    while theta <= -HALF_PI:
        theta += math.pi
    e1 = 1.0 if rng.random() < 0.5 else -1.0
    e2 = 1.0 if rng.random() < 0.5 else -1.0
    ct = math.cos(theta)
    st = math.sin(theta)
    for m in range(p):
        gi = gamma[i, m]
        gj = gamma[j, m]
        ni = e1 * (ct * gi - st * gj)
        nj = e2 * (st * gi + ct * gj)
        # row i and j squares sum to a constant per column
        c[m] += dh * (ni * ni - gi * gi)
        gamma[i, m] = ni
        gamma[j, m] = nj
    return cos2


@_jit
def lambda_step(lam, c, shape, b, rng):
    """Eigenvalue update; exact inverse-gamma for b=1, Metropolis for b=0."""
    p = lam.shape[0]
    accepted = 0
    for i in range(p):
        prop = 0.5 * c[i] / rng.standard_gamma(shape[i])
        if b == 1:
            lam[i] = prop
            accepted += 1
            continue
        logr = 0.0
        cur = lam[i]
        for j in range(p):
            if j != i:
                logr += math.log(abs(prop - lam[j])) - math.log(abs(cur - lam[j]))
        if logr >= 0.0 or math.log(rng.random()) < logr:
            lam[i] = prop
            accepted += 1
    return accepted


@_jit
def pair_sweep(gamma, lam, c, hvec, scan_m, rng):
    p = gamma.shape[0]
    lam_inv = 1.0 / lam
    if scan_m <= 0:
        for i in range(p - 1):
            for j in range(i + 1, p):
                pair_update(gamma, lam_inv, c, hvec, i, j, rng)
    else:
        for _ in range(scan_m):
            i = rng.integers(0, p)
            j = rng.integers(0, p - 1)
            if j >= i:
                j += 1
            if i > j:
                i, j = j, i
            pair_update(gamma, lam_inv, c, hvec, i, j, rng)


@_jit
def run_sweeps(gamma, lam, c, hvec, shape, b, scan_m, n_sweeps, rng):
    """``n_sweeps`` full Gibbs sweeps; returns the number of accepted eigenvalue moves."""
    accepted = 0
    for _ in range(n_sweeps):
        compute_c(gamma, hvec, c)
        accepted += lambda_step(lam, c, shape, b, rng)
        pair_sweep(gamma, lam, c, hvec, scan_m, rng)
    compute_c(gamma, hvec, c)
    return accepted
