"""Fused numba kernels for the time-stepping hot path.

These kernels exist purely for speed: each one collapses what would be several
numpy passes (and their temporaries) into a single sweep. Wavevector values
are reconstructed from the 1D component tables instead of broadcast 3D arrays
to keep memory traffic at the minimum.

State layout: a (6, n, n, n//2+1) complex array holding the velocity
coefficients in [0:3] and the magnetic coefficients in [3:6].
"""

import warnings

# stale-TBB advisory from numba's threading-layer probe; workqueue/OMP is fine
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

from numba import njit, prange


@njit(parallel=True, cache=True)
def curl_batch(state, k1, k1z, scale, out):
    """out[0:6] = scale*(u, b); out[6:9] = scale*curl u; out[9:12] = scale*curl b."""
    n, m, l = state.shape[1], state.shape[2], state.shape[3]
    for i in prange(n):
        kx = k1[i]
        for j in range(m):
            ky = k1[j]
            for q in range(l):
                kz = k1z[q]
                u0 = state[0, i, j, q] * scale
                u1 = state[1, i, j, q] * scale
                u2 = state[2, i, j, q] * scale
                b0 = state[3, i, j, q] * scale
                b1 = state[4, i, j, q] * scale
                b2 = state[5, i, j, q] * scale
                out[0, i, j, q] = u0
                out[1, i, j, q] = u1
                out[2, i, j, q] = u2
                out[3, i, j, q] = b0
                out[4, i, j, q] = b1
                out[5, i, j, q] = b2
                out[6, i, j, q] = 1j * (ky * u2 - kz * u1)
                out[7, i, j, q] = 1j * (kz * u0 - kx * u2)
                out[8, i, j, q] = 1j * (kx * u1 - ky * u0)
                out[9, i, j, q] = 1j * (ky * b2 - kz * b1)
                out[10, i, j, q] = 1j * (kz * b0 - kx * b2)
                out[11, i, j, q] = 1j * (kx * b1 - ky * b0)


@njit(parallel=True, cache=True)
def cross_terms(phys, hall, out):
    """Physical-space nonlinearities from (u, b, w=curl u, j=curl b).

    out[0:3] = j x b - w x u          (projected later: velocity tendency)
    out[3:6] = (u - hall*j) x b       (curled later: induction tendency)
    """
    n, m, l = phys.shape[1], phys.shape[2], phys.shape[3]
    for i in prange(n):
        for j_ in range(m):
            for q in range(l):
                u0 = phys[0, i, j_, q]
                u1 = phys[1, i, j_, q]
                u2 = phys[2, i, j_, q]
                b0 = phys[3, i, j_, q]
                b1 = phys[4, i, j_, q]
                b2 = phys[5, i, j_, q]
                w0 = phys[6, i, j_, q]
                w1 = phys[7, i, j_, q]
                w2 = phys[8, i, j_, q]
                j0 = phys[9, i, j_, q]
                j1 = phys[10, i, j_, q]
                j2 = phys[11, i, j_, q]
                out[0, i, j_, q] = (j1 * b2 - j2 * b1) - (w1 * u2 - w2 * u1)
                out[1, i, j_, q] = (j2 * b0 - j0 * b2) - (w2 * u0 - w0 * u2)
                out[2, i, j_, q] = (j0 * b1 - j1 * b0) - (w0 * u1 - w1 * u0)
                a0 = u0 - hall * j0
                a1 = u1 - hall * j1
                a2 = u2 - hall * j2
                out[3, i, j_, q] = a1 * b2 - a2 * b1
                out[4, i, j_, q] = a2 * b0 - a0 * b2
                out[5, i, j_, q] = a0 * b1 - a1 * b0


@njit(parallel=True, cache=True)
def project_and_curl(spec, k1, k1z, cutoff, scale, out):
    """Dealias, Leray-project the velocity block, curl the induction block.

    ``spec`` holds the transformed products (momentum block 0:3, induction
    cross product 3:6); ``cutoff`` is the largest retained |k_j| component.
    """
    n, m, l = spec.shape[1], spec.shape[2], spec.shape[3]
    for i in prange(n):
        kx = k1[i]
        for j in range(m):
            ky = k1[j]
            for q in range(l):
                kz = k1z[q]
                if abs(kx) > cutoff or abs(ky) > cutoff or abs(kz) > cutoff:
                    for c in range(6):
                        out[c, i, j, q] = 0.0
                    continue
                d0 = spec[0, i, j, q] * scale
                d1 = spec[1, i, j, q] * scale
                d2 = spec[2, i, j, q] * scale
                g0 = spec[3, i, j, q] * scale
                g1 = spec[4, i, j, q] * scale
                g2 = spec[5, i, j, q] * scale
                k2 = kx * kx + ky * ky + kz * kz
                if k2 > 0.0:
                    dot = (kx * d0 + ky * d1 + kz * d2) / k2
                    out[0, i, j, q] = d0 - kx * dot
                    out[1, i, j, q] = d1 - ky * dot
                    out[2, i, j, q] = d2 - kz * dot
                else:
                    out[0, i, j, q] = d0
                    out[1, i, j, q] = d1
                    out[2, i, j, q] = d2
                out[3, i, j, q] = 1j * (ky * g2 - kz * g1)
                out[4, i, j, q] = 1j * (kz * g0 - kx * g2)
                out[5, i, j, q] = 1j * (kx * g1 - ky * g0)


@njit(parallel=True, cache=True)
def stage_inside(state, k, e_half, a, out):
    """out = E (state + a k), the integrating-factor form of stages 2."""
    n, m, l = state.shape[1], state.shape[2], state.shape[3]
    for i in prange(n):
        for j in range(m):
            for q in range(l):
                e = e_half[i, j, q]
                for c in range(6):
                    out[c, i, j, q] = e * (state[c, i, j, q] + a * k[c, i, j, q])


@njit(parallel=True, cache=True)
def stage_outside(state, k, e_half, a, out):
    """out = E state + a k (stage 3: the tendency is already at mid-step)."""
    n, m, l = state.shape[1], state.shape[2], state.shape[3]
    for i in prange(n):
        for j in range(m):
            for q in range(l):
                e = e_half[i, j, q]
                for c in range(6):
                    out[c, i, j, q] = e * state[c, i, j, q] + a * k[c, i, j, q]


@njit(parallel=True, cache=True)
def stage_final_arg(state, k, e_half, a, out):
    """out = E^2 state + a E k (argument of the fourth tendency evaluation)."""
    n, m, l = state.shape[1], state.shape[2], state.shape[3]
    for i in prange(n):
        for j in range(m):
            for q in range(l):
                e = e_half[i, j, q]
                for c in range(6):
                    out[c, i, j, q] = e * e * state[c, i, j, q] + a * e * k[c, i, j, q]


@njit(parallel=True, cache=True)
def rk4_combine(state, k1_, k2_, k3_, k4_, e_half, dt, out):
    """Integrating-factor RK4 update:

    out = E^2 state + dt/6 (E^2 k1 + 2 E (k2 + k3) + k4).
    """
    n, m, l = state.shape[1], state.shape[2], state.shape[3]
    sixth = dt / 6.0
    for i in prange(n):
        for j in range(m):
            for q in range(l):
                e = e_half[i, j, q]
                ef = e * e
                for c in range(6):
                    out[c, i, j, q] = ef * state[c, i, j, q] + sixth * (
                        ef * k1_[c, i, j, q]
                        + 2.0 * e * (k2_[c, i, j, q] + k3_[c, i, j, q])
                        + k4_[c, i, j, q]
                    )


@njit(parallel=True, cache=True)
def energy_dissipation(state, k1, k1z, weight_z, volume):
    """(||u||_L2^2, ||b||_L2^2, ||grad u||_L2^2 + ||grad b||_L2^2).

    ``weight_z`` is the Hermitian pairing weight along the stored half axis.
    Static prange scheduling keeps the reduction order reproducible.
    """
    n, m, l = state.shape[1], state.shape[2], state.shape[3]
    eu = 0.0
    eb = 0.0
    diss = 0.0
    for i in prange(n):
        kx = k1[i]
        s_eu = 0.0
        s_eb = 0.0
        s_d = 0.0
        for j in range(m):
            ky = k1[j]
            for q in range(l):
                kz = k1z[q]
                k2 = kx * kx + ky * ky + kz * kz
                w = weight_z[q]
                mu = 0.0
                mb = 0.0
                for c in range(3):
                    zu = state[c, i, j, q]
                    zb = state[c + 3, i, j, q]
                    mu += zu.real * zu.real + zu.imag * zu.imag
                    mb += zb.real * zb.real + zb.imag * zb.imag
                s_eu += w * mu
                s_eb += w * mb
                s_d += w * k2 * (mu + mb)
        eu += s_eu
        eb += s_eb
        diss += s_d
    return eu * volume, eb * volume, diss * volume
