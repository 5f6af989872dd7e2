"""
Wigner d- and D-matrices for integer degree.

Convention (zyz Euler angles, rows/columns indexed m = -l..l ascending)::

    D^l_{mm'}(alpha, beta, gamma) = exp(-i m alpha) d^l_{mm'}(beta) exp(-i m' gamma)

which is the matrix of exp(-i alpha J_z) exp(-i beta J_y) exp(-i gamma J_z)
in the |l m> basis, Condon-Shortley phases.  The small d-matrices are built
degree by degree with the three-term recurrence of Kostelec & Rockmore; the
outer rows and columns (|m| = l or |m'| = l) are seeded in closed form.
"""

import numpy as np
from scipy.special import gammaln


def _edge_row(l, c, s):
    """d^l_{l, m} for m = -l..l, shape (..., 2l+1).

    d^l_{l,m}(beta) = (-1)^(l-m) sqrt(C(2l, l+m)) cos^(l+m)(beta/2) sin^(l-m)(beta/2)
    """
    m = np.arange(-l, l + 1)
    logbinom = 0.5 * (gammaln(2 * l + 1) - gammaln(l + m + 1) - gammaln(l - m + 1))
    sign = np.where((l - m) % 2 == 0, 1.0, -1.0)
    c = c[..., None]
    s = s[..., None]
    return sign * np.exp(logbinom) * c ** (l + m) * s ** (l - m)


def wigner_d_all(lmax, beta):
    """Small Wigner d-matrices d^l(beta) for every l = 0..lmax.

    Parameters
    ----------
    lmax : int
        Largest degree.
    beta : array_like
        Polar Euler angle(s) in [0, pi]; any shape.

    Returns
    -------
    list of ndarray
        Element ``l`` has shape ``beta.shape + (2l+1, 2l+1)``.
    """
    beta = np.asarray(beta, dtype=float)
    cb = np.cos(beta)
    c = np.cos(beta / 2)
    s = np.sin(beta / 2)
    out = [np.ones(beta.shape + (1, 1))]
    for l in range(1, lmax + 1):
        J = l - 1
        d = np.zeros(beta.shape + (2 * l + 1, 2 * l + 1))
        # interior block |m|, |m'| <= J from the recurrence
        m = np.arange(-J, J + 1, dtype=float)
        M, Mp = np.meshgrid(m, m, indexing="ij")
        denom = np.sqrt((l * l - M * M) * (l * l - Mp * Mp))
        a = l * (2 * l - 1) / denom
        if J > 0:
            shift = M * Mp / (J * (J + 1))
            b = l * np.sqrt((J * J - M * M) * (J * J - Mp * Mp)) / (J * denom)
        else:
            shift = np.zeros_like(M)
            b = np.zeros_like(M)
        inner = a * (cb[..., None, None] - shift) * out[J]
        if J > 0:
            prev = np.zeros(beta.shape + (2 * J + 1, 2 * J + 1))
            prev[..., 1:-1, 1:-1] = out[J - 1]
            inner = inner - b * prev
        d[..., 1:-1, 1:-1] = inner

        row = _edge_row(l, c, s)  # d_{l, m}
        idx = np.arange(-l, l + 1)
        alt = np.where((l - idx) % 2 == 0, 1.0, -1.0)
        d[..., -1, :] = row
        d[..., :, -1] = alt * row  # d_{m, l} = (-1)^(l-m) d_{l, m}
        d[..., :, 0] = row[..., ::-1]  # d_{m, -l} = d_{l, -m}
        d[..., 0, :] = np.where((l + idx) % 2 == 0, 1.0, -1.0) * row[..., ::-1]
        out.append(d)
    return out


def wigner_d(l, beta):
    """Small Wigner d-matrix of degree ``l``; shape ``beta.shape + (2l+1, 2l+1)``."""
    return wigner_d_all(l, beta)[l]


def wigner_D(l, alpha, beta, gamma):
    """Full Wigner D-matrix of degree ``l`` at zyz Euler angles (broadcast over inputs)."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, dtype=float),
        np.asarray(beta, dtype=float),
        np.asarray(gamma, dtype=float),
    )
    m = np.arange(-l, l + 1)
    ea = np.exp(-1j * m * alpha[..., None])
    eg = np.exp(-1j * m * gamma[..., None])
    return ea[..., :, None] * wigner_d(l, beta) * eg[..., None, :]


def wigner_D_all(lmax, alpha, beta, gamma):
    """Wigner D-matrices for l = 0..lmax sharing one recurrence pass."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, dtype=float),
        np.asarray(beta, dtype=float),
        np.asarray(gamma, dtype=float),
    )
    ds = wigner_d_all(lmax, beta)
    out = []
    for l, d in enumerate(ds):
        m = np.arange(-l, l + 1)
        ea = np.exp(-1j * m * alpha[..., None])
        eg = np.exp(-1j * m * gamma[..., None])
        out.append(ea[..., :, None] * d * eg[..., None, :])
    return out


def angular_momentum(l):
    """(J_x, J_y, J_z) for degree ``l`` in the |l m> basis, m ascending.

    Used as an independent route to the d-matrices: d^l(beta) = expm(-i beta J_y).
    """
    m = np.arange(-l, l + 1, dtype=float)
    # J+ |l m> = sqrt(l(l+1) - m(m+1)) |l m+1>
    jp = np.diag(np.sqrt(l * (l + 1) - m[:-1] * (m[:-1] + 1)), k=-1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    return jx, jy, jz
