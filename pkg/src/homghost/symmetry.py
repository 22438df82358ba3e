"""Exchange symmetry of two-particle states and its basis independence.

A joint state of two n-level particles is held as an n x n complex array
``v[i, j]``, the amplitude of |i>_A |j>_B. In that form the exchange operator
is a transpose and a local basis change U (x) V acts as ``U @ v @ V.T``.
"""
from __future__ import annotations

import numpy as np

from . import rng

EIGEN_TOL = 1e-9
UNITARY_TOL = 1e-10


def _square(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"joint vector must be n x n, got shape {v.shape}")
    return v


def exchange_apply(v) -> np.ndarray:
    """P|i, j> = |j, i>."""
    return _square(v).T.copy()


def symmetry_decompose(v) -> tuple[np.ndarray, np.ndarray]:
    v = _square(v)
    pv = v.T
    return (v + pv) / 2.0, (v - pv) / 2.0


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0)


def change_basis(v, u, u2=None) -> np.ndarray:
    """Apply U (x) U, or U (x) U2 when a second matrix is given."""
    v = _square(v)
    u = np.asarray(u, dtype=complex)
    u2 = u if u2 is None else np.asarray(u2, dtype=complex)
    for m in (u, u2):
        if m.shape != v.shape:
            raise ValueError(f"unitary shape {m.shape} does not match state {v.shape}")
        if not is_unitary(m):
            raise ValueError("basis change matrix is not unitary")
    return u @ v @ u2.T


def symmetry_eigenvalue(v, tol: float = EIGEN_TOL) -> int | None:
    """+1 (symmetric), -1 (anti-symmetric) or None for no definite symmetry."""
    v = _square(v)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("zero vector has no exchange eigenvalue")
    v = v / norm
    pv = v.T
    if np.linalg.norm(pv - v) < tol:
        return 1
    if np.linalg.norm(pv + v) < tol:
        return -1
    return None


def random_unitary(n: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_joint_vector(n: int, gen: np.random.Generator, parity: int | None = None) -> np.ndarray:
    """Normalised random state; ``parity`` +1/-1 projects onto that symmetry."""
    v = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    if parity == 1:
        v = (v + v.T) / 2.0
    elif parity == -1:
        v = (v - v.T) / 2.0
    return v / np.linalg.norm(v)


def invariance_trials(trials: int = 1000, dims=(2, 3, 4, 8), seed: int = 0) -> dict:
    """Check that U (x) U preserves the exchange eigenvalue over seeded trials.

    Trial k uses n = dims[k % len(dims)], parity alternating +1/-1, with its
    own random stream. Returns counts plus the involution check P^2 = 1.
    """
    preserved = 0
    involution = True
    failures = []
    for k in range(trials):
        gen = rng.stream(seed, k, rng.TRIALS)
        n = dims[k % len(dims)]
        parity = 1 if (k // len(dims)) % 2 == 0 else -1
        v = random_joint_vector(n, gen, parity)
        u = random_unitary(n, gen)
        before = symmetry_eigenvalue(v)
        after = symmetry_eigenvalue(change_basis(v, u))
        if before == after == parity:
            preserved += 1
        else:
            failures.append(k)
        if not np.array_equal(exchange_apply(exchange_apply(v)), v):
            involution = False
    return {"trials": trials, "preserved": preserved, "failures": failures, "involution_exact": involution}
