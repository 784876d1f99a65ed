"""
Dense linear algebra and open-system primitives for 1-3 qubit systems.

Matrices are plain ``numpy.ndarray`` objects with ``complex128`` dtype.
A Kraus set is any sequence of equally shaped square matrices.

Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
computational basis index: ``|q0 q1 q2>``.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

KrausSet = Sequence[np.ndarray]


class DimensionError(ValueError):
    """Raised when operand shapes or qubit indices do not line up."""


def tensor_product(a: np.ndarray, b: np.ndarray, *more: np.ndarray) -> np.ndarray:
    """Kronecker product of two or more matrices (or vectors)."""
    return reduce(np.kron, (a, b) + more)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a state vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, qubit_count: int, keep: Iterable[int]) -> np.ndarray:
    """
    Reduced density matrix over the qubits in ``keep``.

    Kept qubits appear in their original relative order.

    Parameters
    ----------
    rho : np.ndarray
        Square matrix of dimension ``2**qubit_count``.
    qubit_count : int
        Number of qubits in ``rho``.
    keep : iterable of int
        Indices of the qubits to retain. Must be non-empty and valid.
    """
    keep = sorted(set(int(q) for q in keep))
    dim = 2**qubit_count
    if rho.shape != (dim, dim):
        raise DimensionError(f"rho has shape {rho.shape}, expected {(dim, dim)}")
    if not keep or keep[0] < 0 or keep[-1] >= qubit_count:
        raise DimensionError(f"invalid keep set {keep} for {qubit_count} qubits")

    n = qubit_count
    tensor = rho.reshape((2,) * (2 * n))
    # einsum labels: row index of qubit q -> letter q, column index -> letter n + q;
    # traced qubits share their row letter between row and column slots.
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[q] for q in range(n)]
    col = [letters[q] if q not in keep else letters[n + q] for q in range(n)]
    out = [letters[q] for q in keep] + [letters[n + q] for q in keep]
    spec = "".join(row + col) + "->" + "".join(out)
    kdim = 2 ** len(keep)
    return np.einsum(spec, tensor).reshape(kdim, kdim)


def apply_channel(rho: np.ndarray, kraus: KrausSet) -> np.ndarray:
    """Operator-sum evolution ``sum_k E_k rho E_k^dagger``."""
    ops = np.asarray(kraus, dtype=complex)
    if ops.ndim != 3 or ops.shape[1:] != rho.shape:
        raise DimensionError(
            f"Kraus operators of shape {ops.shape[1:]} cannot act on rho of shape {rho.shape}"
        )
    return np.einsum("kij,jl,kml->im", ops, rho, ops.conj())


def completeness_defect(kraus: KrausSet) -> float:
    """Max-entry norm of ``sum_k E_k^dagger E_k - I``."""
    ops = np.asarray(kraus, dtype=complex)
    s = np.einsum("kji,kjl->il", ops.conj(), ops)
    return float(np.max(np.abs(s - np.eye(s.shape[0]))))


def pure_fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """
    Fidelity ``<psi|rho|psi>`` against a pure target.

    Round-off excursions up to 1e-9 outside [0, 1] are clamped; anything
    larger is returned as-is so that a broken state is not hidden.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if rho.shape != (psi.size, psi.size):
        raise DimensionError(f"rho {rho.shape} does not match state of size {psi.size}")
    f = float(np.real(psi.conj() @ rho @ psi))
    if -1e-9 <= f < 0.0:
        return 0.0
    if 1.0 < f <= 1.0 + 1e-9:
        return 1.0
    return f


def density_matrix_violations(rho: np.ndarray, atol: float = 1e-10) -> list[str]:
    """
    List the density-matrix invariants ``rho`` breaks (empty when valid).

    Intended for tests and self-checks, not hot loops.
    """
    problems = []
    if not np.all(np.isfinite(rho)):
        problems.append("non-finite entries")
        return problems
    herm = np.max(np.abs(rho - dagger(rho)))
    if herm > atol:
        problems.append(f"not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        problems.append(f"trace {tr.real:.12f}{tr.imag:+.2e}j != 1")
    lam = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    if lam[0] < -1e-8:
        problems.append(f"negative eigenvalue {lam[0]:.3e}")
    return problems


def is_unitary(u: np.ndarray, atol: float = 1e-9) -> bool:
    return bool(np.allclose(dagger(u) @ u, np.eye(u.shape[0]), atol=atol))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
