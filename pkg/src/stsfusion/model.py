"""Domain types, dispersion matrices and the vectorized linear model.

Conventions used throughout the package:

* ``vec()`` stacks columns (Fortran order), so ``vec(G @ S) = kron(I_T, G) @ vec(S)``.
* The active dispersion matrix enters every fusion rule through the
  ``MT x M`` effective map ``A_hat_q`` with ``A_hat_q @ x = vec(S)``, which is
  the selection of the q-th block of ``kron(I_M, A)`` applied to the sparse
  indicator vector.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ValidationError, ZeroMatrix

POWER_TOL = 1e-12


@dataclass(frozen=True)
class SystemConfig:
    """The ``(M, N, T, Q)`` system plus reporting energy and noise levels."""

    M: int
    N: int
    T: int
    Q: int
    L_f: int = 1
    rho: float = 1.0
    sigma_w2: float = 1.0
    sigma_e2: float = 0.0
    sts_enabled: bool = True

    def __post_init__(self):
        for key in ("M", "N", "T", "Q", "L_f"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValidationError(key, f"must be a positive integer, got {value!r}")
        if not self.rho > 0:
            raise ValidationError("rho", f"must be > 0, got {self.rho!r}")
        if not self.sigma_w2 > 0:
            raise ValidationError("sigma_w2", f"must be > 0, got {self.sigma_w2!r}")
        if not self.sigma_e2 >= 0:
            raise ValidationError("sigma_e2", f"must be >= 0, got {self.sigma_e2!r}")

    @property
    def snr_db(self) -> float:
        return float(10 * np.log10(self.rho / self.sigma_w2))

    @property
    def block_length(self) -> int:
        """Symbols per reporting block actually transmitted (1 without spreading)."""
        return self.T if self.sts_enabled else 1


@dataclass(frozen=True)
class DispersionSet:
    """``Q`` complex ``M x T`` dispersion matrices, each with ``tr(A^H A) = T``."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.asarray(a, dtype=complex) for a in self.matrices)
        if not mats:
            raise DimensionMismatch("a dispersion set needs at least one matrix")
        shape = mats[0].shape
        if len(shape) != 2:
            raise DimensionMismatch(f"dispersion matrices must be 2-D, got shape {shape}")
        for a in mats:
            if a.shape != shape:
                raise DimensionMismatch(f"mixed shapes in dispersion set: {shape} vs {a.shape}")
            power = np.vdot(a, a).real
            if abs(power - shape[1]) > POWER_TOL * max(1, shape[1]):
                raise ValueError(f"power constraint violated: tr(A^H A) = {power!r}, T = {shape[1]}")
            a.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def M(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def T(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def Q(self) -> int:
        return len(self.matrices)

    def __getitem__(self, q):
        return self.matrices[q]

    def __len__(self):
        return len(self.matrices)

    def stacked(self) -> np.ndarray:
        """All matrices as a ``(Q, M, T)`` array."""
        return np.stack(self.matrices)

    def to_text(self) -> str:
        lines = ["# stsfusion dispersion set", f"M {self.M} T {self.T} Q {self.Q}"]
        for q, a in enumerate(self.matrices, start=1):
            lines.append(f"matrix {q}")
            for row in a:
                lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DispersionSet":
        rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        head = rows[0].split()
        if head[0::2] != ["M", "T", "Q"]:
            raise ValueError(f"bad dispersion-set header: {rows[0]!r}")
        M, T, Q = (int(v) for v in head[1::2])
        if len(rows) != 1 + Q * (M + 1):
            raise DimensionMismatch(f"expected {Q} matrices of {M} rows")
        mats = []
        for q in range(Q):
            start = 1 + q * (M + 1)
            if rows[start] != f"matrix {q + 1}":
                raise ValueError(f"expected 'matrix {q + 1}', got {rows[start]!r}")
            block = []
            for line in rows[start + 1:start + 1 + M]:
                pairs = [tok.split(",") for tok in line.split()]
                if len(pairs) != T:
                    raise DimensionMismatch(f"row has {len(pairs)} entries, expected {T}")
                block.append([complex(float(re), float(im)) for re, im in pairs])
            mats.append(np.array(block))
        return cls(tuple(mats))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "DispersionSet":
        return cls.from_text(Path(path).read_text())

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


@dataclass(frozen=True)
class EncodedBlock:
    S: np.ndarray
    q_index: int  # 1-based


@dataclass(frozen=True)
class LinearizedModel:
    G_hat_kron: np.ndarray
    y_vec: np.ndarray
    A_hat_q: np.ndarray | None = None

    @property
    def GA(self) -> np.ndarray:
        """The ``NT x M`` product used by all fusion rules."""
        if self.A_hat_q is None:
            raise ValueError("effective dispersion map not attached")
        return self.G_hat_kron @ self.A_hat_q


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization; leading axes are treated as batch axes."""
    X = np.asarray(X)
    return np.swapaxes(X, -1, -2).reshape(*X.shape[:-2], -1)


def check_decisions(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatch(f"decision vector must be 1-D and nonempty, got shape {x.shape}")
    if not np.all((x == 1) | (x == -1)):
        raise ValueError("decision entries must be exactly +1 or -1")
    return x.astype(float)


def normalize_dispersion(A_raw) -> np.ndarray:
    """Scale ``A_raw`` to satisfy ``tr(A^H A) = T``."""
    A_raw = np.asarray(A_raw, dtype=complex)
    fro = np.linalg.norm(A_raw)
    if fro == 0:
        raise ZeroMatrix("cannot normalize an all-zero dispersion matrix")
    A = A_raw * (np.sqrt(A_raw.shape[1]) / fro)
    # one refinement step pulls the trace to within a couple of ulps of T
    return A * np.sqrt(A.shape[1] / np.vdot(A, A).real)


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, ``E|z|^2 = variance``."""
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_dispersion_set(M: int, T: int, Q: int, rng: np.random.Generator) -> DispersionSet:
    return DispersionSet(tuple(normalize_dispersion(complex_normal(rng, (M, T))) for _ in range(Q)))


def encode_block(x, A_q, q_index: int = 1) -> EncodedBlock:
    x = check_decisions(x)
    A_q = np.asarray(A_q)
    if A_q.ndim != 2 or A_q.shape[0] != x.size:
        raise DimensionMismatch(f"{x.size} decisions for a dispersion matrix of shape {A_q.shape}")
    return EncodedBlock(S=x[:, None] * A_q, q_index=q_index)


def baseline_encode(x) -> EncodedBlock:
    """No spreading: each sensor sends its BPSK symbol in a single slot."""
    x = check_decisions(x)
    return EncodedBlock(S=x[:, None].astype(complex), q_index=1)


def build_effective_map(A_q) -> np.ndarray:
    """``MT x M`` map whose t-th ``M x M`` block is ``diag(A_q[:, t])``.

    Accepts a batch of matrices with shape ``(..., M, T)``.
    """
    A_q = np.asarray(A_q)
    M, T = A_q.shape[-2:]
    eye = np.eye(M)
    # out[..., t*M + m, k] = A[..., m, t] * delta(m, k)
    blocks = np.swapaxes(A_q, -1, -2)[..., :, :, None] * eye
    return blocks.reshape(*A_q.shape[:-2], T * M, M)


def kron_identity(G: np.ndarray, T: int) -> np.ndarray:
    """``kron(I_T, G)`` for a single matrix or a batch ``(..., N, M)``."""
    G = np.asarray(G)
    N, M = G.shape[-2:]
    out = np.zeros((*G.shape[:-2], T * N, T * M), dtype=G.dtype)
    for t in range(T):
        out[..., t * N:(t + 1) * N, t * M:(t + 1) * M] = G
    return out


def linearize_received(Y, G_hat, A_q=None) -> LinearizedModel:
    Y = np.asarray(Y)
    G_hat = np.asarray(G_hat)
    if Y.ndim != 2 or G_hat.ndim != 2 or Y.shape[0] != G_hat.shape[0]:
        raise DimensionMismatch(f"received block {Y.shape} does not match channel {G_hat.shape}")
    T = Y.shape[1]
    A_hat = None
    if A_q is not None:
        A_q = np.asarray(A_q)
        if A_q.shape != (G_hat.shape[1], T):
            raise DimensionMismatch(f"dispersion matrix {A_q.shape} vs M={G_hat.shape[1]}, T={T}")
        A_hat = build_effective_map(A_q)
    return LinearizedModel(G_hat_kron=kron_identity(G_hat, T), y_vec=vec(Y), A_hat_q=A_hat)


def effective_matrix(G_hat, A_q) -> np.ndarray:
    """``kron(I_T, G_hat) @ A_hat_q`` without forming either factor.

    Column m is ``vec(g_m a_m^T) = kron(a_m, g_m)``. Works on batches
    ``G_hat: (..., N, M)`` and ``A_q: (..., M, T)``.
    """
    G_hat = np.asarray(G_hat)
    A_q = np.asarray(A_q)
    N, M = G_hat.shape[-2:]
    T = A_q.shape[-1]
    prod = G_hat[..., None, :, :] * np.swapaxes(A_q, -1, -2)[..., :, None, :]
    return prod.reshape(*prod.shape[:-3], T * N, M)


def format_matrices(named: dict) -> str:
    """Text dump of named complex matrices, same row format as dispersion sets."""
    lines = ["# stsfusion matrices"]
    for name, A in named.items():
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        lines.append(f"matrix {name} {A.shape[0]} {A.shape[1]}")
        for row in A:
            lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrices(text: str) -> dict:
    out, name, rows = {}, None, []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("matrix "):
            if name is not None:
                out[name] = np.array(rows)
            name, rows = line.split()[1], []
        else:
            rows.append([complex(float(re), float(im)) for re, im in (tok.split(",") for tok in line.split())])
    if name is not None:
        out[name] = np.array(rows)
    return out
