"""Coded diffraction patterns: masks, measurements, and the lifted linear maps.

The measurement model: a signal ``x`` in C^d is modulated entrywise by a
random diagonal mask ``D_l = diag(eps_{l, .})`` and the squared magnitudes of
its (unnormalized) DFT are recorded,

    y_{k, l} = |<f_k, D_l x>|^2,     k = 1..d,  l = 1..L,

where ``f_k`` has entries ``omega^{jk}`` (``omega = exp(2 pi i / d)``,
``j = 1..d``) so that ``f_d`` is the all-ones vector and ``||f_k||^2 = d``.
The inner product is conjugate-linear in the first argument, which makes
``<f_k, z>`` a plain forward DFT bin of ``z``.

On the lifted (matrix) side the same data is ``tr(F_{k,l} X)`` for
``X = x x*`` with rank-1 frame elements ``F_{k,l} = D_l f_k f_k* D_l``.  This
module exposes the forward map ``A``, its adjoint ``A*``, the normalized Gram
operator ``R = A* A / (nu^2 d L)`` and its truncated variant, all applied via
length-d FFTs (O(L d^2 log d) per matrix argument); a dense O(L d^3) reference
path is retained for oracle testing.

Mask entries are drawn i.i.d. from a finite distribution with the moment
profile E[eps] = E[eps^3] = 0, E[eps^4] = 2 E[eps^2]^2, |eps| <= b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .hermitian import as_hermitian, as_signal, hermitize
from .policy import POLICY

__all__ = [
    "MaskDistribution",
    "MaskSet",
    "MeasurementFrame",
    "MeasurementVector",
    "ternary_mask_distribution",
    "truncation_rate",
    "dft_vector",
    "dft2_vector",
    "sample_masks",
    "measure",
    "frame_matrix",
    "apply_A",
    "apply_A_dense",
    "apply_A_adjoint",
    "apply_R",
    "apply_R_truncated",
    "crt_relabeling",
    "crt_frequency",
]


@dataclass(frozen=True)
class MaskDistribution:
    """Finite real distribution for mask entries, moment-validated.

    The constructor verifies (in exact rational arithmetic over the binary
    float values) that E[eps] = E[eps^3] = 0 and E[eps^4] = 2 E[eps^2]^2 within
    1e-12, that all support values are bounded by ``b``, and that the declared
    variance ``nu`` matches E[eps^2] > 0.
    """

    support: tuple[float, ...]
    probabilities: tuple[float, ...]
    b: float
    nu: float
    name: str = "custom"

    def __post_init__(self):
        if len(self.support) == 0 or len(self.support) != len(self.probabilities):
            raise ValueError("support and probabilities must be nonempty and equal-length")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("probabilities must be nonnegative")
        tol = POLICY.moment_tol
        if abs(math.fsum(self.probabilities) - 1.0) > tol:
            raise ValueError("probabilities must sum to 1")
        if any(abs(s) > self.b + tol for s in self.support):
            raise ValueError(f"support value exceeds bound b = {self.b}")
        m = [self.moment(p) for p in range(1, 5)]
        if abs(m[0]) > tol or abs(m[2]) > tol:
            raise ValueError("odd moments E[eps], E[eps^3] must vanish")
        if m[1] <= tol:
            raise ValueError("variance E[eps^2] must be positive")
        if abs(m[3] - 2.0 * m[1] ** 2) > tol:
            raise ValueError("fourth-moment condition E[eps^4] = 2 E[eps^2]^2 violated")
        if abs(self.nu - m[1]) > tol:
            raise ValueError(f"declared nu = {self.nu} does not match E[eps^2] = {m[1]}")
        if self.nu > self.b**2 + tol:
            raise ValueError("nu must not exceed b^2")

    def moment(self, p: int) -> float:
        """E[eps^p], evaluated exactly over the float representations."""
        acc = Fraction(0)
        for s, w in zip(self.support, self.probabilities):
            acc += Fraction(w) * Fraction(s) ** p
        return float(acc)


def ternary_mask_distribution() -> MaskDistribution:
    """The {+sqrt(2), 0, -sqrt(2)} mask with probabilities {1/4, 1/2, 1/4}.

    A Rademacher vector with random erasures, scaled so nu = E[eps^2] = 1;
    b = sqrt(2) and the truncation rate works out to 9.
    """
    s = math.sqrt(2.0)
    return MaskDistribution(
        support=(s, 0.0, -s),
        probabilities=(0.25, 0.5, 0.25),
        b=s,
        nu=1.0,
        name="ternary",
    )


def truncation_rate(dist: MaskDistribution) -> float:
    """Default truncation rate gamma = 8 + log2(b^2 / nu).

    Rounded at the 12th decimal so that analytically integer rates (e.g. the
    ternary distribution's 9) come out exact despite b being stored as a
    float square root.
    """
    return round(8.0 + math.log2(dist.b**2 / dist.nu), 12)


@dataclass(frozen=True, eq=False)
class MaskSet:
    """L sampled diagonal masks, stored as an (L, d) array of raw entries."""

    epsilon: np.ndarray
    distribution: MaskDistribution
    seed: int | None = None

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float)
        if eps.ndim != 2 or eps.shape[1] < 1:
            raise ValueError(f"epsilon must be (L, d) with d >= 1, got {eps.shape}")
        if eps.size:
            gaps = np.min(
                np.abs(eps[:, :, None] - np.asarray(self.distribution.support)), axis=2
            )
            if float(gaps.max()) > POLICY.moment_tol:
                raise ValueError("mask entries must lie in the distribution's support")
        eps.setflags(write=False)
        object.__setattr__(self, "epsilon", eps)

    @property
    def L(self) -> int:
        return self.epsilon.shape[0]

    @property
    def d(self) -> int:
        return self.epsilon.shape[1]

    def save(self, path) -> None:
        """Write a text serialization; floats via repr so round-trips are exact."""
        dist = self.distribution
        lines = [
            "# cdplift maskset v1",
            f"d={self.d}",
            f"L={self.L}",
            f"seed={self.seed if self.seed is not None else 'none'}",
            f"name={dist.name}",
            "support=" + ",".join(repr(float(v)) for v in dist.support),
            "probabilities=" + ",".join(repr(float(v)) for v in dist.probabilities),
            f"b={float(dist.b)!r}",
            f"nu={float(dist.nu)!r}",
        ]
        for row in self.epsilon:
            lines.append(" ".join(repr(float(v)) for v in row))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "MaskSet":
        text = Path(path).read_text().splitlines()
        if not text or text[0].strip() != "# cdplift maskset v1":
            raise ValueError("not a cdplift maskset file")
        header: dict[str, str] = {}
        for line in text[1:]:
            if "=" in line:
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
        required = {"d", "L", "seed", "name", "support", "probabilities", "b", "nu"}
        missing = required - header.keys()
        if missing:
            raise ValueError(f"maskset header missing keys: {sorted(missing)}")
        d, L = int(header["d"]), int(header["L"])
        dist = MaskDistribution(
            support=tuple(float(v) for v in header["support"].split(",")),
            probabilities=tuple(float(v) for v in header["probabilities"].split(",")),
            b=float(header["b"]),
            nu=float(header["nu"]),
            name=header["name"],
        )
        seed = None if header["seed"] == "none" else int(header["seed"])
        rows = [line for line in text[1:] if "=" not in line and line.strip()]
        if len(rows) != L:
            raise ValueError(f"expected {L} mask rows, found {len(rows)}")
        eps = (
            np.array([[float(v) for v in row.split()] for row in rows], dtype=float)
            if L
            else np.zeros((0, d))
        )
        if eps.size and eps.shape != (L, d):
            raise ValueError("mask row length inconsistent with header")
        return cls(epsilon=eps, distribution=dist, seed=seed)


def sample_masks(dist: MaskDistribution, d: int, L: int, seed: int) -> MaskSet:
    """Draw an (L, d) i.i.d. mask set; deterministic for a given seed."""
    if d < 1 or L < 1:
        raise ValueError("d and L must be >= 1")
    rng = np.random.default_rng(seed)
    eps = rng.choice(np.asarray(dist.support), size=(L, d), p=np.asarray(dist.probabilities))
    return MaskSet(epsilon=eps, distribution=dist, seed=seed)


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """The lifted measurement maps attached to one sampled mask set."""

    masks: MaskSet

    @property
    def distribution(self) -> MaskDistribution:
        return self.masks.distribution

    @property
    def d(self) -> int:
        return self.masks.d

    @property
    def L(self) -> int:
        return self.masks.L

    @classmethod
    def sample(cls, dist: MaskDistribution, d: int, L: int, seed: int) -> "MeasurementFrame":
        return cls(masks=sample_masks(dist, d, L, seed))


@dataclass(frozen=True, eq=False)
class MeasurementVector:
    """Observed intensities y_{k,l}, stored as y[l, k-1]; optionally ||x||^2."""

    y: np.ndarray
    y0: float | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 2:
            raise ValueError(f"y must be (L, d), got shape {y.shape}")
        if y.size and float(y.min()) < -POLICY.hermitian_tol:
            raise ValueError("intensities must be nonnegative up to roundoff")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def L(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.y.shape[1]

    def ravel(self) -> np.ndarray:
        """Flat copy in row-major (l, k) order, matching apply_A."""
        return self.y.reshape(-1).copy()

    def to_csv(self, path) -> None:
        lines = []
        if self.y0 is not None:
            lines.append(f"# y0={float(self.y0)!r}")
        lines.append("l,k,y")
        for l in range(self.L):
            for k in range(self.d):
                lines.append(f"{l + 1},{k + 1},{float(self.y[l, k])!r}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "MeasurementVector":
        lines = Path(path).read_text().splitlines()
        y0 = None
        rows = []
        for line in lines:
            if line.startswith("# y0="):
                y0 = float(line[len("# y0=") :])
            elif line and not line.startswith("#") and line != "l,k,y":
                l, k, v = line.split(",")
                rows.append((int(l), int(k), float(v)))
        if not rows:
            raise ValueError("empty measurement CSV")
        L = max(r[0] for r in rows)
        d = max(r[1] for r in rows)
        y = np.zeros((L, d))
        for l, k, v in rows:
            y[l - 1, k - 1] = v
        return cls(y=y, y0=y0)


def dft_vector(d: int, k: int) -> np.ndarray:
    """The k-th (unnormalized) DFT vector, entries omega^{jk} for j = 1..d.

    Every entry has unit modulus and ||f_k||^2 = d; k = d gives the all-ones
    vector.  Exponents are reduced mod d before exponentiation so entries are
    accurate to a few ulp even for large k*d.
    """
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}, got {k}")
    exponents = (k * np.arange(1, d + 1)) % d
    return np.exp(2j * np.pi * exponents / d)


def dft2_vector(d1: int, d2: int, k: int, l: int) -> np.ndarray:
    """2-D DFT basis vector f_{k,l}, flattened row-major over positions (i, j)."""
    return np.kron(dft_vector(d1, k), dft_vector(d2, l))


def measure(x, masks: MaskSet) -> MeasurementVector:
    """Diffraction intensities |<f_k, D_l x>|^2 via one FFT per mask.

    Raises if the per-mask Parseval identity sum_k y_{k,l} = d ||D_l x||^2
    fails beyond roundoff — that would indicate a broken FFT convention, not
    bad data.
    """
    x = as_signal(x)
    if x.size != masks.d:
        raise ValueError(f"signal dimension {x.size} != mask dimension {masks.d}")
    modulated = masks.epsilon * x[None, :]
    spectra = np.fft.fft(modulated, axis=1)
    y = np.roll(np.abs(spectra) ** 2, -1, axis=1)
    sums = y.sum(axis=1)
    targets = masks.d * np.sum(np.abs(modulated) ** 2, axis=1)
    scale = max(float(targets.max(initial=0.0)), 1.0)
    if y.size and float(np.max(np.abs(sums - targets))) > POLICY.adjoint_rel_tol * scale:
        raise RuntimeError("per-mask Parseval identity violated beyond tolerance")
    return MeasurementVector(y=y, y0=float(np.linalg.norm(x)) ** 2)


def frame_matrix(masks: MaskSet, l: int, k: int) -> np.ndarray:
    """Dense lifted frame element F_{k,l} = D_l f_k f_k* D_l (rank 1)."""
    u = masks.epsilon[l] * dft_vector(masks.d, k)
    return np.outer(u, u.conj())


def _apply_A_any(epsilon: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """tr(F_{k,l} Z) for arbitrary complex Z, returned as an (L, d) array.

    Per mask: with W = (eps eps^T) .* Z = D Z D,
    tr(F_k W') = sum_{a,b} W[a,b] omega^{(b-a)k}, which is one inverse FFT
    along rows followed by a forward FFT along columns, diagonal-sampled.
    """
    W = epsilon[:, :, None] * epsilon[:, None, :] * Z[None, :, :]
    d = Z.shape[0]
    H = d * np.fft.ifft(W, axis=2)
    G = np.fft.fft(H, axis=1)
    diag = np.einsum("lkk->lk", G)
    return np.roll(diag, -1, axis=1)


def _apply_A_adjoint_any(epsilon: np.ndarray, C: np.ndarray) -> np.ndarray:
    """sum_{k,l} C[l,k] F_{k,l} for complex coefficients C of shape (L, d).

    The k-sum against omega^{(a-b)k} is a circulant profile obtained from one
    inverse FFT per mask; the masks enter as an entrywise outer-product factor.
    """
    d = epsilon.shape[1]
    t = d * np.fft.ifft(np.roll(C, 1, axis=1), axis=1)
    idx = (np.arange(d)[:, None] - np.arange(d)[None, :]) % d
    profiles = t[:, idx]
    return np.einsum("la,lb,lab->ab", epsilon, epsilon, profiles)


def apply_A(frame: MeasurementFrame, Z) -> np.ndarray:
    """Forward lifted map: the real vector (tr(F_{k,l} Z))_{k,l}, length dL.

    Flattened row-major over (l, k): entry l*d + (k-1).  For Z = x x* this
    reproduces measure(x, masks) entrywise.
    """
    Z = as_hermitian(Z)
    if Z.shape[0] != frame.d:
        raise ValueError(f"matrix dimension {Z.shape[0]} != frame dimension {frame.d}")
    return _apply_A_any(frame.masks.epsilon, Z).real.reshape(-1)


def apply_A_dense(frame: MeasurementFrame, Z) -> np.ndarray:
    """Reference O(L d^3) forward map via dense frame elements."""
    Z = as_hermitian(Z)
    if Z.shape[0] != frame.d:
        raise ValueError(f"matrix dimension {Z.shape[0]} != frame dimension {frame.d}")
    out = np.empty(frame.L * frame.d)
    for l in range(frame.L):
        for k in range(1, frame.d + 1):
            u = frame.masks.epsilon[l] * dft_vector(frame.d, k)
            out[l * frame.d + (k - 1)] = float(np.real(u.conj() @ Z @ u))
    return out


def apply_A_adjoint(frame: MeasurementFrame, c) -> np.ndarray:
    """Adjoint lifted map: sum_{k,l} c_{k,l} F_{k,l}, a Hermitian matrix."""
    c = np.asarray(c, dtype=float)
    if c.shape != (frame.L * frame.d,):
        raise ValueError(f"coefficient length {c.shape} != ({frame.L * frame.d},)")
    out = _apply_A_adjoint_any(frame.masks.epsilon, c.reshape(frame.L, frame.d))
    return hermitize(out)


def apply_R(frame: MeasurementFrame, Z) -> np.ndarray:
    """Normalized Gram operator R(Z) = A*(A(Z)) / (nu^2 d L).

    An empty frame (L = 0) maps everything to zero by convention.
    """
    Z = as_hermitian(Z)
    if frame.L == 0:
        return np.zeros_like(Z)
    scale = 1.0 / (frame.distribution.nu**2 * frame.d * frame.L)
    return hermitize(apply_A_adjoint(frame, apply_A(frame, Z)) * scale)


def apply_R_truncated(
    frame: MeasurementFrame, Z, anchor_Z, gamma: float
) -> tuple[np.ndarray, int]:
    """Truncated Gram operator R_anchor(Z) and the number of dropped terms.

    Each (k, l) term is kept only on the event
    |tr(F_{k,l} anchor_Z)| <= 2^{3/2} b^2 gamma log(d) ||anchor_Z||_2, with
    the boundary counting as inside (kept).  The anchor must lie in a tangent
    space, i.e. have rank <= 2 up to the policy tolerance.
    """
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    Z = as_hermitian(Z)
    anchor_Z = as_hermitian(anchor_Z)
    if Z.shape[0] != frame.d or anchor_Z.shape[0] != frame.d:
        raise ValueError("dimension mismatch with frame")
    sigma = np.linalg.svd(anchor_Z, compute_uv=False)
    if sigma.size > 2 and sigma[2] > POLICY.rank_rel_tol * max(sigma[0], 1e-300):
        raise ValueError("anchor matrix must have rank <= 2 (lie in a tangent space)")
    if frame.L == 0:
        return np.zeros_like(Z), 0
    dist = frame.distribution
    threshold = (
        2.0**1.5 * dist.b**2 * gamma * math.log(frame.d) * float(np.linalg.norm(anchor_Z))
    )
    anchor_vals = _apply_A_any(frame.masks.epsilon, anchor_Z).real
    keep = np.abs(anchor_vals) <= threshold
    coeffs = _apply_A_any(frame.masks.epsilon, Z).real * keep
    scale = 1.0 / (dist.nu**2 * frame.d * frame.L)
    out = hermitize(_apply_A_adjoint_any(frame.masks.epsilon, coeffs) * scale)
    return out, int(keep.size - keep.sum())


def _crt_combine(r1: int, d1: int, r2: int, d2: int) -> int:
    """The unique n mod d1*d2 with n = r1 (mod d1), n = r2 (mod d2)."""
    inv = pow(d2 % d1, -1, d1) if d1 > 1 else 0
    return (r2 + d2 * ((r1 - r2) * inv % d1)) % (d1 * d2)


def crt_relabeling(d1: int, d2: int) -> np.ndarray:
    """Position permutation aligning the 2-D DFT basis with the 1-D one.

    Returns a 0-based permutation p of length d1*d2 such that for every
    frequency pair (k, l),

        dft2_vector(d1, d2, k, l) == dft_vector(d1*d2, m)[p]

    with m = crt_frequency(d1, d2, k, l).  Entry p[(i-1)*d2 + (j-1)] is n-1
    for the unique n in 1..d1*d2 with n = i (mod d1) and n = j (mod d2).
    Requires gcd(d1, d2) = 1; otherwise no such relabeling exists.
    """
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be positive")
    if math.gcd(d1, d2) != 1:
        raise ValueError(f"dimensions must be coprime, gcd({d1}, {d2}) != 1")
    D = d1 * d2
    p = np.empty(D, dtype=np.int64)
    for i in range(1, d1 + 1):
        for j in range(1, d2 + 1):
            n = _crt_combine(i % d1, d1, j % d2, d2)
            p[(i - 1) * d2 + (j - 1)] = (n - 1) % D
    return p


def crt_frequency(d1: int, d2: int, k: int, l: int) -> int:
    """1-D frequency (in 1..d1*d2) matching the 2-D basis vector f_{k,l}."""
    if math.gcd(d1, d2) != 1:
        raise ValueError(f"dimensions must be coprime, gcd({d1}, {d2}) != 1")
    if not (1 <= k <= d1 and 1 <= l <= d2):
        raise ValueError("frequency indices out of range")
    m = _crt_combine((k * d2) % d1, d1, (l * d1) % d2, d2)
    return m if m != 0 else d1 * d2
