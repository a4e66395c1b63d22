"""Unimodular code generation and correlation auditing.

Two PMCW radars share a code family; this module generates the per-radar
sequences, measures their cyclic/linear cross-correlation, and finds the
zero cross-correlation zone (ZCZ) length.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("random-binary", "polyphase", "custom")

UNIMODULAR_TOL = 1e-12


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class Code:
    """Length-N unimodular complex sequence used as PMCW modulation."""

    samples: np.ndarray
    family_id: str = "custom"
    seed: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 2:
            raise CodeError(f"code length must be >= 2, got shape {samples.shape}")
        dev = np.max(np.abs(np.abs(samples) - 1.0))
        if dev > 1e-6:
            raise CodeError(f"code is not unimodular: max |.|-1 deviation {dev:.3e}")

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class CorrelationReport:
    """Correlation magnitudes across lags -(N-1)..(N-1) plus summary metrics."""

    autocorr: np.ndarray        # |R_aa[l]|, length 2N-1
    crosscorr: np.ndarray       # |R_ab[l]|, length 2N-1
    psl_db: float               # peak sidelobe of crosscorr relative to autocorr peak
    zcz_length: int
    lags: np.ndarray = field(default=None)


def generate_code(family: str, n: int, seed: int) -> Code:
    """Deterministically generate a unimodular code of length ``n``.

    random-binary: +-1 chips from a seeded PCG stream (the default family of
    the simulated experiments). polyphase: Zadoff-Chu sequence whose cyclic
    autocorrelation sidelobes are numerically zero; the seed selects the root
    among the residues coprime with n.
    """
    if n < 2:
        raise CodeError(f"code length must be >= 2, got {n}")
    if family == "random-binary":
        rng = np.random.default_rng(seed)
        samples = rng.choice([-1.0, 1.0], size=n).astype(np.complex128)
    elif family == "polyphase":
        roots = [u for u in range(1, n) if np.gcd(u, n) == 1]
        u = roots[seed % len(roots)]
        k = np.arange(n)
        if n % 2 == 0:
            phase = -np.pi * u * k * k / n
        else:
            phase = -np.pi * u * k * (k + 1) / n
        samples = np.exp(1j * phase)
    else:
        raise CodeError(f"unsupported code family: {family!r}")
    return Code(samples=samples, family_id=family, seed=seed)


def ideal_orthogonal_pair(n: int, seed: int = 0) -> tuple[Code, Code]:
    """Synthetic pair with zero cyclic cross-correlation at every lag.

    Single-tone unimodular sequences on two disjoint DFT bins; used as an
    exact-math oracle where perfect code orthogonality is assumed.
    """
    if n < 2:
        raise CodeError(f"code length must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    k1, k2 = rng.choice(n, size=2, replace=False)
    t = np.arange(n)
    a = np.exp(2j * np.pi * k1 * t / n)
    b = np.exp(2j * np.pi * k2 * t / n)
    return (Code(a, family_id="custom", seed=seed),
            Code(b, family_id="custom", seed=seed))


def _cyclic_corr(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """R_xy[l] = sum_n x[n] conj(y[(n - l) mod N]), l = 0..N-1."""
    return np.fft.ifft(np.fft.fft(x) * np.conj(np.fft.fft(y)))


def correlation_values(a: Code, b: Code, mode: str = "cyclic") -> np.ndarray:
    """Complex R_ab over lags -(N-1)..(N-1) (length 2N-1)."""
    xa, xb = a.samples, b.samples
    n = xa.size
    if xb.size != n:
        raise CodeError(f"length mismatch: {n} vs {xb.size}")
    if mode == "cyclic":
        r = _cyclic_corr(xa, xb)           # lags 0..N-1
        return np.concatenate([r[1:], r])  # lag -l equals lag N-l (periodic)
    if mode == "linear":
        # np.correlate(a, conj(b), 'full') gives sum a[n] conj(b[n-l])
        return np.correlate(xa, xb, mode="full")
    raise CodeError(f"unknown correlation mode: {mode!r}")


def cross_correlate(a: Code, b: Code, mode: str = "cyclic") -> CorrelationReport:
    """Correlation audit of a pair: magnitudes per lag, PSL, ZCZ length."""
    r_ab = np.abs(correlation_values(a, b, mode))
    r_aa = np.abs(correlation_values(a, a, mode))
    n = len(a)
    lags = np.arange(-(n - 1), n)
    peak = r_aa[n - 1]                     # zero-lag autocorrelation = N
    off_peak = r_ab.copy()
    if a is b or np.array_equal(a.samples, b.samples):
        off_peak[n - 1] = 0.0
    side = np.max(off_peak)
    psl_db = 20.0 * np.log10(max(side, 1e-300) / peak)
    return CorrelationReport(
        autocorr=r_aa,
        crosscorr=r_ab,
        psl_db=float(min(psl_db, 0.0)),
        zcz_length=zcz_length(a, b, 1e-9 * n),
        lags=lags,
    )


def zcz_length(a: Code, b: Code, threshold: float) -> int:
    """Largest L with |R_ab[l]| <= threshold for all cyclic lags 1..L."""
    if threshold < 0:
        raise CodeError("threshold must be >= 0")
    r = np.abs(_cyclic_corr(a.samples, b.samples))
    for lag in range(1, len(a)):
        if r[lag] > threshold:
            return lag - 1
    return len(a) - 1


def save_code_csv(code: Code, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# family={code.family_id} n={len(code)} seed={code.seed}\n")
        w = csv.writer(f)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(code.samples):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_code_csv(path) -> Code:
    family, seed = "custom", 0
    values = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, _, v = tok.partition("=")
                    if k == "family":
                        family = v
                    elif k == "seed":
                        seed = int(v)
                continue
            if line.startswith("index"):
                continue
            idx, re, im = line.split(",")
            values.append(complex(float(re), float(im)))
    return Code(np.array(values, dtype=np.complex128), family_id=family, seed=seed)
