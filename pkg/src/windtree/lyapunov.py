"""Lyapunov exponents of the renormalization cocycle.

Two routes compute the same quantities.  The reference route replays
elementary induction records in pure Python and feeds the resulting
matrices to a QR accumulator; the production route hands the interval
exchange to the compiled induction stream, which advances one column frame
per character and reorthonormalizes on a fixed cadence.  Exponents are
logged stretches divided by the accumulated renormalization time, so the
top exponent of the untwisted cocycle calibrates to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (ConfigError, Degenerate, DomainError, InsufficientData,
                     NonReturning, TieBreak)
from .iet import LabeledIET, first_return_iet, main_transversal, zorich_step
from .surface import CHARACTERS, build_lshape, character_name, character_value
from .tables import TableParams

OVERFLOW = 1e100
DEGEN_TOL = 1e-30


# -- reference route ---------------------------------------------------------


def stream_exponents(stream, d: int, k: int, cadence: int = 10,
                     frame0=None) -> np.ndarray:
    """Top-k exponents from an iterator of (matrix, time) cocycle blocks.

    Maintains a d-by-k column frame, multiplies each block in on the left,
    and reorthonormalizes every `cadence` blocks (sooner on overflow),
    accumulating log diagonal stretches.  Returns logs / total time.

    The default frame is the leading identity columns; pass `frame0` when
    a coordinate direction might sit inside a proper invariant subspace of
    the cocycle, where it would converge to an interior exponent.
    """
    if not (0 < k <= d):
        raise DomainError("need 0 < k <= d")
    frame = np.eye(d)[:, :k] if frame0 is None else np.array(frame0, dtype=float)
    if frame.shape != (d, k):
        raise DomainError("frame0 must be d by k")
    logs = np.zeros(k)
    t = 0.0
    pending = 0
    for m, dt in stream:
        frame = np.asarray(m, dtype=float) @ frame
        t += dt
        pending += 1
        if pending >= cadence or np.max(np.abs(frame)) > OVERFLOW:
            frame, logs = _qr_accumulate(frame, logs)
            pending = 0
    if pending:
        frame, logs = _qr_accumulate(frame, logs)
    if t <= 0.0:
        raise InsufficientData("cocycle stream carried no renormalization time")
    return logs / t


def _qr_accumulate(frame, logs):
    q, r = np.linalg.qr(frame)
    diag = np.abs(np.diag(r))
    if np.any(diag < DEGEN_TOL):
        raise Degenerate("column frame collapsed during QR accumulation")
    return q, logs + np.log(diag)


def zorich_matrix_stream(iet: LabeledIET, char: int = 0, n_accel: int = 1000,
                         max_run: int = 10 ** 5):
    """Yield (cocycle matrix, time) for accelerated induction steps.

    The matrix of one accelerated step is the ordered product of its
    elementary record matrices for the requested character; the time is
    minus the log of the length shrink.  The exchange is renormalized
    between steps so lengths stay order one.
    """
    cur = iet.normalized()
    for _ in range(n_accel):
        cur, zrec = zorich_step(cur, max_run=max_run)
        m = np.eye(cur.d, dtype=np.int64)
        for rec in zrec.records:
            m = rec.matrix(char) @ m
        yield m, zrec.dt
        cur = cur.normalized()


def lyapunov_exponents(iet: LabeledIET, char: int = 0, k: int = 1,
                       n_accel: int = 1000, cadence: int = 10,
                       seed: int | None = None) -> np.ndarray:
    """Reference-route exponents of one character over one exchange."""
    frame0 = None if seed is None else random_frame(iet.d, k, seed)
    return stream_exponents(
        zorich_matrix_stream(iet, char=char, n_accel=n_accel),
        iet.d, k, cadence=cadence, frame0=frame0)


def random_frame(d: int, k: int, seed: int) -> np.ndarray:
    """Deterministic random orthonormal d-by-k frame."""
    rng = np.random.default_rng(seed)
    q, _r = np.linalg.qr(rng.standard_normal((d, k)))
    return q


# -- production route --------------------------------------------------------


@dataclass(frozen=True)
class SpectrumConfig:
    """Controls for the compiled induction stream.

    Frames start from seeded random orthonormal columns: the twisted
    cocycles have invariant integer subspaces that can contain coordinate
    directions, and a column trapped there converges to the wrong exponent.
    """

    n_accel: int = 40000
    cadence: int = 10
    kcols: tuple = (4, 2, 2, 2)
    tie_tol: float = 1e-14
    # single-run cap: run lengths are heavy-tailed, so a cap that is too
    # tight aborts a few percent of perfectly good directions
    max_run: int = 10 ** 7
    seed: int = 7

    def __post_init__(self):
        if self.n_accel < 2 * self.cadence:
            raise ConfigError("n_accel must cover at least two cadences")
        if self.cadence < 1:
            raise ConfigError("cadence must be positive")
        if len(self.kcols) != len(CHARACTERS):
            raise ConfigError("kcols needs one entry per character")
        if any(k < 0 for k in self.kcols) or max(self.kcols) == 0:
            raise ConfigError("kcols entries must be nonnegative, one positive")

    @property
    def kmax(self):
        return max(self.kcols)

    @property
    def halfway(self):
        """Snapshot step: half the run, rounded to a cadence multiple."""
        h = (self.n_accel // 2 // self.cadence) * self.cadence
        return max(h, self.cadence)


@dataclass(frozen=True)
class LyapunovEstimate:
    """One character's exponent estimate from a single induction run.

    `exponents` is sorted descending.  `half_window_delta` is the largest
    gap between the full-run estimate and the second-half-only estimate
    over the tracked columns, a cheap convergence indicator.
    """

    character: str
    exponents: tuple
    step_count: int
    half_window_delta: float
    seed: int

    def __post_init__(self):
        if self.character not in ("++", "+-", "-+", "--"):
            raise DomainError(f"unknown character {self.character!r}")
        if any(x < y - 1e-15 for x, y in zip(self.exponents, self.exponents[1:])):
            raise DomainError("exponents must be sorted descending")


@dataclass(frozen=True)
class SpectrumResult:
    """Per-character exponent estimates for one direction."""

    theta: float
    exponents: dict        # char code -> tuple of exponents
    tail_exponents: dict   # same, estimated on the second half only
    t_total: float
    accel_steps: int
    seed: int = 0

    def top(self, char: int) -> float:
        return self.exponents[char][0]

    def estimate(self, char: int) -> LyapunovEstimate:
        """Package one character's columns as a LyapunovEstimate."""
        full = self.exponents[char]
        delta = max((abs(f - h) for f, h in
                     zip(full, self.tail_exponents[char])), default=0.0)
        return LyapunovEstimate(
            character=character_name(char),
            exponents=tuple(sorted(full, reverse=True)),
            step_count=self.accel_steps,
            half_window_delta=delta,
            seed=self.seed,
        )

    @property
    def estimates(self) -> tuple:
        return tuple(self.estimate(c) for c in sorted(self.exponents))

    @property
    def drift(self) -> float:
        """Largest gap between full-run and tail estimates."""
        worst = 0.0
        for c, full in self.exponents.items():
            for f, h in zip(full, self.tail_exponents[c]):
                worst = max(worst, abs(f - h))
        return worst

    def describe(self) -> str:
        lines = []
        for c in sorted(self.exponents):
            vals = ", ".join(f"{v:+.4f}" for v in self.exponents[c])
            lines.append(f"chi {character_name(c)}: {vals}")
        return "\n".join(lines)


def character_spectrum(table: TableParams, theta: float,
                       config: SpectrumConfig | None = None) -> SpectrumResult:
    """Exponents of all four character cocycles in direction theta.

    Builds the quarter-cell quotient surface, takes the first-return
    exchange on the standard section, and drives the shared induction
    stream.  Raises TieBreak when induction meets equal lengths (the
    direction is then degenerate and should be resampled), Degenerate on
    frame collapse, NonReturning when a single run exceeds the cap.
    """
    cfg = config or SpectrumConfig()
    surface = build_lshape(table)
    section = main_transversal(surface, table)
    iet = first_return_iet(surface, theta, section).iet
    return spectrum_from_iet(iet, theta=theta, config=cfg)


def spectrum_from_iet(iet: LabeledIET, theta: float = math.nan,
                      config: SpectrumConfig | None = None) -> SpectrumResult:
    """Run the compiled induction stream on an explicit exchange."""
    cfg = config or SpectrumConfig()
    d = iet.d
    if any(k > d for k in cfg.kcols):
        raise ConfigError("kcols cannot exceed the number of symbols")
    lam = np.array(iet.lam, dtype=np.float64)
    top = np.array(iet.top, dtype=np.int64)
    bot = np.array(iet.bot, dtype=np.int64)
    lab = np.array(iet.lab, dtype=np.int64)
    chi = np.array([[character_value(c, g) for g in range(4)]
                    for c in CHARACTERS], dtype=np.float64)
    kcols = np.array(cfg.kcols, dtype=np.int64)
    frames = np.zeros((len(CHARACTERS), d, cfg.kmax))
    for c in range(len(CHARACTERS)):
        kc = int(kcols[c])
        if kc:
            frames[c, :, :kc] = random_frame(d, kc, cfg.seed + c)
    logs = np.zeros((len(CHARACTERS), cfg.kmax))
    status, t_total, t_half, accel_done, half_logs = kernels.induction_stream(
        lam, top, bot, lab, chi, frames, kcols, logs,
        cfg.n_accel, cfg.cadence, cfg.tie_tol, cfg.max_run,
        OVERFLOW, DEGEN_TOL, cfg.halfway)
    if status == kernels.STATUS_TIE:
        raise TieBreak(
            f"induction met equal lengths after {accel_done} steps")
    if status == kernels.STATUS_DEGENERATE:
        raise Degenerate("character frame collapsed in the induction stream")
    if status == kernels.STATUS_RUNCAP:
        raise NonReturning(
            f"one induction run exceeded {cfg.max_run} elementary steps")
    if t_total <= t_half or t_half <= 0.0:
        raise InsufficientData("induction stream accumulated no time")
    exponents = {}
    tails = {}
    for idx, c in enumerate(CHARACTERS):
        kc = int(kcols[idx])
        if kc == 0:
            continue
        exponents[c] = tuple(logs[idx, j] / t_total for j in range(kc))
        tails[c] = tuple((logs[idx, j] - half_logs[idx, j])
                         / (t_total - t_half) for j in range(kc))
    return SpectrumResult(theta=theta, exponents=exponents,
                          tail_exponents=tails, t_total=t_total,
                          accel_steps=accel_done, seed=cfg.seed)
