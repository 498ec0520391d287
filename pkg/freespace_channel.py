"""
Free-space Channel - 열 bath 빔스플리터를 통과한 TMSV 자원
손실 블록 (A', B', C'), 국소 스퀴징 + TMST 등가 표현, 유효성 margin,
자유공간 fidelity 와 r 스윕
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from config import Config
from gaussian_core import I2, TeleportError, Z, assemble_blocks
from teleport_protocol import CLASSICAL_FIDELITY, gamma_fidelity_from_blocks, input_covariance

logger = logging.getLogger('teleport.freespace')

# margin 이 이 값 이하이면 등가 표현을 무효로 본다
MARGIN_FLOOR = 1e-12

SWEEP_COLUMNS = ["y", "eta", "N", "r", "margin", "feasible", "fidelity"]


class ConstraintViolation(TeleportError):
    """등가 TMST 제약 위반 - margin 값을 같이 전달"""

    def __init__(self, margin: float, r: float, bath: "BathParams"):
        self.margin = margin
        self.r = r
        self.bath = bath
        super().__init__(
            f"squeezing r={r} violates the equivalence constraint for eta={bath.eta}, N={bath.N} "
            f"(margin={margin:.3e})"
        )


@dataclass(frozen=True)
class BathParams:
    """빔스플리터 반사율 η ∈ (0, 1], bath 열광자 수 N ≥ 0"""
    eta: float
    N: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise TeleportError(f"eta must lie in (0, 1], got {self.eta}")
        if not self.N >= 0:
            raise TeleportError(f"bath photons must be >= 0, got {self.N}")


@dataclass(frozen=True)
class TmstEquivalence:
    """
    손실 자원 = (L₁ ⊕ L₂) TMST(s', n) (L₁ ⊕ L₂)ᵀ

    L₁ = e^{-2x₁}𝕀₂, L₂ = e^{2x₂}𝕀₂
    """
    s_prime: float
    x1: float
    x2: float
    n: float

    @property
    def is_thermal(self) -> bool:
        return self.n >= 0

    def blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A″, B″, C″)"""
        weight = 2 * self.n + 1
        block_a = np.exp(-4 * self.x1) * weight * np.cosh(2 * self.s_prime) * I2
        block_b = np.exp(4 * self.x2) * weight * np.cosh(2 * self.s_prime) * I2
        block_c = np.exp(2 * (self.x2 - self.x1)) * weight * np.sinh(2 * self.s_prime) * Z
        return block_a, block_b, block_c

    def covariance(self) -> np.ndarray:
        return assemble_blocks(*self.blocks())


def _lossy_scalars(r: float, bath: BathParams) -> Tuple[float, float, float]:
    """(a', b, c'): A' = a'𝕀₂, B' = b𝕀₂, C' = c'ℤ"""
    a = (1 - bath.eta) * (2 * bath.N + 1) + bath.eta * np.cosh(2 * r)
    b = np.cosh(2 * r)
    c = np.sqrt(bath.eta) * np.sinh(2 * r)
    return float(a), float(b), float(c)


def lossy_resource_blocks(r: float, bath: BathParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    TMSV(r) 의 모드 1 이 열 bath 와 섞인 뒤의 블록

    A' = [(2N+1)(1−η) + η cosh2r]𝕀₂, B' = cosh2r 𝕀₂, C' = √η sinh2r ℤ
    """
    a, b, c = _lossy_scalars(r, bath)
    return a * I2, b * I2, c * Z


def equivalence_margin(r: float, bath: BathParams) -> float:
    """1 − η sinh²2r / ((η−1)(2N+1) − η cosh2r)²  (양수면 등가 표현 유효)"""
    a, _, c = _lossy_scalars(r, bath)
    return float(1.0 - c ** 2 / a ** 2)


def equivalent_tmst(r: float, bath: BathParams) -> TmstEquivalence:
    """
    손실 자원의 국소 스퀴징 TMST 표현

    k = a'/b 일 때 x₁ = ⅛ ln k, x₂ = −⅜ ln k,
    tanh 2s' = c'/√(a'b), 2n+1 = k√(a'b − c'²)

    Raises:
        ConstraintViolation: margin ≤ 1e-12
    """
    margin = equivalence_margin(r, bath)
    if margin <= MARGIN_FLOOR:
        raise ConstraintViolation(margin, r, bath)
    a, b, c = _lossy_scalars(r, bath)
    k = a / b
    x1 = np.log(k) / 8
    x2 = -3 * np.log(k) / 8
    s_prime = 0.5 * np.arctanh(c / np.sqrt(a * b))
    # a'b − c'² = (1−η)(2N+1)b + η  (cosh² − sinh² 상쇄 없이)
    radicand = (1 - bath.eta) * (2 * bath.N + 1) * b + bath.eta
    n = (k * np.sqrt(radicand) - 1) / 2
    result = TmstEquivalence(s_prime=float(s_prime), x1=float(x1), x2=float(x2), n=float(n))
    if not result.is_thermal:
        logger.debug(f"equivalent TMST has n={n:.4g} < 0 at r={r}, eta={bath.eta}, N={bath.N}")
    return result


def freespace_fidelity(y: float, r: float, bath: BathParams, orientation: str = "standard") -> float:
    """F = 2/√det Γ, Γ = 2V'_in + ℤA″ℤ + B″ − C″ℤ − ℤᵀC″ᵀ"""
    equivalence = equivalent_tmst(r, bath)
    return gamma_fidelity_from_blocks(input_covariance(y, orientation), *equivalence.blocks())


def margin_root(bath: BathParams, r_max: float = 10.0) -> Optional[float]:
    """margin 이 0 이 되는 r. [0, r_max] 에서 양수로 유지되면 None"""
    if equivalence_margin(r_max, bath) > MARGIN_FLOOR:
        return None
    return float(optimize.brentq(lambda r: equivalence_margin(r, bath), 0.0, r_max, xtol=1e-12))


def quantum_threshold(y: float, bath: BathParams, r_max: float = 10.0,
                      orientation: str = "standard") -> Optional[float]:
    """
    유효 영역에서 F > 0.5 가 되는 최소 r

    r=0 에서 이미 양자면 0, 유효 영역 안에서 넘지 못하면 None
    """
    root = margin_root(bath, r_max)
    upper = r_max if root is None else root - 1e-9

    def excess(r):
        return freespace_fidelity(y, r, bath, orientation) - CLASSICAL_FIDELITY

    if excess(0.0) > 0:
        return 0.0
    # 첫 부호 변화 구간을 찾은 뒤 brentq
    lo = 0.0
    for hi in np.linspace(0.0, upper, 257)[1:]:
        try:
            value = excess(hi)
        except ConstraintViolation:
            return None
        if value > 0:
            return float(optimize.brentq(excess, lo, hi, xtol=1e-12))
        lo = hi
    return None


def _sweep_rows(y: float, bath: BathParams, r_grid: Sequence[float], orientation: str):
    rows = []
    for r in r_grid:
        margin = equivalence_margin(r, bath)
        feasible = margin > MARGIN_FLOOR
        fidelity = freespace_fidelity(y, r, bath, orientation) if feasible else float("nan")
        rows.append({
            "y": float(y), "eta": bath.eta, "N": bath.N, "r": float(r),
            "margin": margin, "feasible": feasible, "fidelity": fidelity,
        })
    return rows


def fidelity_sweep(y_values: Iterable[float], r_grid: Iterable[float], bath_list: Iterable[BathParams],
                   orientation: str = "standard", workers: Optional[int] = None) -> pd.DataFrame:
    """
    (y, η, N, r) 격자 fidelity 곡선

    제약 위반은 실패가 아니라 feasible=False, fidelity=NaN 행.
    행 순서는 워커 수와 상관없이 (y, bath, r) 입력 순서.
    """
    y_values, r_grid, bath_list = list(y_values), list(r_grid), list(bath_list)
    if not (y_values and r_grid and bath_list):
        raise TeleportError("sweep grids must be nonempty")
    workers = workers or Config.SWEEP_WORKERS
    jobs = [(y, bath) for y in y_values for bath in bath_list]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _sweep_rows(job[0], job[1], r_grid, orientation), jobs))
    else:
        parts = [_sweep_rows(y, bath, r_grid, orientation) for y, bath in jobs]

    frame = pd.DataFrame([row for part in parts for row in part], columns=SWEEP_COLUMNS)
    logger.info(f"fidelity_sweep: {len(frame)} rows, {int((~frame['feasible']).sum())} infeasible")
    return frame
