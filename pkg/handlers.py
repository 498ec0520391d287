"""
Teleport Handlers - 명령 라우터
table1 / sweep / run / calibrate 요청을 각 엔진에 라우팅하고 ReportTable 로 변환

CSV 스키마:
- 헤더 1행 + 데이터 행 (유효숫자 12자리, '.' 소수점)
- provenance footer (# provider, version, config_hash, seed, library versions)
- 타임스탬프 없음 → 같은 설정 + seed 면 바이트 단위로 동일
"""
import logging
from dataclasses import dataclass, field
from importlib import metadata
from typing import Dict, List, Optional, Sequence

import pandas as pd

from config import Config
from freespace_channel import SWEEP_COLUMNS, fidelity_sweep
from gaussian_core import TeleportError, purity, row_header, state_to_row
from microwave_circuit import calibrate_noise, end_to_end_run
from reference_table import REPORT_COLUMNS, ReferenceComparison
from run_config import RunConfig
from teleport_protocol import fidelity_closed_form, is_quantum, output_state, simulate_shots

logger = logging.getLogger('teleport.handlers')

PROVIDER = "cv-teleport-sim"
VERSION = "v1.0"

# footer 에 기록할 라이브러리
TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic")

# 명령 결과 상태 → 종료 코드
STATUS_OK = 0
STATUS_ERROR = 1
STATUS_INFEASIBLE = 2


def _library_versions() -> Dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


@dataclass
class ReportTable:
    """헤더 + 행 + provenance footer"""
    header: List[str]
    rows: List[List] = field(default_factory=list)
    provenance: Dict[str, str] = field(default_factory=dict)
    status: int = STATUS_OK

    def __post_init__(self):
        for row in self.rows:
            self._check_width(row)

    def _check_width(self, row: Sequence) -> None:
        if len(row) != len(self.header):
            raise TeleportError(f"row width {len(row)} does not match header width {len(self.header)}")

    def append(self, row: Sequence) -> None:
        self._check_width(row)
        self.rows.append(list(row))

    @classmethod
    def from_records(cls, records: List[Dict], header: Sequence[str], config: RunConfig,
                     status: int = STATUS_OK) -> "ReportTable":
        rows = [[record[column] for column in header] for record in records]
        return cls(header=list(header), rows=rows, provenance=provenance(config), status=status)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.header)

    def to_csv(self) -> str:
        body = self.to_frame().to_csv(index=False, float_format=Config.FLOAT_FORMAT, lineterminator="\n")
        footer = "".join(f"# {key}={value}\n" for key, value in self.provenance.items())
        return body + footer

    def write(self, path: Optional[str]) -> str:
        """CSV 를 path 에 쓰고 (없으면 쓰지 않음) 문자열을 반환"""
        text = self.to_csv()
        if path:
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            logger.info(f"📄 wrote {len(self.rows)} rows to {path}")
        return text


def provenance(config: RunConfig) -> Dict[str, str]:
    info = {
        "provider": PROVIDER,
        "version": VERSION,
        "config_hash": config.config_hash(),
        "seed": str(config.seed),
    }
    info.update({f"{name}_version": version for name, version in _library_versions().items()})
    return info


# ===== 명령 =====

def cmd_table1(config: Optional[RunConfig] = None) -> ReportTable:
    """
    [명령] table1
    냉동기 / 자유공간 구성의 τ, β, Λ, 잡음 계수를 인쇄값과 나란히
    """
    config = config or RunConfig()
    logger.info("🔬 table1: recomputing derived reference rows")
    records = ReferenceComparison(r=config.r).rows()
    return ReportTable.from_records(records, REPORT_COLUMNS, config)


def cmd_sweep(config: RunConfig) -> ReportTable:
    """
    [명령] sweep
    (y, η, N, r) 격자 자유공간 fidelity. 유효하고 양자인 점이 하나도 없으면 status 2
    """
    logger.info(
        f"🔬 sweep: {len(config.sweep_y)} y × {len(config.sweep_eta) * len(config.sweep_N)} baths "
        f"× {len(config.sweep_r)} r"
    )
    frame = fidelity_sweep(config.sweep_y, config.sweep_r, config.baths(),
                           orientation=config.input_orientation, workers=config.workers)
    quantum = frame["feasible"] & (frame["fidelity"] > 0.5)
    status = STATUS_OK if bool(quantum.any()) else STATUS_INFEASIBLE
    if status == STATUS_INFEASIBLE:
        logger.warning("⚠️ sweep: no feasible point beats the classical fidelity 0.5")
    return ReportTable.from_records(frame.to_dict("records"), SWEEP_COLUMNS, config, status=status)


RUN_COLUMNS = [
    "seed", "shots", "deterministic", "target_x", "target_p", "mean_x_out", "mean_p_out",
    "residual_mean_x", "residual_mean_p", "residual_var_x", "residual_var_p", "residual_max_abs",
    "lambda", "tau", "beta_db", "feasible", "tau_residual", "mismatch", "lo_amplitude", "adc_scale",
    "ideal_mean_x", "ideal_mean_p", "ideal_fidelity_estimate", "ideal_fidelity", "ideal_quantum",
]
# 이상적 출력 상태 (평균, 공분산 row-major) + 순도
IDEAL_STATE_COLUMNS = [f"ideal_out_{column}" for column in row_header(1)]
RUN_COLUMNS += IDEAL_STATE_COLUMNS + ["ideal_out_purity"]


def cmd_run(config: RunConfig) -> ReportTable:
    """
    [명령] run
    마이크로파 회로 end-to-end 실행 + 같은 입력/자원의 이상적 프로토콜 몬테카를로
    """
    logger.info(f"🔬 run: shots={config.shots} seed={config.seed} deterministic={config.deterministic}")
    input_spec, resource = config.input_spec(), config.resource_spec()
    report = end_to_end_run(input_spec, resource, config.setup(), seed=config.seed, shots=config.shots,
                            deterministic=config.deterministic, workers=config.workers)
    ideal = simulate_shots(input_spec, resource, shots=config.shots, seed=config.seed,
                           workers=config.workers, orientation=config.input_orientation,
                           deterministic=config.deterministic)
    ideal_fidelity = fidelity_closed_form(input_spec.y, resource.r, resource.n)
    ideal_out = output_state(input_spec, resource.state(), orientation=config.input_orientation)

    record = report.to_row()
    record.update({
        "ideal_mean_x": float(ideal.output_mean[0]),
        "ideal_mean_p": float(ideal.output_mean[1]),
        "ideal_fidelity_estimate": ideal.fidelity_estimate,
        "ideal_fidelity": ideal_fidelity,
        "ideal_quantum": is_quantum(ideal_fidelity),
    })
    record.update(zip(IDEAL_STATE_COLUMNS, state_to_row(ideal_out)))
    record["ideal_out_purity"] = purity(ideal_out)
    status = STATUS_OK if report.feasible else STATUS_INFEASIBLE
    return ReportTable.from_records([record], RUN_COLUMNS, config, status=status)


def cmd_calibrate(config: RunConfig) -> ReportTable:
    """
    [명령] calibrate
    zero-input 잡음 캘리브레이션 (경험적 ζ' 통계, 해석적 계수, 재구성 배선 확인 계수)
    """
    logger.info(f"🔬 calibrate: shots={config.shots} seed={config.seed}")
    report = calibrate_noise(config.setup(), r=config.r, shots=config.shots, seed=config.seed, n=config.n)
    record = report.to_row()
    status = STATUS_OK if report.settings.feasible else STATUS_INFEASIBLE
    return ReportTable.from_records([record], list(record.keys()), config, status=status)


COMMANDS = {
    "table1": cmd_table1,
    "sweep": cmd_sweep,
    "run": cmd_run,
    "calibrate": cmd_calibrate,
}


def dispatch(command: str, config: RunConfig) -> ReportTable:
    if command not in COMMANDS:
        raise TeleportError(f"unknown command '{command}' (expected one of {', '.join(COMMANDS)})")
    table = COMMANDS[command](config)
    logger.info(f"✅ {command}: {len(table.rows)} rows, status={table.status}")
    return table
