"""
Configuration for CV Teleport Simulator
프로세스 단위 설정 (로그, 허용오차, 시드, 병렬 워커)
"""
import os
from typing import Optional
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()

class Config:
    """환경 변수 및 설정 관리"""

    # 로깅
    LOG_LEVEL: str = os.getenv("TELEPORT_LOG_LEVEL", "INFO")
    LOG_FILE: Optional[str] = os.getenv("TELEPORT_LOG_FILE") or None

    # 재현성
    DEFAULT_SEED: int = int(os.getenv("TELEPORT_DEFAULT_SEED", "20240101"))

    # 수치 허용오차 (대칭성 / symplectic 검사 기본값)
    TOLERANCE: float = float(os.getenv("TELEPORT_TOLERANCE", "1e-10"))

    # 스윕 / 몬테카를로
    SWEEP_WORKERS: int = int(os.getenv("TELEPORT_SWEEP_WORKERS", "1"))
    MC_CHUNK: int = int(os.getenv("TELEPORT_MC_CHUNK", "4096"))

    # CSV 포맷 (유효숫자 12자리, locale 없음)
    FLOAT_FORMAT: str = "%.12g"

    @classmethod
    def validate(cls) -> bool:
        """설정값 검증"""
        if cls.TOLERANCE <= 0:
            raise ValueError("TELEPORT_TOLERANCE must be positive")

        if cls.MC_CHUNK < 1:
            raise ValueError("TELEPORT_MC_CHUNK must be >= 1")

        if cls.SWEEP_WORKERS < 1:
            raise ValueError("TELEPORT_SWEEP_WORKERS must be >= 1")

        return True

    @classmethod
    def log_file_enabled(cls) -> bool:
        """파일 로그 사용 여부"""
        return bool(cls.LOG_FILE)
