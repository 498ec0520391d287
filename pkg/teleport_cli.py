"""
Teleport CLI - 명령줄 진입점
python teleport_cli.py table1|sweep|run|calibrate [--config PATH] [--out PATH] [--seed N] [--set key=value ...]

종료 코드: 0 성공, 2 계산은 됐지만 infeasible / 전 구간 고전, 1 에러
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional

from config import Config
from gaussian_core import TeleportError
from handlers import COMMANDS, STATUS_ERROR, dispatch
from run_config import ConfigError, parse_config

logger = logging.getLogger('teleport.cli')


def setup_logging() -> None:
    """라이브러리 모듈은 핸들러를 만들지 않고 여기서 한 번만 설정"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if Config.log_file_enabled():
        handlers.append(logging.FileHandler(Config.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


def _parse_overrides(pairs: Optional[List[str]]) -> Dict[str, str]:
    overrides: Dict[str, str] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got '{pair}'")
        key, value = (part.strip() for part in pair.split("=", 1))
        overrides[key] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleport_cli",
        description="Gaussian CV teleportation simulator: reference table reproduction, free-space sweeps, "
                    "microwave circuit runs and zero-input calibration",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="command to run")
    parser.add_argument("--config", metavar="PATH", help="key = value configuration file")
    parser.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides the config file)")
    parser.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()

    try:
        Config.validate()
        text = ""
        if args.config:
            with open(args.config, "r", encoding="utf-8") as f:
                text = f.read()
        overrides = _parse_overrides(args.overrides)
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        if args.out:
            overrides["output_path"] = args.out
        config = parse_config(text, overrides)

        logger.info(f"🚀 {args.command} (config hash {config.config_hash()}, seed {config.seed})")
        table = dispatch(args.command, config)
        csv_text = table.write(config.output_path)
        if not config.output_path:
            sys.stdout.write(csv_text)
        return table.status

    except (TeleportError, OSError, ValueError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return STATUS_ERROR


if __name__ == "__main__":
    sys.exit(main())
