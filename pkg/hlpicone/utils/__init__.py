import logging
from pathlib import Path
from typing import Optional, Union

from .report_io import dumps_report, format_float, write_report

LOG_FORMAT = "%(asctime)s %(levelname)s [%(filename)s:%(lineno)d] %(message)s"


def setup_logger(log_level: str = "warning", log_filename: Optional[Union[str, Path]] = None) -> None:
    """Configure the root logger; messages go to stderr and, optionally, a file."""
    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"unknown log level {log_level!r}")
    handlers = [logging.StreamHandler()]
    if log_filename is not None:
        Path(log_filename).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_filename, mode="w"))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
