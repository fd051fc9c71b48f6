# ==========================
# Module: Logging
# Last Modified: 09 Oct 2026
# ==========================
import logging
import re
import sys
from pathlib import Path
from typing import List, Optional, Union

LOG_FORMAT = '%(asctime)s %(levelname)s %(message)s'

logger = logging.getLogger('crossmotion')
logger.addHandler(logging.NullHandler())


def setup_logging(log_path: Optional[Union[str, Path]] = None,
                  level: int = logging.INFO,
                  stream: bool = True):
    """Attach file and console handlers to the package logger

    Args:
        log_path (str or Path, optional): File to write the run log to (truncated on open). Defaults to None.
        level (int, optional): Logging level. Defaults to logging.INFO.
        stream (bool, optional): Also echo records to stderr. Defaults to True.

    Returns:
        logging.Logger: The configured package logger
    """
    for handler in list(logger.handlers):
        if not isinstance(handler, logging.NullHandler):
            logger.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, mode='w+')
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    if stream:
        stream_handler = logging.StreamHandler(sys.stderr)
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)

    logger.setLevel(level)
    logger.propagate = False

    return logger


def read_log_lines(log_path: Union[str, Path]) -> List[str]:
    """Read back the progress messages (lines tagged with [+]) of a run log

    Args:
        log_path (str or Path): Path to log file

    Returns:
        list: Progress messages with the timestamp and tag stripped
    """
    regexp = re.compile(r'\[\+\] (.*)')
    log_list = []
    with open(log_path) as file:
        for line in file.read().splitlines():
            match = regexp.search(line)
            if match:
                log_list.append(match.group(1))

    return log_list
