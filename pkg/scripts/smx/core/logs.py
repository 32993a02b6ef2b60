"""
Logging setup - every message is rendered as "[Tag] message".

Colours follow the managers' old console output and are switched off when the
stream is not a terminal or SMX_NO_COLOR is set.
"""
import logging
import os
import sys

from dotenv import load_dotenv

GREEN = '\033[92m'
YELLOW = '\033[93m'
RED = '\033[91m'
BOLD = '\033[1m'
END = '\033[0m'

SUCCESS = 25
logging.addLevelName(SUCCESS, "SUCCESS")

_ROOT_NAME = "smx"
_configured = False


class TagFormatter(logging.Formatter):
    """Formats records as '[Tag] message' with optional ANSI colours."""

    COLOURS = {
        SUCCESS: GREEN,
        logging.WARNING: YELLOW,
        logging.ERROR: RED,
        logging.CRITICAL: RED + BOLD,
    }

    def __init__(self, use_colour: bool):
        super().__init__()
        self.use_colour = use_colour

    def format(self, record: logging.LogRecord) -> str:
        tag = record.name.split(".")[-1] if record.name != _ROOT_NAME else "smx"
        text = f"[{tag}] {record.getMessage()}"
        if record.exc_info:
            text = f"{text}\n{self.formatException(record.exc_info)}"
        colour = self.COLOURS.get(record.levelno)
        if self.use_colour and colour:
            return f"{colour}{text}{END}"
        return text


def _configure() -> None:
    global _configured
    if _configured:
        return
    load_dotenv()
    level_name = os.getenv("SMX_LOG_LEVEL", "INFO").upper()
    handler = logging.StreamHandler(sys.stderr)
    use_colour = sys.stderr.isatty() and not os.getenv("SMX_NO_COLOR")
    handler.setFormatter(TagFormatter(use_colour))
    root = logging.getLogger(_ROOT_NAME)
    root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.INFO))
    root.propagate = False
    _configured = True


def get_logger(tag: str) -> logging.Logger:
    """Return the project logger for a tag such as 'Plan' or 'Contract'."""
    _configure()
    return logging.getLogger(f"{_ROOT_NAME}.{tag}")


def log_success(logger: logging.Logger, message: str, *args) -> None:
    logger.log(SUCCESS, message, *args)
