import functools
import logging
import os
import time

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def add_logging_to_step(step_name: str):
    """decorator for adding logging to every pipeline node and command handler"""

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger.info(f"[ENTER] {step_name}")
            start = time.perf_counter()

            try:
                result = func(*args, **kwargs)
                elapsed = (time.perf_counter() - start) * 1000
                logger.info(f"[EXIT] {step_name} ({elapsed:.2f} ms)")

                return result
            except Exception as e:
                elapsed = (time.perf_counter() - start) * 1000
                logger.error(f"[ERROR] {step_name} ({elapsed:.2f} ms) -> {type(e).__name__}: {e}")
                raise

        return wrapper

    return decorator


def configure_logging(level: str | None = None) -> logging.Logger:
    """
    Install a single stream handler on the ``topofabric`` logger.

    Args:
        level: Level name; when omitted the ``FABRIC_LOG`` environment variable is used.

    Returns:
        The configured package logger.
    """
    load_dotenv()
    requested = (level or os.environ.get("FABRIC_LOG") or "WARNING").upper()

    root = logging.getLogger("topofabric")
    for handler in list(root.handlers):
        if getattr(handler, "_fabric_handler", False):
            root.removeHandler(handler)

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    handler._fabric_handler = True  # type: ignore[attr-defined]
    root.addHandler(handler)

    if requested not in LEVELS:
        root.setLevel(logging.WARNING)
        logger.warning(f"Unknown log level '{requested}', falling back to WARNING")
    else:
        root.setLevel(getattr(logging, requested))
    return root
