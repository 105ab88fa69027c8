# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
import sys

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


class Helpers:
    @staticmethod
    def configure_logging(verbosity: int = 0) -> logging.Logger:
        """Route library logs to stderr: WARNING by default, INFO with -v, DEBUG with -vv."""
        level = logging.WARNING
        if verbosity == 1:
            level = logging.INFO
        elif verbosity >= 2:
            level = logging.DEBUG

        root = logging.getLogger()
        for handler in list(root.handlers):
            if getattr(handler, "_completion_cli", False):
                root.removeHandler(handler)

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._completion_cli = True
        root.addHandler(handler)
        root.setLevel(level)
        return logging.getLogger("core")

    @staticmethod
    def format_duration(seconds: float) -> str:
        if seconds < 1:
            return f"{seconds * 1000:.1f}ms"
        if seconds < 60:
            return f"{seconds:.2f}s"
        minutes, rest = divmod(seconds, 60)
        return f"{int(minutes)}m {rest:.1f}s"
