import logging
from logging.handlers import RotatingFileHandler

import numpy as np

_ARRAY_PREVIEW = 6


class ArraySummaryFilter(logging.Filter):
    """Replace large numpy arrays in log arguments with a shape/range summary."""

    def filter(self, record: logging.LogRecord) -> bool:
        if isinstance(record.args, dict):
            record.args = {k: self._summarise(v) for k, v in record.args.items()}
        elif isinstance(record.args, tuple):
            record.args = tuple(self._summarise(a) for a in record.args)
        return True

    def _summarise(self, value):
        if isinstance(value, np.ndarray) and value.size > _ARRAY_PREVIEW:
            if value.size and np.issubdtype(value.dtype, np.number):
                return f"<array {value.shape} min={value.min():.4g} max={value.max():.4g}>"
            return f"<array {value.shape}>"
        return value


def configure_logging(log_file: str = "hv_geodesic.log", level: str = "INFO"):
    summary = ArraySummaryFilter()
    fh = RotatingFileHandler(
        log_file, maxBytes=10 * 1024 * 1024, backupCount=5, encoding="utf-8"
    )
    fh.addFilter(summary)
    ch = logging.StreamHandler()
    ch.addFilter(summary)
    ch.setLevel(logging.WARNING)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[fh, ch],
        force=True,
    )
