from typing import Optional
import logging

LOG_FORMAT = "Datetime: %(asctime)s | Level: %(levelname)s | Logger: %(name)s | File: %(filename)s | Function/method: %(funcName)s | Message: %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_logger_object(
        logger_name: str,
        filepath: Optional[str] = None,
        level: Optional[int] = logging.WARNING,
    ) -> logging.Logger:
    """
    Gets `logging.Logger` object based on the given params.
    Logs go to `filepath` (appended) if given; otherwise to stderr.
    A handler is attached only once per (logger, destination), so calling this repeatedly is safe.

    >>> logger = get_logger_object(logger_name="kpriorpy.bench", filepath="bench.log", level=logging.INFO)
    >>> logger.info(msg="Grid started")

    ### References
        - https://docs.python.org/3/library/logging.html
        - https://docs.python.org/3/howto/logging-cookbook.html
    """
    logger_obj = logging.getLogger(name=logger_name)
    logger_obj.setLevel(level=level)
    if filepath is None:
        handler = logging.StreamHandler()
        destination = "<stderr>"
    else:
        handler = logging.FileHandler(filename=filepath, mode='a', encoding="utf8")
        destination = filepath
    already_attached = any(
        getattr(existing, "_kpriorpy_destination", None) == destination for existing in logger_obj.handlers
    )
    if already_attached:
        return logger_obj
    handler._kpriorpy_destination = destination
    handler.setFormatter(
        fmt=logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    )
    logger_obj.addHandler(hdlr=handler)
    return logger_obj


def set_package_log_level(level: int) -> None:
    """Sets the level of every logger created under the `kpriorpy` namespace"""
    for name, logger_obj in logging.root.manager.loggerDict.items():
        if name.startswith("kpriorpy") and isinstance(logger_obj, logging.Logger):
            logger_obj.setLevel(level=level)
    return None
