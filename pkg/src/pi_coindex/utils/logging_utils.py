import logging
from typing import Any, cast

# Define the TRACE level; any integer lower than 10 (DEBUG's level) will work.
TRACE_LEVEL = 5

logging.addLevelName(TRACE_LEVEL, "TRACE")


class CustomLogger(logging.getLoggerClass()):  # type: ignore[misc]
    def trace(self, message: str, *args: Any, **kwargs: Any) -> None:
        if self.isEnabledFor(TRACE_LEVEL):
            self._log(TRACE_LEVEL, message, args, **kwargs)


# Set the custom logger class
logging.setLoggerClass(CustomLogger)


def get_logger(name: str) -> CustomLogger:
    return cast(CustomLogger, logging.getLogger(name))


def verbosity_to_level(verbose: int) -> int:
    """Map a count of -v flags to a logging level."""
    if verbose <= 0:
        return logging.WARNING
    if verbose == 1:
        return logging.INFO
    if verbose == 2:
        return logging.DEBUG
    return TRACE_LEVEL


def configure_logging(verbose: int = 0) -> None:
    logging.basicConfig(
        level=verbosity_to_level(verbose),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
