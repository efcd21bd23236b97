import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str | int = "WARNING") -> None:
    if isinstance(level, str):
        level = level.upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    # numerical libraries are chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(max(logging.getLogger().level, logging.INFO))
