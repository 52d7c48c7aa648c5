import logging

logger = logging.getLogger("lfads")


def configure_logging(level: int = logging.INFO) -> None:
    """
    Attach a stderr handler to the package logger.

    Library code never calls this; entry points do, once.

    :param level: The logging level for the package logger.
    """
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)
    logger.setLevel(level)
