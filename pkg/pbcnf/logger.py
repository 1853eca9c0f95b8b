import logging
import os

LOG_FORMAT = "[%(levelname)s] %(asctime)s %(module)s:%(funcName)s:%(lineno)d %(msg)s"


def get_logger(name):
    """Module logger. Level comes from PBCNF_LOG_LEVEL (default INFO)."""
    logger = logging.getLogger(name)
    logging.basicConfig(
        format=LOG_FORMAT,
        level=os.environ.get("PBCNF_LOG_LEVEL", "INFO").upper(),
    )
    return logger
