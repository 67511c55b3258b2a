import logging

logger = logging.getLogger("rootcontinuity")
