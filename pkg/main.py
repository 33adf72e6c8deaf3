import logging
import sys

from disentangle.cli import configure_logging, main

configure_logging()
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    logger.debug("Starting disentangle from main.py")
    sys.exit(main())
