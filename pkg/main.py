import logging
import sys
from config.build_config import BuildConfig
from config.check_config import CheckConfig
from src.lattice_tables.cli import EXIT_USAGE, main as cli_main
from src.lattice_tables.errors import LatticeTablesError


# Stdout carries command results, so logs go to stderr
logging.basicConfig(
    level=getattr(logging, CheckConfig.LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr)
    ]
)

logger = logging.getLogger(__name__)


def main():
    try:
        if not (BuildConfig.validate() and CheckConfig.validate()):
            logger.error("❌ Invalid LATTAB_* configuration, see .env.example")
            sys.exit(EXIT_USAGE)
        
        code = cli_main(sys.argv[1:])
        logger.debug(f"🏁 Exit code {code}")
        sys.exit(code)
        
    except KeyboardInterrupt:
        logger.info("👋 Interrupted")
        sys.exit(130)
    except LatticeTablesError as e:
        # Internal consistency failures: a proven property did not hold
        logger.error(f"❌ Fatal error: {str(e)}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":

    main()
