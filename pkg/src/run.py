# run.py
"""
Sechgate development entry point

Environment detection is based on SECHGATE_ENV:
- production: every core, full sweep grids
- development: full accuracy, modest parallelism (default)
- debug: coarse optimizer budgets, serial
- testing: serial, no refinement

Usage:
    python run.py derive --family IQSS_2PI_RES --theta-grid 0.25:1:4
    SECHGATE_ENV=production python run.py sweep-angle --out fig4.csv
"""

import logging

from sechgate import configure_logging, create_cli
from sechgate.config import get_config, get_environment

# ===========================================
# Environment Detection
# ===========================================

ENVIRONMENT = get_environment()
app_config = get_config()

# ===========================================
# Logging Setup
# ===========================================

configure_logging(app_config)
logger = logging.getLogger("sechgate.run")

logger.info(f"🚀 Starting sechgate in {ENVIRONMENT.upper()} mode")
logger.info(f"   Device file: {app_config.DEVICE_CONFIG}")
logger.info(f"   Workers: {app_config.SWEEP_WORKERS}")

# ===========================================
# Command line
# ===========================================

cli = create_cli(app_config)

if __name__ == "__main__":
    cli()
