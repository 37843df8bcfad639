from .config import DebugConfig, get_config, get_environment
import logging

import click

__version__ = "1.0.0"

app_logger = logging.getLogger(__name__)


# --- Command-line Factory Function ---
def create_cli(config_object=DebugConfig):
    """Build the ``sechgate`` command group bound to ``config_object``."""

    @click.group(context_settings={"help_option_names": ["-h", "--help"]})
    @click.version_option(__version__, prog_name="sechgate")
    @click.pass_context
    def cli(ctx):
        """Sech-pulse CPHASE and X-rotation design for cavity-coupled transmons."""
        ctx.obj = config_object

    # --- Register Commands ---
    from .cli import register_cli_commands
    register_cli_commands(cli)

    return cli


def configure_logging(config_object):
    """DEBUG for debug-flagged environments, INFO otherwise; SECHGATE_LOG_LEVEL wins."""
    level = logging.DEBUG if getattr(config_object, "DEBUG", False) else logging.INFO
    if config_object.LOG_LEVEL:
        level = config_object.LOG_LEVEL.upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def main():
    """Console entry point."""
    environment = get_environment()
    config_object = get_config()
    configure_logging(config_object)
    app_logger.info(f"🚀 Starting sechgate in {environment.upper()} mode")
    create_cli(config_object)()
