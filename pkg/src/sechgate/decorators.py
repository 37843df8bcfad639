"""
Command decorators.

Wrap click commands so toolkit errors turn into the documented exit codes
instead of tracebacks.
"""

from functools import wraps

import click

from sechgate.errors.handlers import handle_exception


def handle_errors(f):
    """
    Convert exceptions raised by a command into an exit code.

    Click's own control-flow exceptions (usage errors, ``ctx.exit``) pass
    through untouched; everything else is logged by the registered handler,
    echoed on stderr and mapped to its exit code.
    """
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (click.exceptions.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except Exception as error:
            code = handle_exception(error)
            click.echo(f"❌ {type(error).__name__}: {error}", err=True)
            click.get_current_context().exit(code)

    return decorated_function
