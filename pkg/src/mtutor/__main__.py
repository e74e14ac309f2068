"""Allow running the package with `python -m mtutor`."""

import sys

from .gateway.cli import main

sys.exit(main())
