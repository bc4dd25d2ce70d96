"""Entry point for ``python -m vnoip``."""
import sys

from .cli import main

sys.exit(main())
