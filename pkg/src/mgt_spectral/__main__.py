import sys

from .experiments_cli import main

sys.exit(main())
