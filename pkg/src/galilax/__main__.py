import sys

from galilax.cli import main

sys.exit(main())
