import sys

from farhash.cli import main

sys.exit(main())
