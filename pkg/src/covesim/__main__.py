import sys

from covesim.cli import main

sys.exit(main())
