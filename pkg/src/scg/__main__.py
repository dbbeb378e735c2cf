import sys

from scg.cli import main

sys.exit(main())
