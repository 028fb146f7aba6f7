import sys

from shiftcast.cli import main

sys.exit(main())
