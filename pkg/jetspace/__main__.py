import sys

from jetspace.cli import main

sys.exit(main())
