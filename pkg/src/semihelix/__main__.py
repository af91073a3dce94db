import sys

from semihelix.cli import main

sys.exit(main())
