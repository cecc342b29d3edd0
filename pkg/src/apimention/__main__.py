import sys

from apimention.cli import main

sys.exit(main())
