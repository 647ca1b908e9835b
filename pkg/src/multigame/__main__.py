import sys

from multigame.cli import main

sys.exit(main())
